#include "drsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "drsim/errors.hpp"

namespace drsim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

bool finite(double v) { return std::isfinite(v); }

// A per-slot field may be a number (constant over the day), a full array, or
// {"default": x, "windows": [{"from_hour": 0, "to_hour": 8, "value": y}, ...]}
// with from inclusive and to exclusive.
std::vector<double> parse_per_slot(const json& j, const std::string& key, int slots,
                                   std::optional<double> fallback) {
  if (!j.contains(key)) {
    if (fallback) return std::vector<double>(slots, *fallback);
    throw ParseError("missing required per-slot field '" + key + "'");
  }
  const json& v = j.at(key);
  if (v.is_number()) return std::vector<double>(slots, v.get<double>());
  if (v.is_array()) {
    if (static_cast<int>(v.size()) != slots)
      throw ParseError("field '" + key + "' has " + std::to_string(v.size()) +
                       " entries, expected slot_count=" + std::to_string(slots));
    return v.get<std::vector<double>>();
  }
  if (v.is_object()) {
    std::vector<double> out(slots, v.value("default", fallback.value_or(0.0)));
    for (const auto& w : v.value("windows", json::array())) {
      const int from = w.at("from_hour").get<int>();
      const int to = w.at("to_hour").get<int>();
      if (from < 0 || to > slots || from >= to)
        throw ParseError("field '" + key + "': window [" + std::to_string(from) + ", " +
                         std::to_string(to) + ") outside slot range");
      std::fill(out.begin() + from, out.begin() + to, w.at("value").get<double>());
    }
    return out;
  }
  throw ParseError("field '" + key + "' must be a number, array or window object");
}

std::vector<std::pair<double, double>> load_histogram_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open histogram file " + path.string());
  std::vector<std::pair<double, double>> bins;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double value = 0, weight = 0;
    if (ls >> value >> weight) bins.emplace_back(value, weight);
  }
  if (bins.empty()) throw ParseError("histogram file " + path.string() + " has no bins");
  return bins;
}

DistSpec parse_dist(const json& j, const std::string& key, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ParseError("distribution '" + key + "' must be an object");
  DistSpec d;
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "point") {
    d.family = DistSpec::Family::Point;
    d.value = j.at("value").get<double>();
    d.lo = j.value("min", d.value);
    d.hi = j.value("max", d.value);
  } else if (fam == "uniform") {
    d.family = DistSpec::Family::Uniform;
    d.lo = j.at("min").get<double>();
    d.hi = j.at("max").get<double>();
  } else if (fam == "normal") {
    d.family = DistSpec::Family::Normal;
    d.mean = j.at("mean").get<double>();
    d.stddev = j.at("stddev").get<double>();
    d.lo = j.at("min").get<double>();
    d.hi = j.at("max").get<double>();
  } else if (fam == "lognormal") {
    d.family = DistSpec::Family::LogNormal;
    d.median = j.at("median").get<double>();
    d.sigma = j.at("sigma").get<double>();
    d.lo = j.at("min").get<double>();
    d.hi = j.at("max").get<double>();
  } else if (fam == "histogram") {
    d.family = DistSpec::Family::Histogram;
    if (j.contains("file"))
      d.bins = load_histogram_file(base_dir / j.at("file").get<std::string>());
    else
      for (const auto& b : j.at("bins")) d.bins.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
    double blo = d.bins.front().first, bhi = d.bins.front().first;
    for (const auto& [v, w] : d.bins) {
      blo = std::min(blo, v);
      bhi = std::max(bhi, v);
    }
    d.lo = j.value("min", blo);
    d.hi = j.value("max", bhi);
  } else {
    throw ParseError("distribution '" + key + "': unknown family '" + fam + "'");
  }
  return d;
}

void validate_dist(const DistSpec& d, const std::string& key, bool nonnegative) {
  require(finite(d.lo) && finite(d.hi), "distribution '" + key + "': truncation bounds must be finite");
  require(d.lo <= d.hi, "distribution '" + key + "': min must be <= max");
  if (nonnegative) require(d.lo >= 0, "distribution '" + key + "': lower bound must be >= 0");
  switch (d.family) {
    case DistSpec::Family::Point:
      require(d.value >= d.lo && d.value <= d.hi, "distribution '" + key + "': point value outside bounds");
      break;
    case DistSpec::Family::Normal:
      require(d.stddev >= 0, "distribution '" + key + "': stddev must be >= 0");
      break;
    case DistSpec::Family::LogNormal:
      require(d.median > 0, "distribution '" + key + "': median must be > 0");
      require(d.sigma >= 0, "distribution '" + key + "': sigma must be >= 0");
      break;
    case DistSpec::Family::Histogram: {
      require(!d.bins.empty(), "distribution '" + key + "': histogram needs at least one bin");
      double total = 0;
      for (const auto& [v, w] : d.bins) {
        require(w >= 0, "distribution '" + key + "': histogram weights must be >= 0");
        require(v >= d.lo && v <= d.hi, "distribution '" + key + "': histogram value outside bounds");
        total += w;
      }
      require(total > 0, "distribution '" + key + "': histogram weights sum to zero");
      break;
    }
    case DistSpec::Family::Uniform:
      break;
  }
}

json dist_to_json(const DistSpec& d) {
  ordered_json j;
  switch (d.family) {
    case DistSpec::Family::Point:
      j["family"] = "point";
      j["value"] = d.value;
      break;
    case DistSpec::Family::Uniform:
      j["family"] = "uniform";
      break;
    case DistSpec::Family::Normal:
      j["family"] = "normal";
      j["mean"] = d.mean;
      j["stddev"] = d.stddev;
      break;
    case DistSpec::Family::LogNormal:
      j["family"] = "lognormal";
      j["median"] = d.median;
      j["sigma"] = d.sigma;
      break;
    case DistSpec::Family::Histogram: {
      j["family"] = "histogram";
      json bins = json::array();
      for (const auto& [v, w] : d.bins) bins.push_back(json::array({v, w}));
      j["bins"] = bins;
      break;
    }
  }
  j["min"] = d.lo;
  j["max"] = d.hi;
  return j;
}

// Per-user double-peak residential profile, kW per hour. The simulator ships
// this as the default since measured profiles are deployment-specific.
constexpr double kDefaultNominal[24] = {0.62, 0.55, 0.51, 0.50, 0.52, 0.60, 0.85, 1.25,
                                        1.40, 1.22, 1.05, 1.00, 0.98, 0.95, 0.98, 1.05,
                                        1.18, 1.42, 1.60, 1.58, 1.48, 1.30, 1.02, 0.78};

}  // namespace

std::vector<double> UserGroup::lower_bounds() const {
  std::vector<double> v(nominal.size());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = min_frac * nominal[t];
  return v;
}

std::vector<double> UserGroup::upper_bounds() const {
  std::vector<double> v(nominal.size());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = max_frac * nominal[t];
  return v;
}

double UserGroup::daily_total() const {
  return std::accumulate(nominal.begin(), nominal.end(), 0.0);
}

int Scenario::total_users() const {
  int n = 0;
  for (const auto& g : groups) n += g.count;
  return n;
}

void Scenario::validate() const {
  require(grid.slot_count >= 2, "grid.slot_count must be >= 2");
  require(grid.slot_hours > 0, "grid.slot_hours must be > 0");
  const auto slots = static_cast<std::size_t>(grid.slot_count);

  auto check_len = [&](const std::vector<double>& v, const std::string& what) {
    require(v.size() == slots, what + " must have slot_count entries");
  };
  check_len(gen.a, "generation.a");
  check_len(gen.b, "generation.b");
  check_len(gen.c, "generation.c");
  check_len(gen.lambda, "generation.lambda");
  check_len(gen.g_cap, "generation.g_cap");
  check_len(gen.l_cap, "generation.l_cap");
  for (std::size_t t = 0; t < slots; ++t) {
    require(gen.a[t] > 0, "generation.a must be > 0 at every slot (strictly convex cost)");
    require(gen.b[t] >= 0, "generation.b must be >= 0");
    require(gen.lambda[t] >= 1, "generation.lambda must be >= 1 (retailer margin)");
    require(gen.g_cap[t] > 0, "generation.g_cap must be > 0");
    require(gen.l_cap[t] > 0, "generation.l_cap must be > 0");
  }

  int bev_capacity = 0;
  for (const auto& g : groups) {
    const std::string who = "group '" + g.name + "'";
    require(!g.name.empty(), "every group needs a name");
    require(g.count >= 0, who + ": count must be >= 0");
    require(g.theta > 0, who + ": theta must be > 0 (satisfaction curvature)");
    check_len(g.omega, who + ": omega");
    check_len(g.nominal, who + ": nominal");
    for (std::size_t t = 0; t < slots; ++t) {
      require(g.omega[t] > 0, who + ": omega must be > 0 at every slot");
      require(g.nominal[t] >= 0, who + ": nominal load must be >= 0");
    }
    require(g.min_frac >= 0 && g.min_frac <= 1, who + ": min_frac must be within [0, 1]");
    require(g.max_frac >= 1, who + ": max_frac must be >= 1");
    if (g.has_bev) bev_capacity += g.count;
  }

  require(bev_count >= 0, "bev_count must be >= 0");
  if (bev_count > 0) {
    require(!fleet.empty(), "bev_count > 0 requires a non-empty fleet");
    require(bev_count <= bev_capacity,
            "bev_count exceeds the number of users in BEV-owning groups");
    double share_sum = 0;
    for (const auto& f : fleet) {
      const std::string who = "fleet entry '" + f.label + "'";
      require(f.market_share >= 0, who + ": market_share must be >= 0");
      require(f.battery_kwh > 0, who + ": battery_kwh must be > 0");
      require(f.rated_kw > 0, who + ": rated_kw must be > 0");
      require(f.range_miles > 0, who + ": range_miles must be > 0");
      share_sum += f.market_share;
    }
    require(std::fabs(share_sum - 1.0) <= 1e-9, "fleet market shares must sum to 1");
    validate_dist(behavior.arrival, "arrival", false);
    validate_dist(behavior.departure, "departure", false);
    validate_dist(behavior.distance, "distance", true);
    if (t_max_active) require(*t_max_active >= 1, "t_max_active must be >= 1 when given");
  }

  require(trials >= 1, "trials must be >= 1");
  require(max_rounds >= 1, "max_rounds must be >= 1");
  require(epsilon > 0, "epsilon must be > 0");

  if (!update_order.empty()) {
    require(update_order.size() == groups.size(), "update_order must list every group exactly once");
    for (const auto& name : update_order) {
      const bool found = std::any_of(groups.begin(), groups.end(),
                                     [&](const UserGroup& g) { return g.name == name; });
      require(found, "update_order names unknown group '" + name + "'");
    }
  }
}

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  Scenario s = default_scenario();
  try {
    if (j.contains("grid")) {
      s.grid.slot_count = j["grid"].value("slot_count", 24);
      s.grid.slot_hours = j["grid"].value("slot_hours", 1.0);
    }
    const int slots = s.grid.slot_count;

    if (j.contains("generation")) {
      const json& g = j["generation"];
      s.gen.a = parse_per_slot(g, "a", slots, 0.01);
      s.gen.b = parse_per_slot(g, "b", slots, 0.2);
      s.gen.c = parse_per_slot(g, "c", slots, 0.0);
      s.gen.lambda = parse_per_slot(g, "lambda", slots, 1.2);
      s.gen.g_cap = parse_per_slot(g, "g_cap", slots, 6000.0);
      s.gen.l_cap = parse_per_slot(g, "l_cap", slots, 6000.0);
    } else if (slots != 24) {
      Scenario d = default_scenario();
      s.gen.a.assign(slots, d.gen.a[0]);
      s.gen.b.assign(slots, d.gen.b[0]);
      s.gen.c.assign(slots, d.gen.c[0]);
      s.gen.lambda.assign(slots, d.gen.lambda[0]);
      s.gen.g_cap.assign(slots, d.gen.g_cap[0]);
      s.gen.l_cap.assign(slots, d.gen.l_cap[0]);
    }

    if (j.contains("groups")) {
      s.groups.clear();
      for (const auto& gj : j["groups"]) {
        UserGroup g;
        g.name = gj.at("name").get<std::string>();
        g.count = gj.at("count").get<int>();
        g.omega = parse_per_slot(gj, "omega", slots, std::nullopt);
        g.theta = gj.at("theta").get<double>();
        g.min_frac = gj.at("min_frac").get<double>();
        g.max_frac = gj.at("max_frac").get<double>();
        g.nominal = parse_per_slot(gj, "nominal", slots, std::nullopt);
        g.has_bev = gj.value("has_bev", false);
        s.groups.push_back(std::move(g));
      }
    }

    if (j.contains("fleet")) {
      s.fleet.clear();
      for (const auto& fj : j["fleet"]) {
        BevSpec f;
        f.label = fj.at("label").get<std::string>();
        f.market_share = fj.at("market_share").get<double>();
        f.battery_kwh = fj.at("battery_kwh").get<double>();
        f.rated_kw = fj.at("rated_kw").get<double>();
        f.range_miles = fj.at("range_miles").get<double>();
        s.fleet.push_back(std::move(f));
      }
    }

    if (j.contains("behavior")) {
      const json& b = j["behavior"];
      if (b.contains("arrival")) s.behavior.arrival = parse_dist(b["arrival"], "arrival", base_dir);
      if (b.contains("departure"))
        s.behavior.departure = parse_dist(b["departure"], "departure", base_dir);
      if (b.contains("distance"))
        s.behavior.distance = parse_dist(b["distance"], "distance", base_dir);
    }

    s.bev_count = j.value("bev_count", s.bev_count);
    if (j.contains("t_max_active") && !j["t_max_active"].is_null())
      s.t_max_active = j["t_max_active"].get<int>();
    if (j.contains("price_basis")) {
      const std::string basis = j["price_basis"].get<std::string>();
      if (basis == "demand")
        s.price_basis = PriceBasis::Demand;
      else if (basis == "variance_plan")
        s.price_basis = PriceBasis::VariancePlan;
      else
        throw ParseError("price_basis must be 'demand' or 'variance_plan', got '" + basis + "'");
    }
    s.trials = j.value("trials", s.trials);
    s.seed = j.value("seed", s.seed);
    s.max_rounds = j.value("max_rounds", s.max_rounds);
    s.epsilon = j.value("epsilon", s.epsilon);
    if (j.contains("update_order")) s.update_order = j["update_order"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed scenario: ") + e.what());
  }

  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ParseError("cannot parse " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j, path.parent_path());
}

Scenario default_scenario() {
  Scenario s;
  s.grid = TimeGrid{};
  const int slots = s.grid.slot_count;
  s.gen.a.assign(slots, 0.01);
  s.gen.b.assign(slots, 0.2);
  s.gen.c.assign(slots, 0.0);
  s.gen.lambda.assign(slots, 1.2);
  s.gen.g_cap.assign(slots, 6000.0);
  s.gen.l_cap.assign(slots, 6000.0);

  const std::vector<double> nominal(kDefaultNominal, kDefaultNominal + 24);
  auto make_group = [&](std::string name, int count, double omega, double min_frac,
                        double max_frac, bool has_bev) {
    UserGroup g;
    g.name = std::move(name);
    g.count = count;
    g.omega.assign(slots, omega);
    g.theta = 0.1;
    g.min_frac = min_frac;
    g.max_frac = max_frac;
    g.nominal = nominal;
    g.has_bev = has_bev;
    return g;
  };
  s.groups = {
      make_group("residential_1", 800, 5.0, 0.70, 1.50, true),
      make_group("residential_2", 700, 5.5, 0.75, 1.40, false),
      make_group("residential_3", 900, 6.0, 0.80, 1.20, false),
  };

  s.fleet = {
      {"compact_sedan", 0.5148, 33.0, 7.0, 114.0},
      {"midsize_sedan", 0.1035, 75.0, 11.5, 259.0},
      {"midsize_suv", 0.3817, 100.0, 17.2, 295.0},
  };

  s.behavior.arrival = {DistSpec::Family::Normal, 0, 17.5, 2.5, 0, 0, 12.0, 23.9, {}};
  s.behavior.departure = {DistSpec::Family::Normal, 0, 7.5, 1.5, 0, 0, 4.0, 12.0, {}};
  s.behavior.distance = {DistSpec::Family::LogNormal, 0, 0, 0, 25.0, 0.6, 1.0, 300.0, {}};

  s.bev_count = 50;
  s.t_max_active.reset();
  s.trials = 200;
  s.seed = 42;
  s.max_rounds = 50;
  s.epsilon = 1e-3;
  return s;
}

nlohmann::ordered_json Scenario::to_json() const {
  ordered_json j;
  j["grid"] = {{"slot_count", grid.slot_count}, {"slot_hours", grid.slot_hours}};
  j["generation"] = {{"a", gen.a},       {"b", gen.b},         {"c", gen.c},
                     {"lambda", gen.lambda}, {"g_cap", gen.g_cap}, {"l_cap", gen.l_cap}};
  j["groups"] = ordered_json::array();
  for (const auto& g : groups) {
    ordered_json gj;
    gj["name"] = g.name;
    gj["count"] = g.count;
    gj["omega"] = g.omega;
    gj["theta"] = g.theta;
    gj["min_frac"] = g.min_frac;
    gj["max_frac"] = g.max_frac;
    gj["nominal"] = g.nominal;
    gj["has_bev"] = g.has_bev;
    j["groups"].push_back(gj);
  }
  j["fleet"] = ordered_json::array();
  for (const auto& f : fleet) {
    ordered_json fj;
    fj["label"] = f.label;
    fj["market_share"] = f.market_share;
    fj["battery_kwh"] = f.battery_kwh;
    fj["rated_kw"] = f.rated_kw;
    fj["range_miles"] = f.range_miles;
    j["fleet"].push_back(fj);
  }
  j["behavior"] = {{"arrival", dist_to_json(behavior.arrival)},
                   {"departure", dist_to_json(behavior.departure)},
                   {"distance", dist_to_json(behavior.distance)}};
  j["bev_count"] = bev_count;
  if (t_max_active)
    j["t_max_active"] = *t_max_active;
  else
    j["t_max_active"] = nullptr;
  j["price_basis"] = price_basis == PriceBasis::Demand ? "demand" : "variance_plan";
  j["trials"] = trials;
  j["seed"] = seed;
  j["max_rounds"] = max_rounds;
  j["epsilon"] = epsilon;
  if (!update_order.empty()) j["update_order"] = update_order;
  return j;
}

std::vector<double> nominal_aggregate(const Scenario& s) {
  std::vector<double> agg(s.grid.slot_count, 0.0);
  for (const auto& g : s.groups)
    for (int t = 0; t < s.grid.slot_count; ++t) agg[t] += g.count * g.nominal[t];
  return agg;
}

}  // namespace drsim
