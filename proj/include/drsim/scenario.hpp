#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace drsim {

struct TimeGrid {
  int slot_count = 24;
  double slot_hours = 1.0;
};

// Per-slot generating coefficients, profit coefficient and capacity bounds.
// Cost of producing g kW in slot t is (a[t]/2) g^2 + b[t] g + c[t]; the
// broadcast price is lambda[t] * (a[t] g + b[t]).
struct GenModel {
  std::vector<double> a;       // money/kW^2
  std::vector<double> b;       // money/kW
  std::vector<double> c;       // money
  std::vector<double> lambda;  // dimensionless, >= 1
  std::vector<double> g_cap;   // kW, generation capacity
  std::vector<double> l_cap;   // kW, demand ceiling
};

struct UserGroup {
  std::string name;
  int count = 0;
  std::vector<double> omega;  // satisfaction preference, per slot
  double theta = 0.0;         // satisfaction curvature, > 0
  double min_frac = 0.0;      // lower demand bound as fraction of nominal
  double max_frac = 0.0;      // upper demand bound as fraction of nominal
  std::vector<double> nominal;  // per-user nominal load, kW per slot
  bool has_bev = false;

  std::vector<double> lower_bounds() const;  // min_frac * nominal
  std::vector<double> upper_bounds() const;  // max_frac * nominal
  double daily_total() const;                // sum of nominal, the fixed daily energy
};

struct BevSpec {
  std::string label;
  double market_share = 0.0;
  double battery_kwh = 0.0;
  double rated_kw = 0.0;
  double range_miles = 0.0;
};

struct DistSpec {
  enum class Family { Point, Uniform, Normal, LogNormal, Histogram };
  Family family = Family::Point;
  double value = 0.0;   // Point
  double mean = 0.0;    // Normal
  double stddev = 0.0;  // Normal
  double median = 0.0;  // LogNormal
  double sigma = 0.0;   // LogNormal
  double lo = 0.0;      // truncation bounds, also the Uniform range
  double hi = 0.0;
  std::vector<std::pair<double, double>> bins;  // Histogram: (value, weight)
};

struct BehaviorDistributions {
  DistSpec arrival;    // hours in [0, 24)
  DistSpec departure;  // hours in [0, 24), next day
  DistSpec distance;   // miles
};

// How the broadcast price's generation argument is formed during iteration:
// track the aggregate demand exactly, or run the variance-minimising dispatch
// and price off its (flatter) output. Demand tracking is the default; the
// flat dispatch yields near-constant prices and hence almost no load shifting.
enum class PriceBasis { Demand, VariancePlan };

struct Scenario {
  TimeGrid grid;
  GenModel gen;
  std::vector<UserGroup> groups;
  std::vector<BevSpec> fleet;
  BehaviorDistributions behavior;
  int bev_count = 0;
  std::optional<int> t_max_active;  // cap on active battery hours; default: home-window length
  PriceBasis price_basis = PriceBasis::Demand;
  int trials = 200;
  std::uint64_t seed = 42;
  int max_rounds = 50;
  double epsilon = 1e-3;
  std::vector<std::string> update_order;  // group names; empty = declaration order

  int total_users() const;
  void validate() const;  // throws ValidationError naming the violated invariant
  nlohmann::ordered_json to_json() const;
};

Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);
Scenario default_scenario();

// Aggregate nominal household demand per slot (BEV load excluded).
std::vector<double> nominal_aggregate(const Scenario& s);

}  // namespace drsim
