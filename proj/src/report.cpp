#include "drsim/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "drsim/errors.hpp"
#include "drsim/kernels.hpp"
#include "drsim/pricing.hpp"

namespace drsim {

using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Metrics trial_metrics(const TrialResult& r, const GenModel& gen, double slot_hours) {
  Metrics m;
  m.peak_kw = kernels::max_val(r.aggregate);
  m.energy_kwh = kernels::sum(r.aggregate) * slot_hours;
  m.payments = kernels::dot(r.prices, r.aggregate) * slot_hours;
  m.cost = total_generation_cost(gen, r.generation);
  return m;
}

ModeStats aggregate_stats(const std::vector<TrialResult>& results, const GenModel& gen,
                          double slot_hours, std::size_t group_count) {
  if (results.empty()) throw ValidationError("no trial results to aggregate");
  const std::size_t n = results.size();
  const std::size_t slots = results[0].aggregate.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  ModeStats st;
  st.trials = static_cast<int>(n);
  st.g_mean.assign(slots, 0.0);
  st.g_std.assign(slots, 0.0);
  st.price_mean.assign(slots, 0.0);
  st.aggregate_mean.assign(slots, 0.0);
  st.bev_mean.assign(slots, 0.0);
  st.group_mean.assign(group_count, std::vector<double>(slots, 0.0));

  int converged = 0;
  double rounds = 0;
  for (const auto& r : results) {
    const Metrics m = trial_metrics(r, gen, slot_hours);
    st.mean.peak_kw += m.peak_kw;
    st.mean.energy_kwh += m.energy_kwh;
    st.mean.payments += m.payments;
    st.mean.cost += m.cost;
    if (m.payments <= m.cost) st.payments_exceed_cost_all = false;
    converged += r.converged ? 1 : 0;
    rounds += r.rounds;
    st.max_conservation_gap = std::max(st.max_conservation_gap, r.conservation_gap);
    st.soc_full_all = st.soc_full_all && r.soc_full_at_departure;
    st.soc_in_range_all = st.soc_in_range_all && r.soc_path_in_range;
    st.mean_initial_variance += r.initial_load_variance;
    st.mean_final_variance += r.final_load_variance;
    for (std::size_t t = 0; t < slots; ++t) {
      st.g_mean[t] += r.generation[t];
      st.price_mean[t] += r.prices[t];
      st.aggregate_mean[t] += r.aggregate[t];
      st.bev_mean[t] += r.bev_load[t];
    }
    for (std::size_t g = 0; g < group_count; ++g)
      for (std::size_t t = 0; t < slots; ++t) st.group_mean[g][t] += r.group_load[g][t];
  }
  st.mean.peak_kw *= inv_n;
  st.mean.energy_kwh *= inv_n;
  st.mean.payments *= inv_n;
  st.mean.cost *= inv_n;
  st.convergence_rate = converged * inv_n;
  st.mean_rounds = rounds * inv_n;
  st.mean_initial_variance *= inv_n;
  st.mean_final_variance *= inv_n;
  for (std::size_t t = 0; t < slots; ++t) {
    st.g_mean[t] *= inv_n;
    st.price_mean[t] *= inv_n;
    st.aggregate_mean[t] *= inv_n;
    st.bev_mean[t] *= inv_n;
  }
  for (auto& gm : st.group_mean)
    for (auto& v : gm) v *= inv_n;

  if (n > 1) {
    for (std::size_t t = 0; t < slots; ++t) {
      double ss = 0;
      for (const auto& r : results) {
        const double d = r.generation[t] - st.g_mean[t];
        ss += d * d;
      }
      st.g_std[t] = std::sqrt(ss / static_cast<double>(n - 1));
    }
  }
  return st;
}

std::vector<double> conventional_price(const Scenario& s) {
  const std::vector<double> agg = nominal_aggregate(s);
  const double mean = kernels::sum(agg) / static_cast<double>(agg.size());
  std::vector<double> p(agg.size());
  for (std::size_t t = 0; t < p.size(); ++t)
    p[t] = s.gen.lambda[t] * (s.gen.a[t] * mean + s.gen.b[t]);
  return p;
}

RunOutput execute_run(const Scenario& s, const std::string& mode, int threads) {
  if (mode != "both" && mode != "baseline" && mode != "rtp-v2g" && mode != "rtp-only")
    throw ValidationError("unknown mode '" + mode +
                          "' (expected both, baseline, rtp-v2g or rtp-only)");
  RunOutput out;
  out.scenario = s;
  out.mode = mode;
  const std::size_t groups = s.groups.size();
  const auto baseline_results = run_all(s, Mode::Baseline, threads);
  out.baseline = aggregate_stats(baseline_results, s.gen, s.grid.slot_hours, groups);
  if (mode != "baseline") {
    const Mode m = mode == "rtp-only" ? Mode::RtpOnly : Mode::RtpV2g;
    const auto results = run_all(s, m, threads);
    out.optimized = aggregate_stats(results, s.gen, s.grid.slot_hours, groups);
  }
  return out;
}

namespace {

ordered_json stats_json(const ModeStats& st) {
  ordered_json j;
  j["trials"] = st.trials;
  j["peak_kw"] = st.mean.peak_kw;
  j["energy_kwh"] = st.mean.energy_kwh;
  j["payments"] = st.mean.payments;
  j["generation_cost"] = st.mean.cost;
  j["payments_exceed_cost_in_every_trial"] = st.payments_exceed_cost_all;
  j["convergence_rate"] = st.convergence_rate;
  j["mean_rounds"] = st.mean_rounds;
  j["max_daily_total_drift"] = st.max_conservation_gap;
  j["soc_full_at_departure"] = st.soc_full_all;
  j["soc_path_in_range"] = st.soc_in_range_all;
  j["load_variance_initial"] = st.mean_initial_variance;
  j["load_variance_final"] = st.mean_final_variance;
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << body;
  if (!f) throw IoError("write failed for " + path.string());
}

}  // namespace

void emit_outputs(const RunOutput& out, const std::filesystem::path& dir) {
  if (out.baseline.trials == 0) throw ValidationError("refusing to write outputs for zero trials");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  const ModeStats& base = out.baseline;
  const ModeStats& opt = out.optimized ? *out.optimized : out.baseline;
  const std::size_t slots = base.aggregate_mean.size();
  const std::vector<double> conv_price = conventional_price(out.scenario);

  // loads.csv: per-hour mean profiles, baseline vs optimized, plus prices.
  std::string loads = "hour";
  for (const auto& g : out.scenario.groups)
    loads += "," + g.name + "_before," + g.name + "_after";
  loads += ",bev_before,bev_after,aggregate_before,aggregate_after,generation,"
           "price_conventional,price_rtp\n";
  for (std::size_t t = 0; t < slots; ++t) {
    loads += std::to_string(t + 1);
    for (std::size_t g = 0; g < out.scenario.groups.size(); ++g)
      loads += "," + format_double(base.group_mean[g][t]) + "," + format_double(opt.group_mean[g][t]);
    loads += "," + format_double(base.bev_mean[t]) + "," + format_double(opt.bev_mean[t]);
    loads += "," + format_double(base.aggregate_mean[t]) + "," + format_double(opt.aggregate_mean[t]);
    loads += "," + format_double(opt.g_mean[t]);
    loads += "," + format_double(conv_price[t]) + "," + format_double(opt.price_mean[t]);
    loads += "\n";
  }
  write_file(dir / "loads.csv", loads);

  std::string stats = "hour,g_mean,g_std\n";
  for (std::size_t t = 0; t < slots; ++t) {
    stats += std::to_string(t + 1) + "," + format_double(opt.g_mean[t]) + "," +
             format_double(opt.g_std[t]) + "\n";
  }
  write_file(dir / "stats.csv", stats);

  ordered_json j;
  j["mode"] = out.mode;
  j["seed"] = out.scenario.seed;
  j["trials"] = base.trials;
  j["scenarios"]["baseline"] = stats_json(base);
  if (out.optimized) j["scenarios"]["optimized"] = stats_json(*out.optimized);
  if (out.optimized) {
    ordered_json cmp;
    cmp["peak_ratio"] = opt.mean.peak_kw / base.mean.peak_kw;
    cmp["payments_ratio"] = opt.mean.payments / base.mean.payments;
    cmp["energy_relative_gap"] =
        std::fabs(opt.mean.energy_kwh - base.mean.energy_kwh) / base.mean.energy_kwh;
    j["comparison"] = cmp;
  }
  j["prices"]["conventional"] = conv_price;
  j["prices"]["rtp_mean"] = opt.price_mean;
  j["config"] = out.scenario.to_json();
  write_file(dir / "summary.json", j.dump(2) + "\n");
}

}  // namespace drsim
