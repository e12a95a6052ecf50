#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drsim/engine.hpp"
#include "drsim/scenario.hpp"

namespace drsim {

struct Metrics {
  double peak_kw = 0;
  double energy_kwh = 0;
  double payments = 0;
  double cost = 0;
};

// peak = max_t L_t; energy = sum L_t * slot_hours; payments = sum P_t L_t *
// slot_hours; cost = sum of per-slot generation cost at the committed output.
Metrics trial_metrics(const TrialResult& r, const GenModel& gen, double slot_hours);

struct ModeStats {
  int trials = 0;
  Metrics mean;                    // averages of the per-trial metrics
  double convergence_rate = 0;     // fraction of trials that converged
  double mean_rounds = 0;
  bool payments_exceed_cost_all = true;  // strict, in every single trial
  double max_conservation_gap = 0;       // worst per-user daily-total drift
  bool soc_full_all = true;              // every vehicle left at capacity
  bool soc_in_range_all = true;
  double mean_initial_variance = 0;  // flatness objective before/after play
  double mean_final_variance = 0;
  std::vector<double> g_mean, g_std;  // per-slot committed generation, across trials
  std::vector<double> price_mean, aggregate_mean, bev_mean;
  std::vector<std::vector<double>> group_mean;  // [group][slot] household kW
};

// Per-slot sample mean/std use the n-1 denominator; a single trial reports
// std = 0. Throws ValidationError on an empty result list.
ModeStats aggregate_stats(const std::vector<TrialResult>& results, const GenModel& gen,
                          double slot_hours, std::size_t group_count);

// Flat tariff for the no-RTP comparison: lambda_t*(a_t*mean(nominal)+b_t),
// the mean taken over slots of the aggregate nominal demand.
std::vector<double> conventional_price(const Scenario& s);

struct RunOutput {
  Scenario scenario;
  std::string mode;  // both | baseline | rtp-v2g | rtp-only
  ModeStats baseline;
  std::optional<ModeStats> optimized;
};

// Runs the baseline and (unless mode == "baseline") the requested optimized
// scenario over all trials. Thread count never changes the result.
RunOutput execute_run(const Scenario& s, const std::string& mode, int threads);

// Writes loads.csv, stats.csv and summary.json. Byte-identical for identical
// (scenario, seed); numbers are shortest-round-trip formatted.
void emit_outputs(const RunOutput& out, const std::filesystem::path& dir);

// Shortest decimal string that parses back to exactly v.
std::string format_double(double v);

}  // namespace drsim
