#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drsim/bev.hpp"
#include "drsim/household.hpp"
#include "drsim/scenario.hpp"
#include "drsim/uncertainty.hpp"

namespace drsim {

enum class Mode { Baseline, RtpOnly, RtpV2g };

Mode mode_from_string(const std::string& name);  // throws ValidationError on bad name
std::string_view mode_name(Mode m);

struct GameState {
  std::vector<std::vector<double>> loads;  // household kW, per user per slot
  std::vector<BevSchedule> schedules;      // one per vehicle
  std::vector<double> aggregate;           // total kW per slot, loads + vehicle power
  std::vector<double> prices;              // broadcast prices for the current aggregate
  int round = 0;
};

// One Monte Carlo trial of the leader/follower iteration. All vehicles are
// sampled up front; followers then best-respond one at a time in a fixed
// round-robin until the aggregate stops moving.
class TrialEngine {
 public:
  TrialEngine(const Scenario& s, Mode mode, std::uint64_t trial);

  const GameState& state() const { return state_; }
  const std::vector<BevAgent>& agents() const { return agents_; }
  int group_of(int user) const { return user_group_[user]; }
  int agent_of(int user) const { return user_agent_[user]; }
  Mode mode() const { return mode_; }

  // lambda_t * (a_t * g_t + b_t) with g per the scenario's price basis.
  std::vector<double> current_prices() const;

  // Full utility of one follower at the given prices: household comfort minus
  // payment, plus the vehicle terms when the user owns one.
  double utility_of_user(int user, std::span<const double> prices) const;

  // Asynchronous commit: recompute prices from the current aggregate, solve
  // the user's best response at those frozen prices, commit the change.
  // Returns true when the user's decision actually moved.
  bool user_update(int user);

  // One full pass over every user; returns max_t relative aggregate movement.
  double run_round();

  // Rounds until movement < epsilon or max_rounds. Baseline mode returns
  // immediately (nothing iterates).
  void run();

  bool converged() const { return converged_; }
  int rounds() const { return state_.round; }
  // Worst per-user |sum(load) - daily_total| / daily_total seen after any round.
  double conservation_gap() const { return conservation_gap_; }
  // Sum of squared deviations of the aggregate from its mean, before round 1
  // and currently: the leader's flatness objective, tracked for reporting.
  double initial_load_variance() const { return initial_variance_; }
  double load_variance() const;

 private:
  void rebuild_aggregate();
  void price_into(std::vector<double>& out) const;
  void refresh_prices();
  void check_caps() const;
  void track_conservation();
  int owner_group(int vehicle) const;
  BevProblem problem_for(const BevAgent& a, int group) const;

  const Scenario& s_;
  Mode mode_;
  std::uint64_t trial_;
  std::vector<HouseholdProblem> group_problem_;
  std::vector<int> user_group_;   // group index per user
  std::vector<int> user_agent_;   // vehicle index per user, -1 if none
  std::vector<int> visit_order_;  // user indices in update order
  std::vector<BevAgent> agents_;
  GameState state_;
  bool converged_ = false;
  double conservation_gap_ = 0;
  double initial_variance_ = 0;
  std::vector<double> scratch_prices_;
};

// What survives of a trial once the engine is torn down: final per-slot
// vectors, per-group aggregates, audit results.
struct TrialResult {
  int trial = 0;
  bool converged = false;
  int rounds = 0;
  double conservation_gap = 0;
  double initial_load_variance = 0;
  double final_load_variance = 0;
  std::vector<double> aggregate;               // kW per slot
  std::vector<double> generation;              // kW per slot committed
  std::vector<double> prices;                  // money/kWh per slot
  std::vector<std::vector<double>> group_load; // [group][slot] summed households, kW
  std::vector<double> bev_load;                // signed vehicle power per slot, kW
  int agent_count = 0;
  bool soc_full_at_departure = true;           // every vehicle leaves at capacity
  bool soc_path_in_range = true;               // SOC never leaves [0, capacity]
};

TrialResult run_trial(const Scenario& s, Mode mode, std::uint64_t trial);

// All trials, reduced in trial order regardless of thread count.
std::vector<TrialResult> run_all(const Scenario& s, Mode mode, int threads);

}  // namespace drsim
