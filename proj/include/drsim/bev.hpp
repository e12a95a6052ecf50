#pragma once

#include <span>
#include <vector>

namespace drsim {

// Battery state on returning home after driving `distance` miles.
// Throws DistanceExceedsRange if the trip cannot be covered on one charge.
double arrival_soc(double battery_kwh, double range_miles, double distance);

// Whole hours of rated-power charging needed to refill the day's usage.
int required_hours(double battery_kwh, double rated_kw, double range_miles, double distance);

// One vehicle's overnight scheduling instance. Actions are hourly:
// s = +1 charge, -1 feed back, 0 idle, each at rated_kw for the full hour.
struct BevProblem {
  std::vector<int> window;  // home slots in chronological order (may wrap midnight)
  double battery_kwh = 0;
  double rated_kw = 0;
  double soc_arrival = 0;       // kWh in the pack at arrival
  int t_req = 0;                // net charging hours needed (sum of s)
  int t_max = 0;                // cap on active hours (sum of |s|)
  std::vector<double> omega;    // owner's comfort coefficients, full day
  double theta = 0;
};

struct BevSchedule {
  std::vector<int> s;            // full-day actions, 0 outside the window
  std::vector<double> soc_path;  // kWh after each home slot's action; soc_arrival elsewhere
  double objective = 0;
};

// sum_t [ satisfaction(s_t * rated) - p_t * s_t * rated ] over the window.
double bev_objective(const BevProblem& p, std::span<const double> prices,
                     std::span<const int> s);

// Exact maximiser of bev_objective subject to: sum s = t_req, sum |s| <= t_max,
// charging only below full, feeding back only with at least rated_kw stored,
// where stored energy after k net charge-hours is
// clip(soc_arrival + k * rated_kw, 0, battery_kwh).
// Solved by dynamic programming over (window position, net charges, active
// hours); among optima, returns the lexicographically greatest action vector
// under the order +1 > 0 > -1 (i.e. charging as early as possible).
// Throws InfeasibleWindow when t_req exceeds the window length.
BevSchedule optimize_schedule(const BevProblem& p, std::span<const double> prices);

// Plug in on arrival: charge for the first t_req home slots, then idle.
BevSchedule uncontrolled_schedule(const BevProblem& p, std::span<const double> prices);

}  // namespace drsim
