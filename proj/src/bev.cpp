#include "drsim/bev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drsim/errors.hpp"
#include "drsim/household.hpp"

namespace drsim {

double arrival_soc(double battery_kwh, double range_miles, double distance) {
  if (distance > range_miles) throw DistanceExceedsRange(distance, range_miles);
  return battery_kwh - distance * battery_kwh / range_miles;
}

int required_hours(double battery_kwh, double rated_kw, double range_miles, double distance) {
  if (distance > range_miles) throw DistanceExceedsRange(distance, range_miles);
  const double hours = distance * battery_kwh / range_miles / rated_kw;
  // Guard against 33/7-style quotients landing a hair above an integer.
  return static_cast<int>(std::ceil(hours - 1e-9));
}

double bev_objective(const BevProblem& p, std::span<const double> prices,
                     std::span<const int> s) {
  double total = 0;
  for (int t : p.window) {
    if (s[t] == 0) continue;
    const double x = s[t] * p.rated_kw;
    total += satisfaction(x, p.omega[t], p.theta) - prices[t] * x;
  }
  return total;
}

namespace {

struct DpCell {
  double value;
  bool reachable;
};

}  // namespace

BevSchedule optimize_schedule(const BevProblem& p, std::span<const double> prices) {
  const int w = static_cast<int>(p.window.size());
  if (p.t_req > w)
    throw InfeasibleWindow("needs " + std::to_string(p.t_req) + " charging hours but is home for " +
                           std::to_string(w));
  const int t_max = std::min(p.t_max, w);
  const double neg_inf = -std::numeric_limits<double>::infinity();

  // k = net charge-hours so far, stored with offset t_max (k >= -t_max since
  // every feed-back hour is an active hour). m = active hours so far.
  const int k_span = t_max + p.t_req + 1;
  const int m_span = t_max + 1;
  auto idx = [&](int k, int m) { return (k + t_max) * m_span + m; };

  auto soc_at = [&](int k) {
    return std::clamp(p.soc_arrival + k * p.rated_kw, 0.0, p.battery_kwh);
  };
  auto gain = [&](int slot, int action) {
    const double x = action * p.rated_kw;
    return satisfaction(x, p.omega[slot], p.theta) - prices[slot] * x;
  };

  // value[i][k][m] = best achievable from window position i onward.
  std::vector<std::vector<double>> value(w + 1, std::vector<double>(k_span * m_span, neg_inf));
  for (int m = 0; m <= t_max; ++m) value[w][idx(p.t_req, m)] = 0.0;

  for (int i = w - 1; i >= 0; --i) {
    const int slot = p.window[i];
    for (int k = -t_max; k <= p.t_req; ++k) {
      const double soc = soc_at(k);
      for (int m = 0; m <= t_max; ++m) {
        double best = value[i + 1][idx(k, m)];  // idle
        if (k < p.t_req && m < t_max) {         // charge, only below full
          const double v = value[i + 1][idx(k + 1, m + 1)];
          if (v > neg_inf) best = std::max(best, gain(slot, +1) + v);
        }
        if (k - 1 >= -t_max && m < t_max && soc >= p.rated_kw) {  // feed back
          const double v = value[i + 1][idx(k - 1, m + 1)];
          if (v > neg_inf) best = std::max(best, gain(slot, -1) + v);
        }
        value[i][idx(k, m)] = best;
      }
    }
  }

  if (value[0][idx(0, 0)] == neg_inf)
    throw InfeasibleWindow("no feasible action sequence reaches the required charge");

  const int slots = static_cast<int>(p.omega.size());
  BevSchedule out;
  out.s.assign(slots, 0);
  out.soc_path.assign(slots, p.soc_arrival);

  // Forward walk re-picking the optimal action, preferring +1 over 0 over -1
  // when values tie: charging lands as early as possible.
  int k = 0, m = 0;
  for (int i = 0; i < w; ++i) {
    const int slot = p.window[i];
    const double target = value[i][idx(k, m)];
    int action = 0;
    if (k < p.t_req && m < t_max &&
        gain(slot, +1) + value[i + 1][idx(k + 1, m + 1)] == target) {
      action = +1;
    } else if (value[i + 1][idx(k, m)] == target) {
      action = 0;
    } else {
      action = -1;
    }
    out.s[slot] = action;
    k += action;
    if (action != 0) ++m;
    out.soc_path[slot] = soc_at(k);
  }
  out.objective = bev_objective(p, prices, out.s);
  return out;
}

BevSchedule uncontrolled_schedule(const BevProblem& p, std::span<const double> prices) {
  const int w = static_cast<int>(p.window.size());
  if (p.t_req > w)
    throw InfeasibleWindow("needs " + std::to_string(p.t_req) + " charging hours but is home for " +
                           std::to_string(w));
  const int slots = static_cast<int>(p.omega.size());
  BevSchedule out;
  out.s.assign(slots, 0);
  out.soc_path.assign(slots, p.soc_arrival);
  int k = 0;
  for (int i = 0; i < w; ++i) {
    const int slot = p.window[i];
    if (i < p.t_req) {
      out.s[slot] = 1;
      ++k;
    }
    out.soc_path[slot] = std::clamp(p.soc_arrival + k * p.rated_kw, 0.0, p.battery_kwh);
  }
  out.objective = bev_objective(p, prices, out.s);
  return out;
}

}  // namespace drsim
