#include "drsim/household.hpp"

#include <algorithm>
#include <cmath>

#include "drsim/errors.hpp"
#include "drsim/kernels.hpp"
#include "drsim/scenario.hpp"

namespace drsim {

double satisfaction(double x, double omega, double theta) {
  return omega * x - 0.5 * theta * x * x;
}

HouseholdProblem make_household(const UserGroup& g) {
  HouseholdProblem h;
  h.omega = g.omega;
  h.theta = g.theta;
  h.lo = g.lower_bounds();
  h.hi = g.upper_bounds();
  h.required = g.daily_total();
  return h;
}

HouseholdSolution best_response(const HouseholdProblem& h, std::span<const double> prices) {
  const std::size_t n = h.omega.size();
  const double sum_lo = kernels::sum(h.lo);
  const double sum_hi = kernels::sum(h.hi);
  if (h.required < sum_lo - 1e-9 || h.required > sum_hi + 1e-9)
    throw InfeasibleDemand("daily total " + std::to_string(h.required) +
                           " outside the reachable range [" + std::to_string(sum_lo) + ", " +
                           std::to_string(sum_hi) + "]");

  const double inv_theta = 1.0 / h.theta;
  double max_hi = 0, lo_margin = h.omega[0] - prices[0], hi_margin = lo_margin;
  for (std::size_t t = 0; t < n; ++t) {
    max_hi = std::max(max_hi, h.hi[t]);
    lo_margin = std::min(lo_margin, h.omega[t] - prices[t]);
    hi_margin = std::max(hi_margin, h.omega[t] - prices[t]);
  }
  // At mu_lo every slot pins to hi (sum >= required); at mu_hi every
  // unclamped level is <= 0 <= lo, so every slot pins to lo (sum <= required).
  double mu_lo = lo_margin - h.theta * max_hi;
  double mu_hi = hi_margin;

  HouseholdSolution out;
  auto slot_sum = [&](double mu) {
    return kernels::clamped_affine_sum(h.omega, prices, mu, inv_theta, h.lo, h.hi);
  };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (mu_lo + mu_hi);
    if (mid <= mu_lo || mid >= mu_hi) break;
    ++out.iterations;
    if (slot_sum(mid) > h.required)
      mu_lo = mid;
    else
      mu_hi = mid;
  }
  out.mu = mu_hi;
  out.load.resize(n);
  kernels::clamped_affine_store(h.omega, prices, out.mu, inv_theta, h.lo, h.hi, out.load);
  return out;
}

double household_objective(const HouseholdProblem& h, std::span<const double> prices,
                           std::span<const double> load) {
  double comfort = 0;
  for (std::size_t t = 0; t < load.size(); ++t)
    comfort += satisfaction(load[t], h.omega[t], h.theta);
  return comfort - kernels::dot(prices, load);
}

}  // namespace drsim
