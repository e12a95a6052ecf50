#pragma once

#include <span>
#include <vector>

namespace drsim {

struct UserGroup;

// Per-slot comfort from consuming x kW: omega*x - (theta/2)*x^2.
double satisfaction(double x, double omega, double theta);

// One household's flexibility: schedulable load with per-slot box bounds and
// a fixed daily total.
struct HouseholdProblem {
  std::vector<double> omega;  // marginal comfort at zero load, per slot
  double theta = 0;           // comfort curvature, > 0
  std::vector<double> lo;     // per-slot minimum, kW
  std::vector<double> hi;     // per-slot maximum, kW
  double required = 0;        // daily schedulable energy the plan must place
};

HouseholdProblem make_household(const UserGroup& g);

struct HouseholdSolution {
  std::vector<double> load;  // per-slot kW, within [lo, hi], summing to required
  double mu = 0;             // shadow price of the daily-total constraint
  int iterations = 0;
};

// Maximises sum_t satisfaction(l_t) - p_t * l_t subject to the box bounds and
// the daily total. The optimum is l_t = clamp((omega_t - p_t - mu)/theta,
// lo_t, hi_t) with mu found by bisection; the slot sum is nonincreasing in mu.
// Throws InfeasibleDemand when the bounds cannot carry the daily total.
HouseholdSolution best_response(const HouseholdProblem& h, std::span<const double> prices);

// The quantity best_response maximises, evaluated at an arbitrary schedule.
double household_objective(const HouseholdProblem& h, std::span<const double> prices,
                           std::span<const double> load);

}  // namespace drsim
