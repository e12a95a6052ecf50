#pragma once

#include <span>
#include <vector>

namespace drsim {

struct GenModel;

// Quadratic production cost for one slot: (a/2)*g^2 + b*g + c.
double generation_cost(double a, double b, double c, double g);

// d/dg of the cost above: a*g + b.
double marginal_cost(double a, double b, double g);

// Retail price for one slot: lambda * (a*g + b).
double unit_price(double lambda, double a, double b, double g);

// Smallest c such that c == mean(clamp(c, lower, upper)), found by bisection.
// This is the level a variance-minimising dispatch flattens to.
double flat_level(std::span<const double> lower, std::span<const double> upper);

// Per-slot dispatch g_t = clamp(c*, lower_t, upper_t) where upper_t =
// min(g_cap_t, l_cap_t) and lower_t is the aggregate demand. Throws
// CurtailmentRequired if demand exceeds the cap anywhere.
struct GenerationPlan {
  std::vector<double> g;   // committed output per slot, kW
  double level = 0;        // the flat target c*
  double variance = 0;     // sum of squared deviations from the slot mean
};
GenerationPlan generation_plan(const GenModel& gen, std::span<const double> demand);

// Prices for a whole day given committed generation.
std::vector<double> price_profile(const GenModel& gen, std::span<const double> g);

// Total production cost over the day (no slot-duration weighting).
double total_generation_cost(const GenModel& gen, std::span<const double> g);

}  // namespace drsim
