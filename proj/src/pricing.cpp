#include "drsim/pricing.hpp"

#include <algorithm>
#include <cmath>

#include "drsim/errors.hpp"
#include "drsim/kernels.hpp"
#include "drsim/scenario.hpp"

namespace drsim {

double generation_cost(double a, double b, double c, double g) {
  return 0.5 * a * g * g + b * g + c;
}

double marginal_cost(double a, double b, double g) { return a * g + b; }

double unit_price(double lambda, double a, double b, double g) {
  return lambda * (a * g + b);
}

double flat_level(std::span<const double> lower, std::span<const double> upper) {
  const auto n = lower.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  double lo = lower[0], hi = upper[0];
  for (std::size_t t = 0; t < n; ++t) {
    lo = std::min(lo, lower[t]);
    hi = std::max(hi, upper[t]);
  }
  // residual(c) = mean(clamp(c, lower, upper)) - c is continuous and
  // nonincreasing; its zero set is an interval, and we want its left end.
  auto residual = [&](double c) {
    return kernels::clamp_level_sum(c, lower, upper) * inv_n - c;
  };
  if (residual(lo) <= 0) return lo;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (residual(mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

GenerationPlan generation_plan(const GenModel& gen, std::span<const double> demand) {
  const auto n = demand.size();
  std::vector<double> upper(n);
  for (std::size_t t = 0; t < n; ++t) {
    upper[t] = std::min(gen.g_cap[t], gen.l_cap[t]);
    if (demand[t] > upper[t])
      throw CurtailmentRequired(static_cast<int>(t), demand[t], upper[t],
                                "aggregate demand exceeds dispatchable capacity");
  }
  GenerationPlan plan;
  plan.level = flat_level(demand, upper);
  plan.g.resize(n);
  for (std::size_t t = 0; t < n; ++t)
    plan.g[t] = std::clamp(plan.level, demand[t], upper[t]);
  const double mean = kernels::sum(plan.g) / static_cast<double>(n);
  double var = 0;
  for (double g : plan.g) var += (g - mean) * (g - mean);
  plan.variance = var;
  return plan;
}

std::vector<double> price_profile(const GenModel& gen, std::span<const double> g) {
  std::vector<double> p(g.size());
  kernels::scaled_affine(gen.lambda, gen.a, g, gen.b, p);
  return p;
}

double total_generation_cost(const GenModel& gen, std::span<const double> g) {
  double total = 0;
  for (std::size_t t = 0; t < g.size(); ++t)
    total += generation_cost(gen.a[t], gen.b[t], gen.c[t], g[t]);
  return total;
}

}  // namespace drsim
