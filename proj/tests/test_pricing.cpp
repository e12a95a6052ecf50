#include "drsim/pricing.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "drsim/errors.hpp"
#include "drsim/scenario.hpp"

using namespace drsim;

namespace {

GenModel uniform_gen(int slots, double a, double b, double c, double lambda, double cap) {
  GenModel g;
  g.a.assign(slots, a);
  g.b.assign(slots, b);
  g.c.assign(slots, c);
  g.lambda.assign(slots, lambda);
  g.g_cap.assign(slots, cap);
  g.l_cap.assign(slots, cap);
  return g;
}

double plan_objective(std::span<const double> g) {
  double mean = 0;
  for (double x : g) mean += x;
  mean /= static_cast<double>(g.size());
  double v = 0;
  for (double x : g) v += (x - mean) * (x - mean);
  return v;
}

}  // namespace

TEST_CASE("cost, marginal and price formulas") {
  CHECK(generation_cost(0.01, 0.2, 0.0, 0.0) == 0.0);
  CHECK(generation_cost(0.01, 0.2, 0.0, 100.0) == doctest::Approx(70.0).epsilon(1e-12));
  CHECK(generation_cost(0.01, 0.2, 0.0, 2412.0) == doctest::Approx(29571.12).epsilon(1e-12));

  CHECK(marginal_cost(0.01, 0.2, 0.0) == doctest::Approx(0.2));
  CHECK(marginal_cost(0.01, 0.2, 2412.0) == doctest::Approx(24.32));

  // Marginal cost matches a central difference of the cost.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dg(0.0, 5000.0);
  for (int i = 0; i < 50; ++i) {
    const double g = dg(rng);
    const double h = 1e-3;
    const double num =
        (generation_cost(0.01, 0.2, 3.0, g + h) - generation_cost(0.01, 0.2, 3.0, g - h)) /
        (2 * h);
    CHECK(marginal_cost(0.01, 0.2, g) ==
          doctest::Approx(num).epsilon(1e-6));
  }

  CHECK(unit_price(1.2, 0.01, 0.2, 2412.0) == doctest::Approx(29.184).epsilon(1e-12));
  CHECK(unit_price(1.0, 0.01, 0.2, 777.0) ==
        doctest::Approx(marginal_cost(0.01, 0.2, 777.0)));
  CHECK(unit_price(1.2, 0.01, 0.2, 0.0) == doctest::Approx(0.24));

  // price / marginal == lambda wherever marginal > 0.
  for (int i = 0; i < 20; ++i) {
    const double g = dg(rng);
    CHECK(unit_price(1.37, 0.01, 0.2, g) / marginal_cost(0.01, 0.2, g) ==
          doctest::Approx(1.37).epsilon(1e-12));
  }
}

TEST_CASE("price profile over a day") {
  const GenModel gen = uniform_gen(3, 0.01, 0.2, 0.0, 1.2, 1e9);
  const std::vector<double> g{0.0, 100.0, 2412.0};
  const auto p = price_profile(gen, g);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == doctest::Approx(0.24));
  CHECK(p[1] == doctest::Approx(1.2 * (1.0 + 0.2)));
  CHECK(p[2] == doctest::Approx(29.184));

  CHECK(total_generation_cost(gen, g) ==
        doctest::Approx(generation_cost(0.01, 0.2, 0.0, 0.0) +
                        generation_cost(0.01, 0.2, 0.0, 100.0) +
                        generation_cost(0.01, 0.2, 0.0, 2412.0)));
}

TEST_CASE("flat dispatch level") {
  // Demand already flat: the plan reproduces it with zero variance.
  {
    const GenModel gen = uniform_gen(3, 0.01, 0.2, 0.0, 1.2, 100.0);
    const auto plan = generation_plan(gen, std::vector<double>{2, 2, 2});
    CHECK(plan.g == std::vector<double>{2, 2, 2});
    CHECK(plan.variance == 0.0);
  }
  // Mixed demand under a loose cap flattens to the fixed-point level.
  {
    const GenModel gen = uniform_gen(3, 0.01, 0.2, 0.0, 1.2, 10.0);
    const auto plan = generation_plan(gen, std::vector<double>{1, 5, 3});
    CHECK(plan.level == doctest::Approx(5.0).epsilon(1e-9));
    for (double g : plan.g) CHECK(g == doctest::Approx(5.0).epsilon(1e-9));
  }
  // Demand above the cap anywhere is a hard failure.
  {
    const GenModel gen = uniform_gen(3, 0.01, 0.2, 0.0, 1.2, 10.0);
    try {
      generation_plan(gen, std::vector<double>{1, 12, 3});
      FAIL_CHECK("expected CurtailmentRequired");
    } catch (const CurtailmentRequired& e) {
      CHECK(e.slot == 1);
      CHECK(e.demand_kw == doctest::Approx(12.0));
      CHECK(e.cap_kw == doctest::Approx(10.0));
    }
  }
  // Zero lower bounds admit every level in [0, max]; the leftmost fixed
  // point is picked.
  {
    const std::vector<double> lower{0, 0, 0};
    const std::vector<double> upper{10, 10, 10};
    CHECK(flat_level(lower, upper) == 0.0);
  }
}

TEST_CASE("dispatch plan matches brute-force variance minimisation") {
  std::mt19937_64 rng(0x91a5);
  std::uniform_real_distribution<double> dl(0.0, 8.0);

  for (int inst = 0; inst < 200; ++inst) {
    std::vector<double> demand(3), upper(3);
    double range_max = 0;
    for (int t = 0; t < 3; ++t) {
      demand[t] = dl(rng);
      upper[t] = demand[t] + dl(rng) * 0.25 + 0.05;
      range_max = std::max(range_max, upper[t] - demand[t]);
    }
    GenModel gen = uniform_gen(3, 0.01, 0.2, 0.0, 1.2, 0.0);
    gen.g_cap = upper;
    gen.l_cap = upper;

    const auto plan = generation_plan(gen, demand);
    for (int t = 0; t < 3; ++t) {
      CHECK(plan.g[t] >= demand[t] - 1e-12);
      CHECK(plan.g[t] <= upper[t] + 1e-12);
    }

    // Independent check: grid-search each slot's output over its box. Every
    // grid point is feasible, so the closed form must dominate them all; the
    // step adapts so wide boxes stay brute-forceable.
    const double step = std::max(0.01, range_max / 50.0);
    double best = plan_objective(plan.g);
    std::vector<double> probe(3);
    const int n0 = static_cast<int>((upper[0] - demand[0]) / step) + 1;
    const int n1 = static_cast<int>((upper[1] - demand[1]) / step) + 1;
    const int n2 = static_cast<int>((upper[2] - demand[2]) / step) + 1;
    double grid_best = 1e300;
    for (int i = 0; i <= n0; ++i) {
      probe[0] = std::min(demand[0] + i * step, upper[0]);
      for (int j = 0; j <= n1; ++j) {
        probe[1] = std::min(demand[1] + j * step, upper[1]);
        for (int k = 0; k <= n2; ++k) {
          probe[2] = std::min(demand[2] + k * step, upper[2]);
          grid_best = std::min(grid_best, plan_objective(probe));
        }
      }
    }
    CHECK(best <= grid_best + 1e-9);
  }
}
