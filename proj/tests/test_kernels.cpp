#include "drsim/kernels.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

using namespace drsim;

namespace {

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

struct OpResults {
  double sum, dot, sum_sq, max_val, clamp_level, caff_sum, caff_store_ret, rel_gap;
  std::vector<double> caff_out, scaled, acc;
};

// Evaluates every kernel once on the currently selected backend.
OpResults run_all(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& lo, const std::vector<double>& hi, double level,
                  double mu, double inv_theta) {
  OpResults r;
  r.sum = kernels::sum(x);
  r.dot = kernels::dot(x, y);
  r.sum_sq = kernels::sum_sq(x);
  r.max_val = kernels::max_val(x);
  r.clamp_level = kernels::clamp_level_sum(level, lo, hi);
  r.caff_sum = kernels::clamped_affine_sum(x, y, mu, inv_theta, lo, hi);
  r.caff_out.resize(x.size());
  r.caff_store_ret = kernels::clamped_affine_store(x, y, mu, inv_theta, lo, hi, r.caff_out);
  r.scaled.resize(x.size());
  kernels::scaled_affine(x, y, lo, hi, r.scaled);
  r.acc = lo;
  kernels::add_diff(r.acc, x, y);
  r.rel_gap = kernels::max_rel_gap(x, y);
  return r;
}

}  // namespace

TEST_CASE("backend selection") {
  CHECK(kernels::supported(kernels::Backend::Scalar));
  CHECK(kernels::name(kernels::Backend::Scalar) == "scalar");
  CHECK(kernels::name(kernels::Backend::Avx2) == "avx2");

  kernels::select(kernels::Backend::Scalar);
  CHECK(kernels::active() == kernels::Backend::Scalar);

  if (kernels::supported(kernels::Backend::Avx2)) {
    kernels::select(kernels::Backend::Avx2);
    CHECK(kernels::active() == kernels::Backend::Avx2);
  } else {
    CHECK_THROWS_AS(kernels::select(kernels::Backend::Avx2), std::invalid_argument);
  }

  kernels::select_auto();
  CHECK(kernels::active() ==
        (kernels::supported(kernels::Backend::Avx2) ? kernels::Backend::Avx2
                                                    : kernels::Backend::Scalar));
}

TEST_CASE("reduction and transform values") {
  kernels::select(kernels::Backend::Scalar);

  const std::vector<double> a{1.5, 2.5, -1.0};
  CHECK(kernels::sum(a) == 3.0);
  CHECK(kernels::sum(std::vector<double>{}) == 0.0);
  CHECK(kernels::sum(std::vector<double>(8, 1.0)) == 8.0);

  CHECK(kernels::dot(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}) == 32.0);
  CHECK(kernels::sum_sq(std::vector<double>{3, 4}) == 25.0);

  CHECK(kernels::max_val(std::vector<double>{-5, -2, -9}) == -2.0);
  CHECK(kernels::max_val(std::vector<double>{}) == -HUGE_VAL);

  // clamp(2,0,1) + clamp(2,3,5) + clamp(2,1,4)
  CHECK(kernels::clamp_level_sum(2.0, std::vector<double>{0, 3, 1},
                                 std::vector<double>{1, 5, 4}) == 6.0);

  const std::vector<double> w{5, 5}, p{1, 2}, lo{0, 0}, hi{100, 100};
  CHECK(kernels::clamped_affine_sum(w, p, 1.5, 10.0, lo, hi) == 40.0);
  std::vector<double> out(2);
  CHECK(kernels::clamped_affine_store(w, p, 1.5, 10.0, lo, hi, out) == 40.0);
  CHECK(out[0] == 25.0);
  CHECK(out[1] == 15.0);

  std::vector<double> price(1);
  kernels::scaled_affine(std::vector<double>{1.2}, std::vector<double>{0.01},
                         std::vector<double>{2412.0}, std::vector<double>{0.2}, price);
  CHECK(price[0] == doctest::Approx(29.184).epsilon(1e-12));

  std::vector<double> acc{1, 1};
  kernels::add_diff(acc, std::vector<double>{3, 4}, std::vector<double>{1, 2});
  CHECK(acc[0] == 3.0);
  CHECK(acc[1] == 3.0);

  // Denominator is max(1, |y_t|).
  CHECK(kernels::max_rel_gap(std::vector<double>{2, 400}, std::vector<double>{1, 0}) == 400.0);
  CHECK(kernels::max_rel_gap(std::vector<double>{0}, std::vector<double>{-4}) == 1.0);
  CHECK(kernels::max_rel_gap(std::vector<double>{3}, std::vector<double>{2}) == 0.5);
  CHECK(kernels::max_rel_gap(std::vector<double>{}, std::vector<double>{}) == 0.0);

  kernels::select_auto();
}

TEST_CASE("scalar and avx2 backends are bit-identical") {
  if (!kernels::supported(kernels::Backend::Avx2)) {
    MESSAGE("avx2 not available; equivalence suite skipped");
    return;
  }

  std::mt19937_64 rng(0x5eed);
  for (std::size_t n = 0; n <= 67; ++n) {
    const auto x = random_vec(rng, n, -50.0, 50.0);
    const auto y = random_vec(rng, n, -50.0, 50.0);
    auto lo = random_vec(rng, n, -10.0, 10.0);
    auto hi = lo;
    for (auto& h : hi) h += 7.5;
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    const double level = d(rng), mu = d(rng), inv_theta = std::fabs(d(rng)) + 0.5;

    kernels::select(kernels::Backend::Scalar);
    const OpResults rs = run_all(x, y, lo, hi, level, mu, inv_theta);
    kernels::select(kernels::Backend::Avx2);
    const OpResults rv = run_all(x, y, lo, hi, level, mu, inv_theta);
    kernels::select_auto();

    CAPTURE(n);
    CHECK(bits(rs.sum) == bits(rv.sum));
    CHECK(bits(rs.dot) == bits(rv.dot));
    CHECK(bits(rs.sum_sq) == bits(rv.sum_sq));
    CHECK(bits(rs.max_val) == bits(rv.max_val));
    CHECK(bits(rs.clamp_level) == bits(rv.clamp_level));
    CHECK(bits(rs.caff_sum) == bits(rv.caff_sum));
    CHECK(bits(rs.caff_store_ret) == bits(rv.caff_store_ret));
    CHECK(bits(rs.rel_gap) == bits(rv.rel_gap));
    REQUIRE(rs.caff_out.size() == rv.caff_out.size());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(bits(rs.caff_out[i]) == bits(rv.caff_out[i]));
      CHECK(bits(rs.scaled[i]) == bits(rv.scaled[i]));
      CHECK(bits(rs.acc[i]) == bits(rv.acc[i]));
    }
  }
}
