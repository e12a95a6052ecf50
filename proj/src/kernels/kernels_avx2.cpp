// AVX2 backend. Compiled with -mavx2 (no FMA: sums and products must round
// exactly like the scalar reference so the backends stay bit-identical).

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "backend.hpp"

namespace drsim::kernels::detail {
namespace {

inline double vmax(double a, double b) noexcept { return (a > b) ? a : b; }
inline double vmin(double a, double b) noexcept { return (a < b) ? a : b; }
inline double clamp3(double v, double lo, double hi) noexcept { return vmin(vmax(v, lo), hi); }

double k_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (int j = 0; i + j < n; ++j) lane[j] += x[i + j];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double k_dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (int j = 0; i + j < n; ++j) lane[j] += x[i + j] * y[i + j];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double k_sum_sq(const double* x, std::size_t n) { return k_dot(x, x, n); }

double k_max_val(const double* x, std::size_t n) {
  __m256d acc = _mm256_set1_pd(-HUGE_VAL);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (int j = 0; i + j < n; ++j) lane[j] = vmax(lane[j], x[i + j]);
  return vmax(vmax(lane[0], lane[1]), vmax(lane[2], lane[3]));
}

double k_clamp_level_sum(double level, const double* lo, const double* hi, std::size_t n) {
  const __m256d lv = _mm256_set1_pd(level);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d c =
        _mm256_min_pd(_mm256_max_pd(lv, _mm256_loadu_pd(lo + i)), _mm256_loadu_pd(hi + i));
    acc = _mm256_add_pd(acc, c);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (int j = 0; i + j < n; ++j) lane[j] += clamp3(level, lo[i + j], hi[i + j]);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

inline __m256d caff_vec(const double* w, const double* p, __m256d mu, __m256d it, const double* lo,
                        const double* hi, std::size_t i) noexcept {
  const __m256d raw = _mm256_mul_pd(
      _mm256_sub_pd(_mm256_sub_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(p + i)), mu), it);
  return _mm256_min_pd(_mm256_max_pd(raw, _mm256_loadu_pd(lo + i)), _mm256_loadu_pd(hi + i));
}

inline double caff(const double* w, const double* p, double mu, double it, const double* lo,
                   const double* hi, std::size_t i) noexcept {
  return clamp3(((w[i] - p[i]) - mu) * it, lo[i], hi[i]);
}

double k_clamped_affine_sum(const double* w, const double* p, double mu, double it,
                            const double* lo, const double* hi, std::size_t n) {
  const __m256d muv = _mm256_set1_pd(mu);
  const __m256d itv = _mm256_set1_pd(it);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, caff_vec(w, p, muv, itv, lo, hi, i));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (int j = 0; i + j < n; ++j) lane[j] += caff(w, p, mu, it, lo, hi, i + j);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double k_clamped_affine_store(const double* w, const double* p, double mu, double it,
                              const double* lo, const double* hi, double* out, std::size_t n) {
  const __m256d muv = _mm256_set1_pd(mu);
  const __m256d itv = _mm256_set1_pd(it);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d c = caff_vec(w, p, muv, itv, lo, hi, i);
    _mm256_storeu_pd(out + i, c);
    acc = _mm256_add_pd(acc, c);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (int j = 0; i + j < n; ++j) {
    const double v = caff(w, p, mu, it, lo, hi, i + j);
    out[i + j] = v;
    lane[j] += v;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void k_scaled_affine(const double* s, const double* a, const double* x, const double* b,
                     double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t =
        _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(x + i)),
                      _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(s + i), t));
  }
  for (; i < n; ++i) out[i] = s[i] * (a[i] * x[i] + b[i]);
}

void k_add_diff(double* acc, const double* xn, const double* xo, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(xn + i), _mm256_loadu_pd(xo + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), d));
  }
  for (; i < n; ++i) acc[i] += xn[i] - xo[i];
}

double k_max_rel_gap(const double* x, const double* y, std::size_t n) {
  const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  const __m256d ones = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_set1_pd(-HUGE_VAL);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d yv = _mm256_loadu_pd(y + i);
    const __m256d num = _mm256_and_pd(_mm256_sub_pd(xv, yv), absmask);
    const __m256d den = _mm256_max_pd(ones, _mm256_and_pd(yv, absmask));
    acc = _mm256_max_pd(acc, _mm256_div_pd(num, den));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (int j = 0; i + j < n; ++j) {
    const std::size_t k = i + j;
    lane[j] = vmax(lane[j], std::fabs(x[k] - y[k]) / vmax(1.0, std::fabs(y[k])));
  }
  return n == 0 ? 0.0 : vmax(vmax(lane[0], lane[1]), vmax(lane[2], lane[3]));
}

constexpr Vtable kAvx2 = {
    k_sum,
    k_dot,
    k_sum_sq,
    k_max_val,
    k_clamp_level_sum,
    k_clamped_affine_sum,
    k_clamped_affine_store,
    k_scaled_affine,
    k_add_diff,
    k_max_rel_gap,
};

}  // namespace

const Vtable& avx2_vtable() noexcept { return kAvx2; }

}  // namespace drsim::kernels::detail
