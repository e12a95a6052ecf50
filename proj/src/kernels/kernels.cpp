#include "drsim/kernels.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "backend.hpp"

namespace drsim::kernels {
namespace detail {
namespace {

// Ordered min/max matching the AVX2 vminpd/vmaxpd operand semantics
// (result takes the sign of the second operand on ties like -0 vs +0).
inline double vmax(double a, double b) noexcept { return (a > b) ? a : b; }
inline double vmin(double a, double b) noexcept { return (a < b) ? a : b; }
inline double clamp3(double v, double lo, double hi) noexcept { return vmin(vmax(v, lo), hi); }

inline double combine_sum(const double acc[4]) noexcept {
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}
inline double combine_max(const double acc[4]) noexcept {
  return vmax(vmax(acc[0], acc[1]), vmax(acc[2], acc[3]));
}

double k_sum(const double* x, std::size_t n) {
  double acc[4] = {0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) acc[j] += x[i + j];
  for (int j = 0; i + j < n; ++j) acc[j] += x[i + j];
  return combine_sum(acc);
}

double k_dot(const double* x, const double* y, std::size_t n) {
  double acc[4] = {0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) acc[j] += x[i + j] * y[i + j];
  for (int j = 0; i + j < n; ++j) acc[j] += x[i + j] * y[i + j];
  return combine_sum(acc);
}

double k_sum_sq(const double* x, std::size_t n) { return k_dot(x, x, n); }

double k_max_val(const double* x, std::size_t n) {
  double acc[4] = {-HUGE_VAL, -HUGE_VAL, -HUGE_VAL, -HUGE_VAL};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) acc[j] = vmax(acc[j], x[i + j]);
  for (int j = 0; i + j < n; ++j) acc[j] = vmax(acc[j], x[i + j]);
  return combine_max(acc);
}

double k_clamp_level_sum(double level, const double* lo, const double* hi, std::size_t n) {
  double acc[4] = {0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) acc[j] += clamp3(level, lo[i + j], hi[i + j]);
  for (int j = 0; i + j < n; ++j) acc[j] += clamp3(level, lo[i + j], hi[i + j]);
  return combine_sum(acc);
}

inline double caff(const double* w, const double* p, double mu, double it, const double* lo,
                   const double* hi, std::size_t i) noexcept {
  return clamp3(((w[i] - p[i]) - mu) * it, lo[i], hi[i]);
}

double k_clamped_affine_sum(const double* w, const double* p, double mu, double it,
                            const double* lo, const double* hi, std::size_t n) {
  double acc[4] = {0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) acc[j] += caff(w, p, mu, it, lo, hi, i + j);
  for (int j = 0; i + j < n; ++j) acc[j] += caff(w, p, mu, it, lo, hi, i + j);
  return combine_sum(acc);
}

double k_clamped_affine_store(const double* w, const double* p, double mu, double it,
                              const double* lo, const double* hi, double* out, std::size_t n) {
  double acc[4] = {0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) {
      const double v = caff(w, p, mu, it, lo, hi, i + j);
      out[i + j] = v;
      acc[j] += v;
    }
  for (int j = 0; i + j < n; ++j) {
    const double v = caff(w, p, mu, it, lo, hi, i + j);
    out[i + j] = v;
    acc[j] += v;
  }
  return combine_sum(acc);
}

void k_scaled_affine(const double* s, const double* a, const double* x, const double* b,
                     double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s[i] * (a[i] * x[i] + b[i]);
}

void k_add_diff(double* acc, const double* xn, const double* xo, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += xn[i] - xo[i];
}

double k_max_rel_gap(const double* x, const double* y, std::size_t n) {
  double acc[4] = {-HUGE_VAL, -HUGE_VAL, -HUGE_VAL, -HUGE_VAL};
  std::size_t i = 0;
  auto gap = [&](std::size_t k) {
    return std::fabs(x[k] - y[k]) / vmax(1.0, std::fabs(y[k]));
  };
  for (; i + 4 <= n; i += 4)
    for (int j = 0; j < 4; ++j) acc[j] = vmax(acc[j], gap(i + j));
  for (int j = 0; i + j < n; ++j) acc[j] = vmax(acc[j], gap(i + j));
  return n == 0 ? 0.0 : combine_max(acc);
}

constexpr Vtable kScalar = {
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

const Vtable& scalar_vtable() noexcept { return kScalar; }

}  // namespace detail

namespace {

bool cpu_has_avx2() noexcept {
#if defined(DRSIM_HAVE_AVX2_TU)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const detail::Vtable* pick(Backend b) noexcept {
#ifdef DRSIM_HAVE_AVX2_TU
  if (b == Backend::Avx2) return &detail::avx2_vtable();
#endif
  (void)b;
  return &detail::scalar_vtable();
}

struct Dispatch {
  std::atomic<const detail::Vtable*> table;
  std::atomic<Backend> backend;
  Dispatch() {
    const Backend b = cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
    backend.store(b);
    table.store(pick(b));
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

inline const detail::Vtable& vt() noexcept { return *dispatch().table.load(std::memory_order_relaxed); }

}  // namespace

Backend active() noexcept { return dispatch().backend.load(std::memory_order_relaxed); }

bool supported(Backend b) noexcept {
  return b == Backend::Scalar || (b == Backend::Avx2 && cpu_has_avx2());
}

void select(Backend b) {
  if (!supported(b)) throw std::invalid_argument("kernel backend not supported on this machine");
  dispatch().backend.store(b);
  dispatch().table.store(pick(b));
}

void select_auto() noexcept {
  const Backend b = cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
  dispatch().backend.store(b);
  dispatch().table.store(pick(b));
}

std::string_view name(Backend b) noexcept { return b == Backend::Avx2 ? "avx2" : "scalar"; }

double sum(std::span<const double> x) noexcept { return vt().sum(x.data(), x.size()); }

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  return vt().dot(x.data(), y.data(), x.size());
}

double sum_sq(std::span<const double> x) noexcept { return vt().sum_sq(x.data(), x.size()); }

double max_val(std::span<const double> x) noexcept { return vt().max_val(x.data(), x.size()); }

double clamp_level_sum(double level, std::span<const double> lo,
                       std::span<const double> hi) noexcept {
  return vt().clamp_level_sum(level, lo.data(), hi.data(), lo.size());
}

double clamped_affine_sum(std::span<const double> w, std::span<const double> p, double mu,
                          double inv_theta, std::span<const double> lo,
                          std::span<const double> hi) noexcept {
  return vt().clamped_affine_sum(w.data(), p.data(), mu, inv_theta, lo.data(), hi.data(),
                                 w.size());
}

double clamped_affine_store(std::span<const double> w, std::span<const double> p, double mu,
                            double inv_theta, std::span<const double> lo,
                            std::span<const double> hi, std::span<double> out) noexcept {
  return vt().clamped_affine_store(w.data(), p.data(), mu, inv_theta, lo.data(), hi.data(),
                                   out.data(), w.size());
}

void scaled_affine(std::span<const double> scale, std::span<const double> a,
                   std::span<const double> x, std::span<const double> b,
                   std::span<double> out) noexcept {
  vt().scaled_affine(scale.data(), a.data(), x.data(), b.data(), out.data(), x.size());
}

void add_diff(std::span<double> acc, std::span<const double> xnew,
              std::span<const double> xold) noexcept {
  vt().add_diff(acc.data(), xnew.data(), xold.data(), acc.size());
}

double max_rel_gap(std::span<const double> x, std::span<const double> y) noexcept {
  return vt().max_rel_gap(x.data(), y.data(), x.size());
}

}  // namespace drsim::kernels
