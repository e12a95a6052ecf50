#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Per-slot arithmetic primitives used by the solvers' inner loops.
//
// Two backends are provided: a scalar reference and an AVX2 variant compiled
// in its own translation unit. The backend is picked at runtime (cpuid) and
// can be forced for testing. Reductions accumulate in four interleaved lanes
// combined in a fixed order, so both backends produce bit-identical results;
// the equivalence tests assert exact equality.
namespace drsim::kernels {

enum class Backend { Scalar, Avx2 };

Backend active() noexcept;
bool supported(Backend b) noexcept;

// Throws std::invalid_argument if the backend is not usable on this machine.
void select(Backend b);
void select_auto() noexcept;
std::string_view name(Backend b) noexcept;

double sum(std::span<const double> x) noexcept;
double dot(std::span<const double> x, std::span<const double> y) noexcept;
double sum_sq(std::span<const double> x) noexcept;
double max_val(std::span<const double> x) noexcept;

// sum_t clamp(level, lo[t], hi[t])
double clamp_level_sum(double level, std::span<const double> lo, std::span<const double> hi) noexcept;

// sum_t clamp((w[t] - p[t] - mu) * inv_theta, lo[t], hi[t])
double clamped_affine_sum(std::span<const double> w, std::span<const double> p, double mu,
                          double inv_theta, std::span<const double> lo,
                          std::span<const double> hi) noexcept;

// Same as clamped_affine_sum but also writes the clamped values to out.
double clamped_affine_store(std::span<const double> w, std::span<const double> p, double mu,
                            double inv_theta, std::span<const double> lo,
                            std::span<const double> hi, std::span<double> out) noexcept;

// out[t] = scale[t] * (a[t] * x[t] + b[t])
void scaled_affine(std::span<const double> scale, std::span<const double> a,
                   std::span<const double> x, std::span<const double> b,
                   std::span<double> out) noexcept;

// acc[t] += xnew[t] - xold[t]
void add_diff(std::span<double> acc, std::span<const double> xnew,
              std::span<const double> xold) noexcept;

// max_t |x[t] - y[t]| / max(1, |y[t]|)
double max_rel_gap(std::span<const double> x, std::span<const double> y) noexcept;

}  // namespace drsim::kernels
