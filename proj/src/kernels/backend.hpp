#pragma once

#include <cstddef>

// Internal backend table for drsim::kernels. Every implementation must follow
// the 4-lane reduction contract documented in kernels.hpp.
namespace drsim::kernels::detail {

struct Vtable {
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum_sq)(const double*, std::size_t);
  double (*max_val)(const double*, std::size_t);
  double (*clamp_level_sum)(double, const double*, const double*, std::size_t);
  double (*clamped_affine_sum)(const double*, const double*, double, double, const double*,
                               const double*, std::size_t);
  double (*clamped_affine_store)(const double*, const double*, double, double, const double*,
                                 const double*, double*, std::size_t);
  void (*scaled_affine)(const double*, const double*, const double*, const double*, double*,
                        std::size_t);
  void (*add_diff)(double*, const double*, const double*, std::size_t);
  double (*max_rel_gap)(const double*, const double*, std::size_t);
};

const Vtable& scalar_vtable() noexcept;

#ifdef DRSIM_HAVE_AVX2_TU
const Vtable& avx2_vtable() noexcept;
#endif

}  // namespace drsim::kernels::detail
