#pragma once

#include <iosfwd>
#include <vector>

#include "nsfide/hurst_grid.hpp"
#include "nsfide/memory_kernel.hpp"
#include "nsfide/spectral.hpp"

namespace nsfide::resolvent {

/// Scalar resolvent of r'(t) = -lambda [ r(t) + int_0^t b(t-s) r(s) ds ],
/// r(0) = 1: implicit trapezoidal step with trapezoidal convolution sum
/// (A-stable, second order).
std::vector<double> solve_mode_resolvent(double lambda, const MemoryKernel& b,
                                         const TimeGrid& grid);

/// Least-squares estimate of (N, beta) with |r(t)| <= N e^{beta t} tightened
/// so the bound holds at every grid point.
struct GrowthBound {
  double n_const;
  double beta;
};

/// Per-mode resolvent values r_n(t_i) for the spectral model A e_n = -n^2 e_n.
class ResolventTable {
 public:
  ResolventTable(std::size_t n_modes, const MemoryKernelPtr& b, const TimeGrid& grid);

  std::size_t n_modes() const { return n_modes_; }
  const TimeGrid& grid() const { return grid_; }
  const MemoryKernelPtr& kernel() const { return b_; }
  double eigenvalue(std::size_t mode) const;  // mode is 0-based: lambda = (mode+1)^2

  /// r_mode(t_i)
  double entry(std::size_t mode, std::size_t t_index) const {
    return entries_[mode * stride_ + t_index];
  }
  /// Column view over modes at a fixed time index (contiguous).
  const double* at_time(std::size_t t_index) const { return by_time_.data() + t_index * n_modes_; }

  spectral::SpectralField apply(std::size_t t_index, const spectral::SpectralField& x) const;

  GrowthBound growth_bound(std::size_t mode) const;
  /// max over modes of the fitted N (Definition growth audit).
  double growth_audit_max_n() const;

  void write_csv(std::ostream& os) const;

 private:
  std::size_t n_modes_;
  MemoryKernelPtr b_;
  TimeGrid grid_;
  std::size_t stride_;
  std::vector<double> entries_;  // mode-major
  std::vector<double> by_time_;  // time-major copy for fast field application
};

/// Max over the lowest `modes_checked` modes, normalized by lambda, of the
/// interior residual |r'(t) + lambda r(t) + lambda int_0^t b(t-s) r(s) ds|
/// (central differences, trapezoidal quadrature).
double resolvent_identity_residual(const ResolventTable& table, const MemoryKernel& b,
                                   std::size_t modes_checked = 5);

/// Variation-of-constants solution v(t) = R(t) v0 + int_0^t R(t-s) q(s) ds,
/// trapezoidal in s, evaluated at every grid point.
std::vector<spectral::SpectralField> mild_solution_deterministic(
    const ResolventTable& table, const spectral::SpectralField& v0,
    const std::vector<spectral::SpectralField>& q);

}  // namespace nsfide::resolvent
