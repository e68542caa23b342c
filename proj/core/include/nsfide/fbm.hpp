#pragma once

#include <cstdint>
#include <vector>

#include "nsfide/hurst_grid.hpp"

namespace nsfide::fbm {

/// R_H(s,t) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double covariance(double s, double t, const HurstParameter& h);

/// Euler Beta via log-Gamma.
double beta_function(double a, double b);

/// c_H = sqrt(H(2H-1) / Beta(2-2H, H-1/2)).
double normalizing_constant(const HurstParameter& h);

/// Composite Gauss-Legendre resolution for the kernel integral after the
/// w = (u-s)^{H-1/2} substitution that removes the endpoint singularity.
struct KernelQuadrature {
  std::size_t panels = 8;
  std::size_t points = 8;  // per panel
};

/// K_H(t,s) for s > 0; 0 for t <= s.
double kernel_K(double t, double s, const HurstParameter& h,
                const KernelQuadrature& quad = {});

/// dK/dr(r,s) = c_H s^{1/2-H} (r-s)^{H-3/2} r^{H-1/2}, r > s > 0.
double kernel_dK_dr(double r, double s, const HurstParameter& h);

/// (K_H* phi)(s) = int_s^T phi(r) dK/dr(r,s) dr, evaluated at the n_steps
/// cell midpoints (the grid point s = 0 is excluded: the s^{1/2-H} prefactor
/// diverges there). The smooth part of the integrand is taken piecewise
/// linear per cell against the exact antiderivative of (r-s)^{H-3/2}.
std::vector<double> kernel_K_star_apply(const ScalarFunctionOnGrid& phi, const HurstParameter& h);

/// Exact integrals of the singular weight phi_H(x) = H(2H-1)|x|^{2H-2} over
/// pairs of grid cells. weight(d) is the integral over two cells whose left
/// endpoints are d cells apart; half_diagonal() is the integral over the
/// triangle {u <= s} of a diagonal cell pair.
class PhiCellWeights {
 public:
  PhiCellWeights(const TimeGrid& grid, const HurstParameter& h);
  double weight(std::size_t d) const { return w_[d]; }
  double half_diagonal() const { return half_diag_; }
  std::size_t max_lag() const { return w_.size() - 1; }

 private:
  std::vector<double> w_;
  double half_diag_;
};

/// <psi, phi>_H with the weight integrated exactly per cell pair and the
/// functions read as piecewise constants (left endpoints).
double inner_product_H(const ScalarFunctionOnGrid& psi, const ScalarFunctionOnGrid& phi,
                       const HurstParameter& h);

/// One fBm path on a uniform grid; values[0] = 0.
struct FbmSample {
  TimeGrid grid;
  std::vector<double> values;       // n_steps + 1
  std::uint64_t seed_label = 0;

  double increment(std::size_t cell) const { return values[cell + 1] - values[cell]; }
};

/// Exact sampler: Cholesky factor of the covariance matrix on t_1..t_n.
/// The factor is computed once; sample() is a triangular matrix-vector
/// product per path. Thread-safe after construction.
class CholeskyFbmSampler {
 public:
  CholeskyFbmSampler(const TimeGrid& grid, const HurstParameter& h);
  FbmSample sample(std::uint64_t seed) const;
  const TimeGrid& grid() const { return grid_; }

 private:
  TimeGrid grid_;
  std::size_t n_;
  std::vector<double> chol_;  // lower triangle, row-major packed
};

/// Wiener-representation sampler: B^H(t_i) ~= sum_j K_H(t_i, s_{j+1/2}) dB_j,
/// midpoint kernel evaluation. Kept as an independent validation of K_H.
class WienerFbmSampler {
 public:
  WienerFbmSampler(const TimeGrid& grid, const HurstParameter& h,
                   const KernelQuadrature& quad = {});
  FbmSample sample(std::uint64_t seed) const;
  FbmSample path_from_increments(const std::vector<double>& brownian_increments) const;

  /// Exact second moments of the discretized estimator (dB_j iid N(0,dt)):
  /// E[B^(t_i) B^(t_j)] = dt * sum_k K(t_i,s_k) K(t_j,s_k).
  double discrete_covariance(std::size_t i, std::size_t j) const;

  const TimeGrid& grid() const { return grid_; }

 private:
  TimeGrid grid_;
  std::size_t n_;
  std::vector<double> kernel_;  // kernel_[i*n_ + j] = K(t_{i+1}, s_{j+1/2}), j <= i
};

FbmSample sample_fbm_cholesky(const TimeGrid& grid, const HurstParameter& h, std::uint64_t seed);
FbmSample sample_fbm_wiener(const TimeGrid& grid, const HurstParameter& h, std::uint64_t seed);

}  // namespace nsfide::fbm
