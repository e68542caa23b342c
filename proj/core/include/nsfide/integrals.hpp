#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nsfide/fbm.hpp"
#include "nsfide/hurst_grid.hpp"
#include "nsfide/resolvent.hpp"
#include "nsfide/spectral.hpp"

namespace nsfide::integrals {

/// Field-valued trajectory s -> u(s) on a time grid (one field per point;
/// forward sums freeze each cell at its left endpoint).
struct IntegrandTrajectory {
  TimeGrid grid;
  std::vector<spectral::SpectralField> fields;

  IntegrandTrajectory(const TimeGrid& g, std::vector<spectral::SpectralField> f)
      : grid(g), fields(std::move(f)) {
    if (fields.size() != grid.n_points())
      throw std::invalid_argument("trajectory needs one field per grid point");
  }
};

/// Lower-triangular array D_u y(s) for u <= s on the grid. entry(s,u) holds
/// the value frozen at the cell pair's left endpoints; the diagonal entry
/// represents the u <= s half of the diagonal cell (it gets half weight in
/// the trace quadrature).
class DerivativeSurface {
 public:
  DerivativeSurface(const TimeGrid& g, std::size_t n_modes)
      : grid_(g), n_modes_(n_modes),
        entries_(g.n_points() * (g.n_points() + 1) / 2, spectral::SpectralField(n_modes)) {}

  const TimeGrid& grid() const { return grid_; }
  std::size_t n_modes() const { return n_modes_; }

  spectral::SpectralField& entry(std::size_t s_idx, std::size_t u_idx) {
    check(s_idx, u_idx);
    return entries_[s_idx * (s_idx + 1) / 2 + u_idx];
  }
  const spectral::SpectralField& entry(std::size_t s_idx, std::size_t u_idx) const {
    check(s_idx, u_idx);
    return entries_[s_idx * (s_idx + 1) / 2 + u_idx];
  }

 private:
  void check(std::size_t s_idx, std::size_t u_idx) const {
    if (s_idx >= grid_.n_points() || u_idx > s_idx)
      throw std::invalid_argument("derivative surface indexed on the simplex u <= s");
  }
  TimeGrid grid_;
  std::size_t n_modes_;
  std::vector<spectral::SpectralField> entries_;
};

/// Forward Riemann-Stieltjes sum over cells [i_from, i_to):
/// sum_j u(s_j) (B^H(s_{j+1}) - B^H(s_j)).
spectral::SpectralField young_riemann_sum(const IntegrandTrajectory& integrand,
                                          const fbm::FbmSample& path, std::size_t i_from,
                                          std::size_t i_to);

/// Trace correction sum_{s-cells in [i_from,i_to)} sum_{u-cells <= s} of
/// D_u[u(s)] against the exact cell integrals of phi_H(s-u); diagonal cells
/// carry the half weight. d_integrand(s,u) must be D_u applied to the
/// integrand itself (weights such as R(t-s) or sigma' already folded in).
spectral::SpectralField trace_correction(const DerivativeSurface& d_integrand,
                                         const HurstParameter& h, std::size_t i_from,
                                         std::size_t i_to);

/// Pathwise sum minus trace correction (Skorohod realization for H > 1/2).
spectral::SpectralField skorohod_integral(const IntegrandTrajectory& integrand,
                                          const DerivativeSurface& d_integrand,
                                          const fbm::FbmSample& path, const HurstParameter& h,
                                          std::size_t i_from, std::size_t i_to);

/// Deterministic integrand: per-mode variance E[delta(u)_m^2] = <u_m, u_m>_H
/// with the mode trajectory read as piecewise constant. Matches the second
/// moment of the discrete forward sum exactly.
std::vector<double> wiener_variance_oracle(const IntegrandTrajectory& integrand,
                                           const HurstParameter& h);

/// Cross covariance of two deterministic integrands, per mode.
std::vector<double> wiener_covariance_oracle(const IntegrandTrajectory& a,
                                             const IntegrandTrajectory& b,
                                             const HurstParameter& h);

}  // namespace nsfide::integrals
