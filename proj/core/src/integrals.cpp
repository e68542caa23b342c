#include "nsfide/integrals.hpp"

#include <stdexcept>

namespace nsfide::integrals {

namespace {
void check_window(const TimeGrid& g, std::size_t i_from, std::size_t i_to) {
  if (i_from > i_to || i_to > g.n_steps())
    throw std::invalid_argument("integration window out of range");
}
}  // namespace

spectral::SpectralField young_riemann_sum(const IntegrandTrajectory& integrand,
                                          const fbm::FbmSample& path, std::size_t i_from,
                                          std::size_t i_to) {
  if (!integrand.grid.same_as(path.grid))
    throw std::invalid_argument("integrand and driver must share the grid");
  check_window(integrand.grid, i_from, i_to);
  spectral::SpectralField acc(integrand.fields.front().n_modes());
  for (std::size_t j = i_from; j < i_to; ++j) {
    const double db = path.increment(j);
    const auto& f = integrand.fields[j];
    for (std::size_t m = 0; m < acc.n_modes(); ++m) acc.coeffs[m] += f.coeffs[m] * db;
  }
  return acc;
}

spectral::SpectralField trace_correction(const DerivativeSurface& d_integrand,
                                         const HurstParameter& h, std::size_t i_from,
                                         std::size_t i_to) {
  const TimeGrid& g = d_integrand.grid();
  check_window(g, i_from, i_to);
  const fbm::PhiCellWeights w(g, h);
  spectral::SpectralField acc(d_integrand.n_modes());
  for (std::size_t i = i_from; i < i_to; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double wij = (j == i) ? w.half_diagonal() : w.weight(i - j);
      const auto& d = d_integrand.entry(i, j);
      for (std::size_t m = 0; m < acc.n_modes(); ++m) acc.coeffs[m] += wij * d.coeffs[m];
    }
  }
  return acc;
}

spectral::SpectralField skorohod_integral(const IntegrandTrajectory& integrand,
                                          const DerivativeSurface& d_integrand,
                                          const fbm::FbmSample& path, const HurstParameter& h,
                                          std::size_t i_from, std::size_t i_to) {
  spectral::SpectralField out = young_riemann_sum(integrand, path, i_from, i_to);
  out -= trace_correction(d_integrand, h, i_from, i_to);
  return out;
}

std::vector<double> wiener_variance_oracle(const IntegrandTrajectory& integrand,
                                           const HurstParameter& h) {
  return wiener_covariance_oracle(integrand, integrand, h);
}

std::vector<double> wiener_covariance_oracle(const IntegrandTrajectory& a,
                                             const IntegrandTrajectory& b,
                                             const HurstParameter& h) {
  if (!a.grid.same_as(b.grid)) throw std::invalid_argument("grids must match");
  const std::size_t nm = a.fields.front().n_modes();
  std::vector<double> out(nm);
  std::vector<double> ta(a.grid.n_points()), tb(b.grid.n_points());
  for (std::size_t m = 0; m < nm; ++m) {
    for (std::size_t i = 0; i < a.grid.n_points(); ++i) {
      ta[i] = a.fields[i].coeffs[m];
      tb[i] = b.fields[i].coeffs[m];
    }
    out[m] = fbm::inner_product_H(ScalarFunctionOnGrid(a.grid, ta),
                                  ScalarFunctionOnGrid(b.grid, tb), h);
  }
  return out;
}

}  // namespace nsfide::integrals
