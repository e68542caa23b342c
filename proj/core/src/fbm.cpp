#include "nsfide/fbm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsfide/rng.hpp"

namespace nsfide::fbm {

double covariance(double s, double t, const HurstParameter& h) {
  if (s < 0.0 || t < 0.0) throw std::invalid_argument("covariance needs s,t >= 0");
  const double two_h = h.two_h();
  return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

double beta_function(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double normalizing_constant(const HurstParameter& h) {
  const double H = h.value();
  return std::sqrt(H * (2.0 * H - 1.0) / beta_function(2.0 - 2.0 * H, H - 0.5));
}

namespace {

// Nodes/weights of k-point Gauss-Legendre on [-1,1].
void gauss_legendre(std::size_t k, std::vector<double>& x, std::vector<double>& w) {
  x.resize(k);
  w.resize(k);
  // Newton iteration on Legendre polynomials.
  for (std::size_t i = 0; i < (k + 1) / 2; ++i) {
    double xi = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (static_cast<double>(k) + 0.5));
    double p0 = 0.0, p1 = 0.0, dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      p0 = 1.0;
      p1 = xi;
      for (std::size_t j = 2; j <= k; ++j) {
        const double pj = ((2.0 * j - 1.0) * xi * p1 - (j - 1.0) * p0) / static_cast<double>(j);
        p0 = p1;
        p1 = pj;
      }
      dp = static_cast<double>(k) * (xi * p1 - p0) / (xi * xi - 1.0);
      const double dx = p1 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x[i] = -xi;
    x[k - 1 - i] = xi;
    w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    w[k - 1 - i] = w[i];
  }
}

}  // namespace

double kernel_K(double t, double s, const HurstParameter& h, const KernelQuadrature& quad) {
  if (s <= 0.0) throw std::invalid_argument("kernel_K needs s > 0");
  if (t <= s) return 0.0;
  const double H = h.value();
  const double alpha = H - 0.5;
  // w = (u-s)^alpha turns the integral into (1/alpha) int_0^{(t-s)^alpha}
  // (s + w^{1/alpha})^{H-1/2} dw with a bounded smooth integrand.
  const double w_max = std::pow(t - s, alpha);
  std::vector<double> gx, gw;
  gauss_legendre(quad.points, gx, gw);
  const double panel_w = w_max / static_cast<double>(quad.panels);
  double acc = 0.0;
  for (std::size_t p = 0; p < quad.panels; ++p) {
    const double a = panel_w * static_cast<double>(p);
    const double c = a + 0.5 * panel_w;
    for (std::size_t q = 0; q < quad.points; ++q) {
      const double w = c + 0.5 * panel_w * gx[q];
      const double u = s + std::pow(w, 1.0 / alpha);
      acc += gw[q] * std::pow(u, alpha);
    }
  }
  acc *= 0.5 * panel_w / alpha;
  return normalizing_constant(h) * std::pow(s, -alpha) * acc;
}

double kernel_dK_dr(double r, double s, const HurstParameter& h) {
  if (s <= 0.0 || r <= s) throw std::invalid_argument("kernel_dK_dr needs r > s > 0");
  const double H = h.value();
  return normalizing_constant(h) * std::pow(s, 0.5 - H) * std::pow(r - s, H - 1.5) *
         std::pow(r, H - 0.5);
}

std::vector<double> kernel_K_star_apply(const ScalarFunctionOnGrid& phi, const HurstParameter& h) {
  const TimeGrid& g = phi.grid;
  const double H = h.value();
  const double alpha = H - 0.5;
  const double c_h = normalizing_constant(h);
  const std::size_t n = g.n_steps();
  std::vector<double> out(n, 0.0);

  // G(r) = phi(r) r^{H-1/2}, piecewise linear between nodes; the singular
  // factor (r-s)^{H-3/2} is integrated exactly on each interval.
  std::vector<double> G(g.n_points());
  for (std::size_t i = 0; i < g.n_points(); ++i)
    G[i] = phi.values[i] * std::pow(g.point(i), alpha);
  G[0] = 0.0;  // r^{alpha} -> 0 as r -> 0 for alpha > 0

  for (std::size_t m = 0; m < n; ++m) {
    const double s = g.midpoint(m);
    double acc = 0.0;
    for (std::size_t j = m; j < n; ++j) {
      const double a = std::max(g.point(j), s);
      const double b = g.point(j + 1);
      if (b <= a) continue;
      // linear interpolation of G on [t_j, t_{j+1}], restricted to [a,b]
      const double Gj = G[j], Gj1 = G[j + 1];
      const double slope = (Gj1 - Gj) / g.dt();
      const double Ga = Gj + slope * (a - g.point(j));
      const double pa = std::pow(a - s, alpha);
      const double pb = std::pow(b - s, alpha);
      const double I0 = (pb - pa) / alpha;
      const double I1 = (pb * (b - s) - pa * (a - s)) / (alpha + 1.0) - (a - s) * I0;
      acc += Ga * I0 + slope * I1;
    }
    out[m] = c_h * std::pow(s, -alpha) * acc;
  }
  return out;
}

PhiCellWeights::PhiCellWeights(const TimeGrid& grid, const HurstParameter& h) {
  const double two_h = h.two_h();
  const double dt = grid.dt();
  const double dt_pow = std::pow(dt, two_h);
  const std::size_t n = grid.n_steps();
  w_.resize(n + 1);
  // Psi(x) = |x|^{2H}/2 is the double antiderivative of phi_H.
  for (std::size_t d = 0; d <= n; ++d) {
    const double dd = static_cast<double>(d);
    w_[d] = 0.5 * dt_pow *
            (std::pow(dd + 1.0, two_h) + std::pow(std::abs(dd - 1.0), two_h) -
             2.0 * std::pow(dd, two_h));
  }
  half_diag_ = 0.5 * dt_pow;
}

double inner_product_H(const ScalarFunctionOnGrid& psi, const ScalarFunctionOnGrid& phi,
                       const HurstParameter& h) {
  if (!psi.grid.same_as(phi.grid))
    throw std::invalid_argument("inner_product_H needs matching grids");
  const PhiCellWeights w(psi.grid, h);
  const std::size_t n = psi.grid.n_steps();
  // symmetric pairing keeps <psi,phi> == <phi,psi> exact in floating point
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += psi.values[i] * phi.values[i] * w.weight(0);
  for (std::size_t d = 1; d < n; ++d) {
    const double wd = w.weight(d);
    double pair = 0.0;
    for (std::size_t i = 0; i + d < n; ++i)
      pair += psi.values[i] * phi.values[i + d] + psi.values[i + d] * phi.values[i];
    acc += wd * pair;
  }
  return acc;
}

CholeskyFbmSampler::CholeskyFbmSampler(const TimeGrid& grid, const HurstParameter& h)
    : grid_(grid), n_(grid.n_steps()) {
  Eigen::MatrixXd cov(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = covariance(grid.point(i + 1), grid.point(j + 1), h);
      cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "fBm covariance Cholesky failed (duplicated grid points?)");
  Eigen::MatrixXd L = llt.matrixL();
  chol_.resize(n_ * (n_ + 1) / 2);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      chol_[k++] = L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

FbmSample CholeskyFbmSampler::sample(std::uint64_t seed) const {
  GaussianSampler rng(seed);
  std::vector<double> z(n_);
  rng.fill_normal(z.data(), n_);
  FbmSample out{grid_, std::vector<double>(n_ + 1, 0.0), seed};
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += chol_[k++] * z[j];
    out.values[i + 1] = acc;
  }
  return out;
}

WienerFbmSampler::WienerFbmSampler(const TimeGrid& grid, const HurstParameter& h,
                                   const KernelQuadrature& quad)
    : grid_(grid), n_(grid.n_steps()), kernel_(grid.n_steps() * grid.n_steps(), 0.0) {
  for (std::size_t i = 0; i < n_; ++i) {
    const double t = grid.point(i + 1);
    for (std::size_t j = 0; j <= i; ++j)
      kernel_[i * n_ + j] = kernel_K(t, grid.midpoint(j), h, quad);
  }
}

FbmSample WienerFbmSampler::path_from_increments(const std::vector<double>& db) const {
  if (db.size() != n_)
    throw std::invalid_argument("need one Brownian increment per grid cell");
  FbmSample out{grid_, std::vector<double>(n_ + 1, 0.0), 0};
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    const double* row = &kernel_[i * n_];
    for (std::size_t j = 0; j <= i; ++j) acc += row[j] * db[j];
    out.values[i + 1] = acc;
  }
  return out;
}

FbmSample WienerFbmSampler::sample(std::uint64_t seed) const {
  GaussianSampler rng(seed);
  const double sq_dt = std::sqrt(grid_.dt());
  std::vector<double> db(n_);
  for (std::size_t j = 0; j < n_; ++j) db[j] = sq_dt * rng.normal();
  FbmSample out = path_from_increments(db);
  out.seed_label = seed;
  return out;
}

double WienerFbmSampler::discrete_covariance(std::size_t i, std::size_t j) const {
  if (i == 0 || j == 0 || i > n_ || j > n_)
    throw std::invalid_argument("discrete_covariance indexes grid points 1..n");
  const double* ri = &kernel_[(i - 1) * n_];
  const double* rj = &kernel_[(j - 1) * n_];
  double acc = 0.0;
  const std::size_t m = std::min(i, j);
  for (std::size_t k = 0; k < m; ++k) acc += ri[k] * rj[k];
  return acc * grid_.dt();
}

FbmSample sample_fbm_cholesky(const TimeGrid& grid, const HurstParameter& h, std::uint64_t seed) {
  return CholeskyFbmSampler(grid, h).sample(seed);
}

FbmSample sample_fbm_wiener(const TimeGrid& grid, const HurstParameter& h, std::uint64_t seed) {
  return WienerFbmSampler(grid, h).sample(seed);
}

}  // namespace nsfide::fbm
