#include "nsfide/resolvent.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "nsfide/io.hpp"

namespace nsfide::resolvent {

std::vector<double> solve_mode_resolvent(double lambda, const MemoryKernel& b,
                                         const TimeGrid& grid) {
  if (!(lambda > 0.0)) throw std::invalid_argument("solve_mode_resolvent needs lambda > 0");
  const std::size_t n = grid.n_steps();
  const double dt = grid.dt();
  std::vector<double> r(n + 1);
  r[0] = 1.0;

  // b(t_k - t_j) evaluated once per lag.
  std::vector<double> bv(n + 1);
  for (std::size_t k = 0; k <= n; ++k) bv[k] = b.value(grid.point(k));

  // Trapezoidal convolution C_k = int_0^{t_k} b(t_k - s) r(s) ds.
  std::vector<double> conv(n + 1, 0.0);
  double g_prev = -lambda;  // g_0 = -lambda (r_0 + C_0), C_0 = 0

  const double denom = 1.0 + 0.5 * lambda * dt + 0.25 * lambda * dt * dt * bv[0];
  for (std::size_t i = 0; i + 1 <= n; ++i) {
    // Convolution at t_{i+1} without the unknown j = i+1 node.
    double c_star = 0.5 * bv[i + 1] * r[0];
    for (std::size_t j = 1; j <= i; ++j) c_star += bv[i + 1 - j] * r[j];
    c_star *= dt;
    const double rhs = r[i] + 0.5 * dt * g_prev - 0.5 * lambda * dt * c_star;
    const double r_next = rhs / denom;
    r[i + 1] = r_next;
    conv[i + 1] = c_star + 0.5 * dt * bv[0] * r_next;
    g_prev = -lambda * (r_next + conv[i + 1]);
    if (!std::isfinite(r_next) || std::abs(r_next) > 1e12)
      throw std::runtime_error("mode resolvent blew up (step-size instability), lambda = " +
                               std::to_string(lambda));
  }
  return r;
}

ResolventTable::ResolventTable(std::size_t n_modes, const MemoryKernelPtr& b,
                               const TimeGrid& grid)
    : n_modes_(n_modes), b_(b), grid_(grid), stride_(grid.n_points()) {
  if (n_modes == 0) throw std::invalid_argument("resolvent table needs n_modes >= 1");
  entries_.resize(n_modes * stride_);
  for (std::size_t m = 0; m < n_modes; ++m) {
    const double lambda = eigenvalue(m);
    std::vector<double> r = solve_mode_resolvent(lambda, *b, grid);
    std::copy(r.begin(), r.end(), entries_.begin() + m * stride_);
  }
  by_time_.resize(entries_.size());
  for (std::size_t i = 0; i < stride_; ++i)
    for (std::size_t m = 0; m < n_modes; ++m) by_time_[i * n_modes + m] = entry(m, i);
}

double ResolventTable::eigenvalue(std::size_t mode) const {
  if (mode >= n_modes_) throw std::invalid_argument("mode out of range");
  const double k = static_cast<double>(mode + 1);
  return k * k;
}

spectral::SpectralField ResolventTable::apply(std::size_t t_index,
                                              const spectral::SpectralField& x) const {
  if (t_index >= stride_) throw std::invalid_argument("t_index beyond table grid");
  if (x.n_modes() != n_modes_) throw std::invalid_argument("mode count mismatch");
  spectral::SpectralField out(n_modes_);
  const double* r = at_time(t_index);
  for (std::size_t m = 0; m < n_modes_; ++m) out.coeffs[m] = r[m] * x.coeffs[m];
  return out;
}

GrowthBound ResolventTable::growth_bound(std::size_t mode) const {
  // LS fit of log|r| ~ log N + beta t over points with |r| above noise,
  // then N is raised so the bound holds everywhere.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < stride_; ++i) {
    const double a = std::abs(entry(mode, i));
    if (a < 1e-12) continue;
    const double x = grid_.point(i), y = std::log(a);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  double beta = 0.0;
  if (cnt >= 2) {
    const double det = static_cast<double>(cnt) * sxx - sx * sx;
    if (det > 0.0) beta = (static_cast<double>(cnt) * sxy - sx * sy) / det;
  }
  if (beta > 0.0 && std::abs(entry(mode, stride_ - 1)) <= 1.0) beta = 0.0;
  double n_const = 0.0;
  for (std::size_t i = 0; i < stride_; ++i)
    n_const = std::max(n_const, std::abs(entry(mode, i)) * std::exp(-beta * grid_.point(i)));
  return {std::max(n_const, 1.0), beta};
}

double ResolventTable::growth_audit_max_n() const {
  double worst = 0.0;
  for (std::size_t m = 0; m < n_modes_; ++m) worst = std::max(worst, growth_bound(m).n_const);
  return worst;
}

void ResolventTable::write_csv(std::ostream& os) const {
  os << "# eigenvalues";
  for (std::size_t m = 0; m < n_modes_; ++m) os << "," << io::format_number(eigenvalue(m));
  os << "\n";
  os << "t";
  for (std::size_t m = 0; m < n_modes_; ++m) os << ",r_" << (m + 1);
  os << "\n";
  for (std::size_t i = 0; i < stride_; ++i) {
    os << io::format_number(grid_.point(i));
    for (std::size_t m = 0; m < n_modes_; ++m) os << "," << io::format_number(entry(m, i));
    os << "\n";
  }
}

double resolvent_identity_residual(const ResolventTable& table, const MemoryKernel& b,
                                   std::size_t modes_checked) {
  const TimeGrid& g = table.grid();
  const double dt = g.dt();
  const std::size_t n = g.n_steps();
  if (n < 3) throw std::invalid_argument("grid too coarse for finite differencing");
  std::vector<double> bv(n + 1);
  for (std::size_t k = 0; k <= n; ++k) bv[k] = b.value(g.point(k));

  double worst = 0.0;
  const std::size_t m_max = std::min(modes_checked, table.n_modes());
  for (std::size_t m = 0; m < m_max; ++m) {
    const double lambda = table.eigenvalue(m);
    for (std::size_t i = 1; i + 1 <= n - 1; ++i) {
      const double dr = (table.entry(m, i + 1) - table.entry(m, i - 1)) / (2.0 * dt);
      double conv = 0.5 * (bv[i] * table.entry(m, 0) + bv[0] * table.entry(m, i));
      for (std::size_t j = 1; j < i; ++j) conv += bv[i - j] * table.entry(m, j);
      conv *= dt;
      const double res = std::abs(dr + lambda * table.entry(m, i) + lambda * conv) / lambda;
      worst = std::max(worst, res);
    }
  }
  return worst;
}

std::vector<spectral::SpectralField> mild_solution_deterministic(
    const ResolventTable& table, const spectral::SpectralField& v0,
    const std::vector<spectral::SpectralField>& q) {
  const TimeGrid& g = table.grid();
  const std::size_t n = g.n_steps();
  const std::size_t nm = table.n_modes();
  if (v0.n_modes() != nm) throw std::invalid_argument("mode count mismatch");
  if (q.size() != g.n_points())
    throw std::invalid_argument("forcing must be sampled on the table grid");
  const double dt = g.dt();

  std::vector<spectral::SpectralField> v(n + 1, spectral::SpectralField(nm));
  for (std::size_t i = 0; i <= n; ++i) {
    spectral::SpectralField acc = table.apply(i, v0);
    if (i > 0) {
      for (std::size_t j = 0; j <= i; ++j) {
        const double w = (j == 0 || j == i) ? 0.5 * dt : dt;
        const double* r = table.at_time(i - j);
        for (std::size_t m = 0; m < nm; ++m) acc.coeffs[m] += w * r[m] * q[j].coeffs[m];
      }
    }
    v[i] = std::move(acc);
  }
  return v;
}

}  // namespace nsfide::resolvent
