#include "nsfide/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "nsfide/rng.hpp"

namespace nsfide::density {

namespace {
constexpr double kDegenerateNorm = 1e-12;
}

Eigen::VectorXd FunctionalF::gradient(const Eigen::VectorXd& x, bool& degenerate) const {
  degenerate = false;
  switch (kind_) {
    case Kind::Linear:
      if (v_.size() != x.size()) throw std::invalid_argument("functional dimension mismatch");
      return v_;
    case Kind::Norm: {
      const double nx = x.norm();
      if (nx < kDegenerateNorm) {
        degenerate = true;
        return Eigen::VectorXd::Zero(x.size());
      }
      return x / nx;
    }
    case Kind::NormUnnormalized:
      return x;
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd last_interval_derivative(const solver::PathRun& run, std::size_t u_idx,
                                         std::size_t t_idx) {
  const auto& ctx = run.context();
  const std::size_t L = ctx.delay_cells();
  if (!(u_idx < t_idx) || u_idx + L <= t_idx)
    throw std::invalid_argument("last-interval formula needs t - r < u < t");
  return ctx.rvec(t_idx - u_idx).cwiseProduct(run.sigma_coeff(u_idx));
}

namespace {

double criterion_window(const solver::PathRun& run, std::size_t t_idx, const FunctionalF& f,
                        std::size_t u_lo, bool use_surface, bool& degenerate) {
  const auto& ctx = run.context();
  if (t_idx == 0 || t_idx > ctx.n_steps())
    throw std::invalid_argument("criterion time must satisfy 0 < t <= T");
  const double dt = ctx.model().dt;
  const Eigen::VectorXd grad = f.gradient(run.x_col(t_idx), degenerate);
  if (degenerate) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (std::size_t u = u_lo; u <= t_idx; ++u) {
    Eigen::VectorXd field;
    if (use_surface)
      field = run.d1(t_idx).col(static_cast<Eigen::Index>(u));
    else
      field = ctx.rvec(t_idx - u).cwiseProduct(run.sigma_coeff(u));
    const double val = grad.dot(field);
    const double w = (u == u_lo || u == t_idx) ? 0.5 * dt : dt;
    acc += w * val * val;
  }
  return acc;
}

}  // namespace

double density_criterion(const solver::PathRun& run, std::size_t t_idx, const FunctionalF& f,
                         bool& degenerate) {
  const std::size_t L = run.context().delay_cells();
  const std::size_t u_lo = t_idx >= L ? t_idx - L : 0;
  return criterion_window(run, t_idx, f, u_lo, /*use_surface=*/false, degenerate);
}

double density_criterion_extended(const solver::PathRun& run, std::size_t t_idx,
                                  const FunctionalF& f, bool& degenerate) {
  return criterion_window(run, t_idx, f, 0, /*use_surface=*/true, degenerate);
}

CriterionReport criterion_statistics(const solver::SolverContext& ctx, std::size_t t_idx,
                                     std::size_t n_paths, double epsilon, const FunctionalF& f,
                                     std::uint64_t base_seed, unsigned threads) {
  if (n_paths == 0) throw std::invalid_argument("need n_paths >= 1");
  CriterionReport rep;
  rep.t = ctx.model().time_grid().point(t_idx);
  rep.epsilon = epsilon;
  rep.seeds.resize(n_paths);
  rep.values.assign(n_paths, 0.0);

  const unsigned workers = std::max(1u, threads);
  auto work = [&](unsigned wid) {
    solver::PathRun run(ctx);
    for (std::size_t i = wid; i < n_paths; i += workers) {
      const std::uint64_t seed = derive_seed(base_seed, i);
      run.start(seed);
      run.solve_all();
      bool degenerate = false;
      const double v = density_criterion(run, t_idx, f, degenerate);
      rep.seeds[i] = seed;
      rep.values[i] = degenerate ? std::numeric_limits<double>::quiet_NaN() : v;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  std::vector<double> clean;
  std::size_t positive = 0;
  for (double v : rep.values) {
    if (std::isnan(v)) {
      ++rep.degenerate_count;
      continue;
    }
    clean.push_back(v);
    if (v > epsilon) ++positive;
  }
  rep.fraction_positive = static_cast<double>(positive) / static_cast<double>(n_paths);
  if (!clean.empty()) {
    std::sort(clean.begin(), clean.end());
    rep.min_value = clean.front();
    auto q = [&](double p) {
      const double pos = p * static_cast<double>(clean.size() - 1);
      const std::size_t lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, clean.size() - 1);
      const double frac = pos - static_cast<double>(lo);
      return clean[lo] * (1.0 - frac) + clean[hi] * frac;
    };
    rep.q25 = q(0.25);
    rep.q50 = q(0.50);
    rep.q75 = q(0.75);
  }
  return rep;
}

}  // namespace nsfide::density
