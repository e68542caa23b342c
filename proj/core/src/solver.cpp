#include "nsfide/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>
#include <tuple>

#include "nsfide/rng.hpp"

namespace nsfide::solver {

std::unique_ptr<PathRun> solve_path(const SolverContext& ctx, std::uint64_t seed) {
  auto run = std::make_unique<PathRun>(ctx);
  run->start(seed);
  run->solve_all();
  return run;
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> order1_sample_pairs(std::size_t n,
                                                                     std::size_t L) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 1; k <= 8; ++k) {
    const std::size_t t = std::max<std::size_t>(1, k * n / 8);
    const std::size_t cands[4] = {t / 4, t / 2, (3 * t) / 4, t > L / 2 ? t - L / 2 : t / 3};
    for (std::size_t u : cands) {
      if (u >= t) continue;
      if (std::find(pairs.begin(), pairs.end(), std::make_pair(u, t)) == pairs.end())
        pairs.emplace_back(u, t);
    }
  }
  return pairs;
}

struct Order2Sample {
  std::size_t w, u;
  std::vector<std::size_t> taus;
};

std::vector<Order2Sample> order2_samples(std::size_t n, std::size_t L) {
  std::vector<Order2Sample> out;
  if (n <= L + 2) return out;
  auto add = [&](std::size_t w, std::size_t u) {
    if (w >= u) return;
    Order2Sample s{w, u, {}};
    for (std::size_t tau : {L + L / 2, 2 * L, (2 * L + n) / 2, n})
      if (tau > u && tau <= n &&
          std::find(s.taus.begin(), s.taus.end(), tau) == s.taus.end())
        s.taus.push_back(tau);
    if (!s.taus.empty()) out.push_back(std::move(s));
  };
  add(n / 8, n / 3);
  add(n / 6, n / 2);
  add(n / 3, (2 * n) / 3);
  add(n / 2, (3 * n) / 4);
  return out;
}

}  // namespace

MomentsReport monte_carlo_moments(const SolverContext& ctx, std::size_t n_paths,
                                  std::uint64_t base_seed, const MomentsOptions& opt) {
  const std::size_t n = ctx.n_steps();
  const std::size_t L = ctx.delay_cells();
  const std::size_t m = ctx.block_count();
  const std::size_t N = ctx.n_modes();
  const int K = ctx.model().derivative_depth;

  const auto pairs1 = order1_sample_pairs(n, L);
  const auto samp2 = opt.skip_derivative_audit || K < 2 ? std::vector<Order2Sample>{}
                                                        : order2_samples(n, L);
  std::size_t n2_vals = 0;
  for (const auto& s : samp2) n2_vals += s.taus.size();
  const Order2Sample samp3 = (K >= 3 && n > L + 2)
                                 ? Order2Sample{n / 5, n / 2, {std::min(2 * L, n), n}}
                                 : Order2Sample{0, 0, {}};

  // per-path row: ||x||^2 (n+1) | ||dx||^2 (n) | order-1 pairs | Z (m*N) |
  //               order-2 values | order-3 values
  const std::size_t off_dx = n + 1;
  const std::size_t off_p1 = off_dx + n;
  const std::size_t off_z = off_p1 + pairs1.size();
  const std::size_t off_p2 = off_z + m * N;
  const std::size_t off_p3 = off_p2 + n2_vals;
  const std::size_t row_len = off_p3 + samp3.taus.size();

  std::vector<std::vector<double>> rows(n_paths);
  std::set<std::pair<std::size_t, int>> flags;
  std::mutex flag_mu;

  const unsigned workers = std::max(1u, opt.threads);
  auto work = [&](unsigned wid) {
    PathRun run(ctx);
    std::set<std::pair<std::size_t, int>> local_flags;
    for (std::size_t i = wid; i < n_paths; i += workers) {
      run.start(derive_seed(base_seed, i));
      run.solve_all();
      std::vector<double>& row = rows[i];
      row.assign(row_len, std::numeric_limits<double>::quiet_NaN());
      for (std::size_t k = 0; k <= n; ++k)
        row[k] = run.x().col(static_cast<Eigen::Index>(k)).squaredNorm();
      for (std::size_t k = 0; k < n; ++k)
        row[off_dx + k] = (run.x().col(static_cast<Eigen::Index>(k + 1)) -
                           run.x().col(static_cast<Eigen::Index>(k)))
                              .squaredNorm();
      for (std::size_t p = 0; p < pairs1.size(); ++p)
        row[off_p1 + p] = run.d1(pairs1[p].second)
                              .col(static_cast<Eigen::Index>(pairs1[p].first))
                              .squaredNorm();
      for (std::size_t bn = 1; bn <= m; ++bn) {
        const Eigen::VectorXd z = run.skorohod_block_term(bn);
        for (std::size_t c = 0; c < N; ++c) row[off_z + (bn - 1) * N + c] = z(static_cast<Eigen::Index>(c));
      }
      if (!samp2.empty() && (i % opt.order2_path_stride) == 0) {
        std::size_t slot = 0;
        for (const auto& s : samp2) {
          const Eigen::MatrixXd march = run.second_derivative_march(s.w, s.u);
          for (std::size_t tau : s.taus)
            row[off_p2 + slot++] = march.col(static_cast<Eigen::Index>(tau)).squaredNorm();
        }
      }
      if (!samp3.taus.empty() && (i % opt.order2_path_stride) == 0) {
        const Eigen::MatrixXd march =
            run.third_derivative_march(samp3.w, samp3.u, (samp3.w + samp3.u) / 2);
        std::size_t slot = 0;
        for (std::size_t tau : samp3.taus)
          row[off_p3 + slot++] = march.col(static_cast<Eigen::Index>(tau)).squaredNorm();
      }
      local_flags.insert(run.bias_flags().begin(), run.bias_flags().end());
    }
    std::lock_guard<std::mutex> lk(flag_mu);
    flags.insert(local_flags.begin(), local_flags.end());
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  // deterministic reduction in path order
  auto stat_range = [&](std::size_t col, std::size_t limit) {
    double s = 0.0, s2 = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < limit; ++i) {
      const double v = rows[i][col];
      if (std::isnan(v)) continue;
      s += v;
      s2 += v * v;
      ++cnt;
    }
    const double mean = cnt ? s / static_cast<double>(cnt) : 0.0;
    double var = cnt > 1 ? (s2 - static_cast<double>(cnt) * mean * mean) /
                               static_cast<double>(cnt - 1)
                         : 0.0;
    var = std::max(var, 0.0);
    const double se = cnt > 1 ? std::sqrt(var / static_cast<double>(cnt)) : 0.0;
    return std::tuple<double, double, std::size_t>(mean, se, cnt);
  };
  auto stat_at = [&](std::size_t col) { return stat_range(col, n_paths); };

  MomentsReport rep;
  rep.n_paths = n_paths;
  rep.bias_flags = flags;
  rep.t.resize(n + 1);
  rep.mean_sq_norm.resize(n + 1);
  rep.se.resize(n + 1);
  const TimeGrid grid = ctx.model().time_grid();
  for (std::size_t k = 0; k <= n; ++k) {
    rep.t[k] = grid.point(k);
    auto [mean, se, cnt] = stat_at(k);
    rep.mean_sq_norm[k] = mean;
    rep.se[k] = se;
    if (mean > rep.sup_mean_sq) {
      rep.sup_mean_sq = mean;
      rep.sup_se = se;
      rep.sup_index = k;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    auto [mean, se, cnt] = stat_at(off_dx + k);
    rep.continuity_max = std::max(rep.continuity_max, mean);
  }

  OrderAudit a1;
  a1.order = 1;
  a1.paths_used = n_paths;
  for (std::size_t p = 0; p < pairs1.size(); ++p) {
    auto [mean, se, cnt] = stat_at(off_p1 + p);
    SampledMoment sm{{pairs1[p].first, pairs1[p].second}, mean, se};
    if (mean > a1.sup_mean_sq) {
      a1.sup_mean_sq = mean;
      a1.sup_se = se;
    }
    a1.samples.push_back(std::move(sm));
  }
  rep.orders.push_back(std::move(a1));

  if (!samp2.empty()) {
    OrderAudit a2;
    a2.order = 2;
    std::size_t slot = 0;
    for (const auto& s : samp2)
      for (std::size_t tau : s.taus) {
        auto [mean, se, cnt] = stat_at(off_p2 + slot++);
        a2.paths_used = cnt;
        SampledMoment sm{{s.w, s.u, tau}, mean, se};
        if (mean > a2.sup_mean_sq) {
          a2.sup_mean_sq = mean;
          a2.sup_se = se;
        }
        a2.samples.push_back(std::move(sm));
      }
    rep.orders.push_back(std::move(a2));
  }
  if (!samp3.taus.empty()) {
    OrderAudit a3;
    a3.order = 3;
    std::size_t slot = 0;
    for (std::size_t tau : samp3.taus) {
      auto [mean, se, cnt] = stat_at(off_p3 + slot++);
      a3.paths_used = cnt;
      SampledMoment sm{{samp3.w, samp3.u, (samp3.w + samp3.u) / 2, tau}, mean, se};
      if (mean > a3.sup_mean_sq) {
        a3.sup_mean_sq = mean;
        a3.sup_se = se;
      }
      a3.samples.push_back(std::move(sm));
    }
    rep.orders.push_back(std::move(a3));
  }

  for (std::size_t bn = 1; bn <= m; ++bn) {
    BlockTermStat bs;
    bs.block = bn;
    bs.mean.resize(static_cast<Eigen::Index>(N));
    bs.se.resize(static_cast<Eigen::Index>(N));
    for (std::size_t c = 0; c < N; ++c) {
      auto [mean, se, cnt] = stat_at(off_z + (bn - 1) * N + c);
      bs.mean(static_cast<Eigen::Index>(c)) = mean;
      bs.se(static_cast<Eigen::Index>(c)) = se;
      if (se > 0.0) bs.max_abs_over_se = std::max(bs.max_abs_over_se, std::abs(mean) / se);
    }
    rep.block_terms.push_back(std::move(bs));
  }

  // crude bound: growth audit x coefficient bounds x singular-weight mass
  const ModelSpec& mdl = ctx.model();
  double S = 0.0;
  for (std::size_t mo = 0; mo < N; ++mo) {
    const auto gb = ctx.table().growth_bound(mo);
    S = std::max(S, gb.n_const * std::exp(std::max(gb.beta, 0.0) * mdl.horizon));
  }
  const double sqrt_pi = std::sqrt(M_PI);
  const double phi0 = mdl.phi.at(0.0).norm();
  const double T2H = std::pow(mdl.horizon, 2.0 * mdl.hurst);
  rep.bound_det = S * (phi0 + sqrt_pi * mdl.g->bound(0)) + sqrt_pi * mdl.g->bound(0) +
                  mdl.horizon * S * sqrt_pi * mdl.f->bound(0);
  rep.bound_noise_sq = S * S * M_PI * mdl.sigma->bound(0) * mdl.sigma->bound(0) * T2H;
  const double sup_d1 = rep.orders.empty() ? 0.0 : rep.orders.front().sup_mean_sq;
  rep.bound_deriv_sq =
      S * S * mdl.sigma->bound(1) * mdl.sigma->bound(1) * sup_d1 * T2H * T2H;
  rep.crude_bound = 2.0 * rep.bound_det * rep.bound_det +
                    2.0 * (rep.bound_noise_sq + rep.bound_deriv_sq);
  rep.bounded_ok = rep.sup_mean_sq <= 1.5 * rep.crude_bound;

  // first-half sups for the stability-under-doubling check
  const std::size_t half = n_paths / 2;
  if (half >= 2) {
    for (std::size_t k = 0; k <= n; ++k) {
      auto [mean, se, cnt] = stat_range(k, half);
      if (mean > rep.sup_mean_sq_half) {
        rep.sup_mean_sq_half = mean;
        rep.sup_se_half = se;
      }
    }
    for (const auto& audit : rep.orders) {
      double sup = 0.0, sup_se = 0.0;
      std::size_t base = 0;
      if (audit.order == 1) base = off_p1;
      else if (audit.order == 2) base = off_p2;
      else base = off_p3;
      for (std::size_t p = 0; p < audit.samples.size(); ++p) {
        auto [mean, se, cnt] = stat_range(base + p, half);
        if (mean > sup) {
          sup = mean;
          sup_se = se;
        }
      }
      rep.order_sup_half.push_back(sup);
      rep.order_sup_se_half.push_back(sup_se);
    }
  }
  return rep;
}

}  // namespace nsfide::solver
