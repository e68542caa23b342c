#include "nsfide/engine.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace nsfide::solver {

namespace {
constexpr double kSvdRelCutoff = 1e-13;
}

SolverContext::SolverContext(ModelSpec model) : model_(std::move(model)) {
  model_.validate_or_throw();
  n_ = model_.n_steps();
  L_ = model_.delay_cells();
  N_ = model_.n_modes;
  J_ = model_.n_points;
  m_eff_ = (n_ + L_ - 1) / L_;

  const TimeGrid grid = model_.time_grid();
  table_ = std::make_unique<resolvent::ResolventTable>(N_, model_.b, grid);
  transform_ = std::make_unique<spectral::SineTransform>(N_, spectral::SpaceGrid(J_));
  weights_ = std::make_unique<fbm::PhiCellWeights>(grid, model_.hurst_parameter());
  sampler_ = std::make_unique<fbm::CholeskyFbmSampler>(grid, model_.hurst_parameter());

  S_.resize(static_cast<Eigen::Index>(J_), static_cast<Eigen::Index>(N_));
  for (std::size_t j = 0; j < J_; ++j)
    for (std::size_t m = 0; m < N_; ++m)
      S_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)) =
          transform_->synthesis_matrix()[j * N_ + m];
  qw_ = transform_->quad_weight();

  has_gp_ = model_.g->bound(1) > 0.0;
  has_fp_ = model_.f->bound(1) > 0.0;
  has_sp_ = model_.sigma->bound(1) > 0.0;

  // Low-rank separation of the pin/argument weight window per interior block.
  if (model_.derivative_depth >= 2 && m_eff_ >= 3) {
    for (std::size_t bn = 2; bn <= m_eff_ - 1; ++bn) {
      const std::size_t pin0 = bn * L_ + 1;
      const std::size_t pin1 = std::min((bn + 1) * L_, n_);
      const std::size_t w_max = (bn - 1) * L_;  // arguments w < w_max
      if (pin1 < pin0 || w_max == 0) continue;
      Eigen::MatrixXd K(static_cast<Eigen::Index>(pin1 - pin0 + 1),
                        static_cast<Eigen::Index>(w_max));
      for (std::size_t p = pin0; p <= pin1; ++p)
        for (std::size_t w = 0; w < w_max; ++w)
          K(static_cast<Eigen::Index>(p - pin0), static_cast<Eigen::Index>(w)) =
              weights_->weight(p - w);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& sv = svd.singularValues();
      Eigen::Index rank = 1;
      for (Eigen::Index q = 1; q < sv.size(); ++q)
        if (sv(q) > kSvdRelCutoff * sv(0)) rank = q + 1;
      KappaLowRank lr;
      lr.pin0 = pin0;
      lr.g = svd.matrixU().leftCols(rank) * sv.head(rank).asDiagonal();
      lr.h = svd.matrixV().leftCols(rank);
      kappa_.push_back(std::move(lr));
    }
  }
}

const KappaLowRank& SolverContext::kappa(std::size_t bn) const {
  if (bn < 2 || bn - 2 >= kappa_.size())
    throw std::logic_error("no kappa factorization for block " + std::to_string(bn));
  return kappa_[bn - 2];
}

PathRun::PathRun(const SolverContext& ctx)
    : ctx_(&ctx), n_(ctx.n_steps()), L_(ctx.delay_cells()), N_(ctx.n_modes()),
      J_(ctx.n_points()), dt_(ctx.model().dt),
      path_{ctx.model().time_grid(), std::vector<double>(ctx.n_steps() + 1, 0.0), 0} {
  const auto ei = [](std::size_t v) { return static_cast<Eigen::Index>(v); };
  db_.resize(ei(n_));
  hist_coeff_.resize(ei(N_), ei(L_ + 1));
  hist_phys_.resize(ei(J_), ei(L_ + 1));
  x_.resize(ei(N_), ei(n_ + 1));
  xphys_.resize(ei(J_), ei(n_ + 1));
  sig_.resize(ei(N_), ei(n_ + 1));
  f0_.resize(ei(N_), ei(n_ + 1));
  g0_.resize(ei(N_), ei(n_ + 1));
  for (auto* m : {&sp1_, &sp2_, &sp3_, &sp4_, &fp1_, &fp2_, &fp3_, &gp1_, &gp2_, &gp3_,
                  &phitilde_})
    m->resize(ei(J_), ei(n_ + 1));
  htilde_.resize(ei(N_), ei(n_ + 1));
  xsrc_.resize(ei(N_), ei(n_ + 1));
  zsrc_.resize(ei(N_), ei(n_ + 1));
  c0_.resize(ei(N_));
  D_.resize(n_ + 1);
  Dphys_.resize(n_ >= L_ ? n_ - L_ + 1 : 1);
  ASig_.resize(n_ >= L_ ? n_ - L_ : 0);
  Asig_only_.resize(ASig_.size());
  if (n_ > L_) {
    Astart_.resize(ei(N_), ei(n_ - L_));
    astart_ready_.assign(n_ - L_, 0);
  }
  C_.resize(Dphys_.size());
  Cphys_.resize(Dphys_.size());
}

Eigen::VectorXd PathRun::analyze_vec(const Eigen::VectorXd& phys) const {
  return ctx_->quad_weight() * (ctx_->synth().transpose() * phys);
}

Eigen::VectorXd PathRun::delayed_phys(std::size_t j) const {
  if (j >= L_) return xphys_.col(static_cast<Eigen::Index>(j - L_));
  return hist_phys_.col(static_cast<Eigen::Index>(j));
}

spectral::SpectralField PathRun::x_field(std::size_t i) const {
  spectral::SpectralField out(N_);
  for (std::size_t m = 0; m < N_; ++m) out.coeffs[m] = x_(static_cast<Eigen::Index>(m),
                                                          static_cast<Eigen::Index>(i));
  return out;
}

void PathRun::start(std::uint64_t seed) { start(ctx_->sampler().sample(seed), seed); }

void PathRun::start(fbm::FbmSample path, std::uint64_t seed_label) {
  if (!path.grid.same_as(ctx_->model().time_grid()))
    throw std::invalid_argument("noise path grid does not match the model grid");
  path_ = std::move(path);
  path_.seed_label = seed_label;
  for (std::size_t j = 0; j < n_; ++j) db_(static_cast<Eigen::Index>(j)) = path_.increment(j);

  blocks_done_ = 0;
  bias_flags_.clear();

  const ModelSpec& mdl = ctx_->model();
  for (std::size_t k = 0; k <= L_; ++k) {
    const double t = -mdl.delay + static_cast<double>(k) * dt_;
    const double a = mdl.phi.alpha(t);
    for (std::size_t m = 0; m < N_; ++m)
      hist_coeff_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) =
          a * mdl.phi.field.coeffs[m];
  }
  hist_phys_.noalias() = ctx_->synth() * hist_coeff_;

  fill_caches(0, 0);
  c0_ = hist_coeff_.col(static_cast<Eigen::Index>(L_)) + g0_.col(0);
  x_.col(0) = c0_ - g0_.col(0);
  xphys_.col(0).noalias() = ctx_->synth() * x_.col(0);

  D_[0].resize(static_cast<Eigen::Index>(N_), 1);
  D_[0].col(0) = sig_.col(0);
  if (!Dphys_.empty()) {
    Dphys_[0].resize(static_cast<Eigen::Index>(J_), 1);
    Dphys_[0].noalias() = ctx_->synth() * D_[0];
  }
  if (n_ > L_) astart_ready_.assign(n_ - L_, 0);
}

void PathRun::fill_caches(std::size_t j_from, std::size_t j_to) {
  const ModelSpec& mdl = ctx_->model();
  const bool gp = ctx_->has_g_prime(), fp = ctx_->has_f_prime(), sp = ctx_->has_sigma_prime();
  Eigen::VectorXd work(static_cast<Eigen::Index>(J_));
  for (std::size_t j = j_from; j <= j_to; ++j) {
    const Eigen::Index jc = static_cast<Eigen::Index>(j);
    const Eigen::VectorXd ph = delayed_phys(j);
    for (std::size_t y = 0; y < J_; ++y) {
      const double v = ph(static_cast<Eigen::Index>(y));
      const Eigen::Index yc = static_cast<Eigen::Index>(y);
      work(yc) = mdl.sigma->eval(0, v);
      sp1_(yc, jc) = sp ? mdl.sigma->eval(1, v) : 0.0;
      sp2_(yc, jc) = sp ? mdl.sigma->eval(2, v) : 0.0;
      sp3_(yc, jc) = sp ? mdl.sigma->eval(3, v) : 0.0;
      sp4_(yc, jc) = sp ? mdl.sigma->eval(4, v) : 0.0;
      fp1_(yc, jc) = fp ? mdl.f->eval(1, v) : 0.0;
      fp2_(yc, jc) = fp ? mdl.f->eval(2, v) : 0.0;
      fp3_(yc, jc) = fp ? mdl.f->eval(3, v) : 0.0;
      gp1_(yc, jc) = gp ? mdl.g->eval(1, v) : 0.0;
      gp2_(yc, jc) = gp ? mdl.g->eval(2, v) : 0.0;
      gp3_(yc, jc) = gp ? mdl.g->eval(3, v) : 0.0;
    }
    sig_.col(jc) = analyze_vec(work);
    for (std::size_t y = 0; y < J_; ++y)
      work(static_cast<Eigen::Index>(y)) = mdl.f->eval(0, ph(static_cast<Eigen::Index>(y)));
    f0_.col(jc) = analyze_vec(work);
    for (std::size_t y = 0; y < J_; ++y)
      work(static_cast<Eigen::Index>(y)) = mdl.g->eval(0, ph(static_cast<Eigen::Index>(y)));
    g0_.col(jc) = analyze_vec(work);

    // phi-weighted contraction of the derivative surface at the delayed slot
    if (j > L_ && sp) {
      const std::size_t arg = j - L_;
      const Eigen::MatrixXd& Dp = Dphys_[arg];
      Eigen::VectorXd w(static_cast<Eigen::Index>(arg));
      for (std::size_t p = 0; p < arg; ++p)
        w(static_cast<Eigen::Index>(p)) = ctx_->phi_weights().weight(j - p);
      phitilde_.col(jc).noalias() = Dp.leftCols(static_cast<Eigen::Index>(arg)) * w;
      htilde_.col(jc) = analyze_vec(sp1_.col(jc).cwiseProduct(phitilde_.col(jc)));
    } else {
      phitilde_.col(jc).setZero();
      htilde_.col(jc).setZero();
    }
    zsrc_.col(jc) = (j < n_ ? db_(jc) : 0.0) * sig_.col(jc) - htilde_.col(jc);
    xsrc_.col(jc) = dt_ * f0_.col(jc) + zsrc_.col(jc);
  }
}

void PathRun::assemble_x(std::size_t i_from, std::size_t i_to) {
  Eigen::VectorXd acc(static_cast<Eigen::Index>(N_));
  for (std::size_t i = i_from; i <= i_to; ++i) {
    const Eigen::Index ic = static_cast<Eigen::Index>(i);
    acc = ctx_->rvec(i).cwiseProduct(c0_) - g0_.col(ic);
    if (i > 0) {
      acc += 0.5 * dt_ * (f0_.col(ic) - ctx_->rvec(i).cwiseProduct(f0_.col(0)));
      for (std::size_t j = 0; j < i; ++j)
        acc += ctx_->rvec(i - j).cwiseProduct(xsrc_.col(static_cast<Eigen::Index>(j)));
    }
    x_.col(ic) = acc;
    xphys_.col(ic).noalias() = ctx_->synth() * x_.col(ic);
  }
}

void PathRun::extend_d1(std::size_t tau_from, std::size_t tau_to) {
  const bool any_recursion = ctx_->has_g_prime() || ctx_->has_f_prime() ||
                             ctx_->has_sigma_prime();
  for (std::size_t tau = tau_from; tau <= tau_to; ++tau) {
    Eigen::MatrixXd& D = D_[tau];
    D.resize(static_cast<Eigen::Index>(N_), static_cast<Eigen::Index>(tau + 1));
    for (std::size_t u = 0; u <= tau; ++u)
      D.col(static_cast<Eigen::Index>(u)) =
          ctx_->rvec(tau - u).cwiseProduct(sig_.col(static_cast<Eigen::Index>(u)));

    if (tau > L_ && any_recursion) {
      const std::size_t kk = tau - L_;  // recursion columns u = 0..kk-1
      const Eigen::Index kkc = static_cast<Eigen::Index>(kk);
      const Eigen::Index tc = static_cast<Eigen::Index>(tau);
      // combined end terms: -g'(x(t-r)) D_u x(t-r) and the trapezoid end node
      Eigen::VectorXd mult = 0.5 * dt_ * fp1_.col(tc) - gp1_.col(tc);
      D.leftCols(kkc) += ctx_->quad_weight() *
                         (ctx_->synth().transpose() *
                          (mult.asDiagonal() * Dphys_[kk].leftCols(kkc)));
      // trapezoid start node corrections
      if (ctx_->has_f_prime()) {
        for (std::size_t u = 0; u < kk; ++u) {
          if (!astart_ready_[u]) {
            Astart_.col(static_cast<Eigen::Index>(u)) = analyze_vec(
                fp1_.col(static_cast<Eigen::Index>(u + L_))
                    .cwiseProduct(Dphys_[u].col(static_cast<Eigen::Index>(u))));
            astart_ready_[u] = 1;
          }
          D.col(static_cast<Eigen::Index>(u)) -=
              0.5 * dt_ *
              ctx_->rvec(tau - u - L_).cwiseProduct(Astart_.col(static_cast<Eigen::Index>(u)));
        }
      }
      // fused forward sums: f' rectangle part, sigma' noise part, corrections
      for (std::size_t s = L_; s < tau; ++s) {
        const Eigen::MatrixXd& A = ASig_[s - L_];
        D.leftCols(A.cols()) += ctx_->rvec(tau - s).asDiagonal() * A;
      }
    }
    if (tau < Dphys_.size()) {
      Dphys_[tau].resize(static_cast<Eigen::Index>(J_), static_cast<Eigen::Index>(tau + 1));
      Dphys_[tau].noalias() = ctx_->synth() * D;
    }
  }
}

void PathRun::extend_c(std::size_t bn) {
  const std::size_t lo = ctx_->block_begin(bn);  // exclusive
  const std::size_t hi = ctx_->block_end(bn);
  const KappaLowRank& lr = ctx_->kappa(bn);
  const std::size_t Q = lr.rank();
  const std::size_t arg_max = (bn - 1) * L_;  // w arguments < arg_max
  const Eigen::Index Nc = static_cast<Eigen::Index>(N_);
  if (bn >= 3) {
    // second-order data referencing earlier nonzero second-order values is
    // not maintained at depth 2; those contributions are dropped.
    bias_flags_.insert({bn, 2});
    bias_flags_.insert({bn + 1, 1});
  }

  // Lambda contractions per argument: J x Q
  std::vector<Eigen::MatrixXd> lam(arg_max + 1);
  for (std::size_t a = 1; a <= arg_max; ++a) {
    Eigen::MatrixXd hw = lr.h.topRows(static_cast<Eigen::Index>(a));
    lam[a].resize(static_cast<Eigen::Index>(J_), static_cast<Eigen::Index>(Q));
    lam[a].noalias() = Dphys_[a].leftCols(static_cast<Eigen::Index>(a)) * hw;
  }

  // A3 fields per (s'', q): N x (s''-L+1)
  const std::size_t s_lo = L_ + 1, s_hi = hi - 1;
  std::vector<std::vector<Eigen::MatrixXd>> A3(s_hi >= s_lo ? s_hi - s_lo + 1 : 0);
  for (std::size_t s = s_lo; s <= s_hi; ++s) {
    const std::size_t arg = s - L_;
    if (arg == 0 || arg > arg_max) continue;
    const Eigen::Index sc = static_cast<Eigen::Index>(s);
    Eigen::VectorXd V = dt_ * fp2_.col(sc) + db_(sc) * sp2_.col(sc) -
                        sp3_.col(sc).cwiseProduct(phitilde_.col(sc));
    auto& row = A3[s - s_lo];
    row.resize(Q);
    for (std::size_t q = 0; q < Q; ++q) {
      Eigen::VectorXd m = V.cwiseProduct(lam[arg].col(static_cast<Eigen::Index>(q)));
      row[q].resize(Nc, static_cast<Eigen::Index>(arg + 1));
      row[q].noalias() = ctx_->quad_weight() *
                         (ctx_->synth().transpose() *
                          (m.asDiagonal() * Dphys_[arg].leftCols(static_cast<Eigen::Index>(arg + 1))));
    }
  }

  for (std::size_t tau = lo + 1; tau <= hi; ++tau) {
    const Eigen::Index tc = static_cast<Eigen::Index>(tau);
    Eigen::MatrixXd& C = C_[tau];
    C.resize(Nc, tc + 1);
    C.setZero();
    const std::size_t pin = tau + L_;
    const Eigen::VectorXd gv = lr.g.row(static_cast<Eigen::Index>(pin - lr.pin0)).transpose();

    // integral / noise / correction chains
    for (std::size_t s = s_lo; s <= std::min(tau - 1, s_hi); ++s) {
      const std::size_t arg = s - L_;
      if (arg == 0 || arg > arg_max) continue;
      const auto& row = A3[s - s_lo];
      const auto rw = ctx_->rvec(tau - s);
      for (std::size_t q = 0; q < Q; ++q) {
        const double gq = gv(static_cast<Eigen::Index>(q));
        C.leftCols(row[q].cols()) += gq * (rw.asDiagonal() * row[q]);
      }
    }

    // point terms
    if (tau > L_ && ctx_->has_g_prime()) {
      const std::size_t arg = tau - L_;
      if (arg >= 1 && arg <= arg_max) {
        Eigen::VectorXd lphys = lam[arg] * gv;
        Eigen::VectorXd m = gp2_.col(tc).cwiseProduct(lphys);
        C.leftCols(static_cast<Eigen::Index>(arg)) -=
            ctx_->quad_weight() *
            (ctx_->synth().transpose() *
             (m.asDiagonal() * Dphys_[arg].leftCols(static_cast<Eigen::Index>(arg))));
      }
    }
    if (ctx_->has_sigma_prime()) {
      for (std::size_t u = L_ + 1; u <= tau; ++u) {
        const std::size_t arg = u - L_;
        if (arg > arg_max) break;
        Eigen::VectorXd lphys = lam[arg] * gv;
        C.col(static_cast<Eigen::Index>(u)) += ctx_->rvec(tau - u).cwiseProduct(
            analyze_vec(sp1_.col(static_cast<Eigen::Index>(u)).cwiseProduct(lphys)));
      }
      // resolvent-in-w boundary chain
      for (std::size_t j = L_ + 1; j + 1 <= tau; ++j) {
        const std::size_t k = j - L_;
        if (k >= Asig_only_.size() || Asig_only_[k].size() == 0) continue;
        const double wj = ctx_->phi_weights().weight(pin - j);
        const auto rw = ctx_->rvec(tau - j);
        // columns u < j - L
        const Eigen::Index umax = static_cast<Eigen::Index>(k);
        C.leftCols(umax) += wj * (rw.asDiagonal() * Asig_only_[k].leftCols(umax));
      }
    }
    Cphys_[tau].resize(static_cast<Eigen::Index>(J_), tc + 1);
    Cphys_[tau].noalias() = ctx_->synth() * C;
  }
}

void PathRun::solve_block() {
  if (finished()) throw std::logic_error("horizon reached: all blocks solved");
  const std::size_t bn = blocks_done_ + 1;
  const std::size_t lo = ctx_->block_begin(bn);  // exclusive
  const std::size_t hi = ctx_->block_end(bn);
  const int K = ctx_->model().derivative_depth;

  fill_caches(lo + 1, hi);
  assemble_x(lo + 1, hi);

  // fused per-cell fields consumed by the derivative recursion
  const bool build_asig = ctx_->has_sigma_prime() || ctx_->has_f_prime();
  if (build_asig) {
    const std::size_t s_hi = std::min(hi, n_ - 1);
    for (std::size_t s = std::max(lo + 1, L_); s <= s_hi; ++s) {
      const std::size_t k = s - L_;
      const Eigen::Index sc = static_cast<Eigen::Index>(s);
      const Eigen::Index cols = static_cast<Eigen::Index>(k + 1);
      Eigen::VectorXd m1 = dt_ * fp1_.col(sc) + db_(sc) * sp1_.col(sc) -
                           sp2_.col(sc).cwiseProduct(phitilde_.col(sc));
      Eigen::MatrixXd phys = m1.asDiagonal() * Dphys_[k].leftCols(cols);
      if (Cphys_[k].size() != 0)
        phys -= sp1_.col(sc).asDiagonal() * Cphys_[k].leftCols(cols);
      ASig_[k].resize(static_cast<Eigen::Index>(N_), cols);
      ASig_[k].noalias() = ctx_->quad_weight() * (ctx_->synth().transpose() * phys);
      // sigma'-only fields feed the second-order boundary chain
      const std::size_t asig_k_max = ctx_->block_count() >= 3 && K >= 2
                                         ? (ctx_->block_count() - 2) * L_
                                         : 0;
      if (ctx_->has_sigma_prime() && k >= 1 && k <= asig_k_max) {
        Asig_only_[k].resize(static_cast<Eigen::Index>(N_), cols);
        Asig_only_[k].noalias() =
            ctx_->quad_weight() *
            (ctx_->synth().transpose() * (sp1_.col(sc).asDiagonal() * Dphys_[k].leftCols(cols)));
      }
    }
  }

  extend_d1(lo + 1, hi);

  if (K >= 2 && bn >= 2 && bn + 1 <= ctx_->block_count()) extend_c(bn);
  if (K == 1 && bn >= 2 && bn + 1 <= ctx_->block_count() && ctx_->has_sigma_prime())
    bias_flags_.insert({bn + 1, 1});

  blocks_done_ = bn;
}

void PathRun::solve_all() {
  while (!finished()) solve_block();
}

Eigen::VectorXd PathRun::skorohod_window_term(std::size_t t_index, std::size_t j_from,
                                              std::size_t j_to) const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N_));
  for (std::size_t j = j_from; j < j_to && j < t_index; ++j)
    acc += ctx_->rvec(t_index - j).cwiseProduct(zsrc_.col(static_cast<Eigen::Index>(j)));
  return acc;
}

Eigen::VectorXd PathRun::skorohod_block_term(std::size_t bn) const {
  return skorohod_window_term(n_, ctx_->block_begin(bn), ctx_->block_end(bn));
}

Eigen::MatrixXd PathRun::second_derivative_march(std::size_t w, std::size_t u) {
  if (w > u) std::swap(w, u);  // symmetric; keep w <= u
  const Eigen::Index Nc = static_cast<Eigen::Index>(N_);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Nc, static_cast<Eigen::Index>(n_ + 1));
  if (u > n_) throw std::invalid_argument("march point beyond horizon");
  Eigen::MatrixXd d2phys = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(J_),
                                                 static_cast<Eigen::Index>(n_ + 1));
  std::vector<Eigen::VectorXd> a2m(n_, Eigen::VectorXd());
  const auto S = ctx_->synth();

  auto dcol = [&](std::size_t arg, std::size_t v) -> Eigen::VectorXd {
    // physical column of D_v x(t_arg); zero when v exceeds the simplex
    if (arg >= Dphys_.size() || v > arg) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(J_));
    return Dphys_[arg].col(static_cast<Eigen::Index>(v));
  };
  auto ccol = [&](std::size_t arg, std::size_t v) -> Eigen::VectorXd {
    if (arg >= Cphys_.size() || Cphys_[arg].size() == 0 || v > arg)
      return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(J_));
    return Cphys_[arg].col(static_cast<Eigen::Index>(v));
  };

  const std::size_t tau0 = std::max(u, L_ + 1);  // zero before both
  for (std::size_t tau = tau0; tau <= n_; ++tau) {
    const Eigen::Index tc = static_cast<Eigen::Index>(tau);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(Nc);

    // boundary slots of the two point terms
    if (u >= L_ + 1 && w <= u - L_)
      acc += ctx_->rvec(tau - u).cwiseProduct(analyze_vec(
          sp1_.col(static_cast<Eigen::Index>(u)).cwiseProduct(dcol(u - L_, w))));
    if (w >= L_ + 1 && u <= w - L_)
      acc += ctx_->rvec(tau - w).cwiseProduct(analyze_vec(
          sp1_.col(static_cast<Eigen::Index>(w)).cwiseProduct(dcol(w - L_, u))));

    if (tau > L_) {
      const std::size_t arg = tau - L_;
      // neutral-term chain
      if (ctx_->has_g_prime()) {
        Eigen::VectorXd gterm = gp1_.col(tc).cwiseProduct(d2phys.col(static_cast<Eigen::Index>(arg)));
        if (w < arg && u < arg)
          gterm += gp2_.col(tc).cwiseProduct(dcol(arg, w)).cwiseProduct(dcol(arg, u));
        acc -= analyze_vec(gterm);
      }
      // forward sums
      const std::size_t s_start = std::max(u, w) + L_;
      for (std::size_t s = s_start; s < tau; ++s) {
        if (a2m[s].size() == 0) {
          const Eigen::Index sc = static_cast<Eigen::Index>(s);
          const std::size_t sa = s - L_;
          Eigen::VectorXd dw = dcol(sa, w), du = dcol(sa, u);
          Eigen::VectorXd v = (dt_ * fp2_.col(sc) + db_(sc) * sp2_.col(sc) -
                               sp3_.col(sc).cwiseProduct(phitilde_.col(sc)))
                                  .cwiseProduct(dw)
                                  .cwiseProduct(du);
          v += (dt_ * fp1_.col(sc) + db_(sc) * sp1_.col(sc))
                   .cwiseProduct(d2phys.col(static_cast<Eigen::Index>(sa)));
          v -= sp2_.col(sc).cwiseProduct(ccol(sa, w).cwiseProduct(du) + dw.cwiseProduct(ccol(sa, u)) +
                                         phitilde_.col(sc).cwiseProduct(
                                             d2phys.col(static_cast<Eigen::Index>(sa))));
          if (sa > L_ && ctx_->model().sigma->bound(1) > 0.0)
            bias_flags_.insert({1 + (tau - 1) / L_, 2});  // third-order closure unavailable
          a2m[s] = analyze_vec(v);
        }
        acc += ctx_->rvec(tau - s).cwiseProduct(a2m[s]);
      }
    }
    out.col(tc) = acc;
    d2phys.col(tc).noalias() = S * acc;
  }
  return out;
}

Eigen::MatrixXd PathRun::third_derivative_march(std::size_t p, std::size_t w, std::size_t u) {
  // order by size: p <= w <= u
  std::size_t a[3] = {p, w, u};
  std::sort(a, a + 3);
  p = a[0];
  w = a[1];
  u = a[2];
  const Eigen::Index Nc = static_cast<Eigen::Index>(N_);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Nc, static_cast<Eigen::Index>(n_ + 1));

  Eigen::MatrixXd m_pw = second_derivative_march(p, w);
  Eigen::MatrixXd m_pu = second_derivative_march(p, u);
  Eigen::MatrixXd m_wu = second_derivative_march(w, u);
  const auto S = ctx_->synth();
  Eigen::MatrixXd pw_phys = S * m_pw, pu_phys = S * m_pu, wu_phys = S * m_wu;
  Eigen::MatrixXd d3phys = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(J_),
                                                 static_cast<Eigen::Index>(n_ + 1));
  std::vector<Eigen::VectorXd> a3m(n_, Eigen::VectorXd());

  auto dcol = [&](std::size_t arg, std::size_t v) -> Eigen::VectorXd {
    if (arg >= Dphys_.size() || v > arg) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(J_));
    return Dphys_[arg].col(static_cast<Eigen::Index>(v));
  };

  auto boundary = [&](std::size_t at, std::size_t v1, std::size_t v2) -> Eigen::VectorXd {
    // D_{v1} D_{v2} applied to sigma(x(at - r)) in physical space
    const Eigen::Index ac = static_cast<Eigen::Index>(at);
    if (at < L_ + 1) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(J_));
    const std::size_t arg = at - L_;
    Eigen::VectorXd term = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(J_));
    if (v1 <= arg && v2 <= arg)
      term += sp2_.col(ac).cwiseProduct(dcol(arg, v1)).cwiseProduct(dcol(arg, v2));
    const Eigen::MatrixXd& m2 = (v1 == p && v2 == w) || (v1 == w && v2 == p)
                                    ? pw_phys
                                    : ((v1 == p && v2 == u) || (v1 == u && v2 == p) ? pu_phys
                                                                                    : wu_phys);
    term += sp1_.col(ac).cwiseProduct(m2.col(static_cast<Eigen::Index>(arg)));
    return term;
  };

  const std::size_t tau0 = std::max(u, L_ + 1);
  for (std::size_t tau = tau0; tau <= n_; ++tau) {
    const Eigen::Index tc = static_cast<Eigen::Index>(tau);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(Nc);
    // point slots
    if (u >= L_ + 1) acc += ctx_->rvec(tau - u).cwiseProduct(analyze_vec(boundary(u, p, w)));
    if (w >= L_ + 1) acc += ctx_->rvec(tau - w).cwiseProduct(analyze_vec(boundary(w, p, u)));
    if (p >= L_ + 1) acc += ctx_->rvec(tau - p).cwiseProduct(analyze_vec(boundary(p, w, u)));

    if (tau > L_) {
      const std::size_t arg = tau - L_;
      if (ctx_->has_g_prime()) {
        Eigen::VectorXd gt = gp1_.col(tc).cwiseProduct(d3phys.col(static_cast<Eigen::Index>(arg)));
        Eigen::VectorXd s2 = dcol(arg, p).cwiseProduct(wu_phys.col(static_cast<Eigen::Index>(arg))) +
                             dcol(arg, w).cwiseProduct(pu_phys.col(static_cast<Eigen::Index>(arg))) +
                             dcol(arg, u).cwiseProduct(pw_phys.col(static_cast<Eigen::Index>(arg)));
        gt += gp2_.col(tc).cwiseProduct(s2);
        if (p < arg && w < arg && u < arg)
          gt += gp3_.col(tc)
                    .cwiseProduct(dcol(arg, p))
                    .cwiseProduct(dcol(arg, w))
                    .cwiseProduct(dcol(arg, u));
        acc -= analyze_vec(gt);
      }
      const std::size_t s_start = u + L_;
      for (std::size_t s = s_start; s < tau; ++s) {
        if (a3m[s].size() == 0) {
          const Eigen::Index sc = static_cast<Eigen::Index>(s);
          const std::size_t sa = s - L_;
          const Eigen::Index sac = static_cast<Eigen::Index>(sa);
          Eigen::VectorXd dp = dcol(sa, p), dw = dcol(sa, w), du = dcol(sa, u);
          Eigen::VectorXd s2 = dp.cwiseProduct(wu_phys.col(sac)) + dw.cwiseProduct(pu_phys.col(sac)) +
                               du.cwiseProduct(pw_phys.col(sac));
          Eigen::VectorXd v = (dt_ * fp3_.col(sc) + db_(sc) * sp3_.col(sc) -
                               sp4_.col(sc).cwiseProduct(phitilde_.col(sc)))
                                  .cwiseProduct(dp)
                                  .cwiseProduct(dw)
                                  .cwiseProduct(du);
          v += (dt_ * fp2_.col(sc) + db_(sc) * sp2_.col(sc) -
                sp3_.col(sc).cwiseProduct(phitilde_.col(sc)))
                   .cwiseProduct(s2);
          v += (dt_ * fp1_.col(sc) + db_(sc) * sp1_.col(sc))
                   .cwiseProduct(d3phys.col(sac));
          v -= sp2_.col(sc).cwiseProduct(phitilde_.col(sc)).cwiseProduct(d3phys.col(sac));
          if (sa > L_ && ctx_->model().sigma->bound(1) > 0.0)
            bias_flags_.insert({1 + (tau - 1) / L_, 3});
          a3m[s] = analyze_vec(v);
        }
        acc += ctx_->rvec(tau - s).cwiseProduct(a3m[s]);
      }
    }
    out.col(tc) = acc;
    d3phys.col(tc).noalias() = S * acc;
  }
  return out;
}

}  // namespace nsfide::solver
