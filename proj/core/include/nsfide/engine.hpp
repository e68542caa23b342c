#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "nsfide/fbm.hpp"
#include "nsfide/model.hpp"
#include "nsfide/resolvent.hpp"
#include "nsfide/spectral.hpp"

namespace nsfide::solver {

/// Low-rank factorization W_{pin-w} ~= sum_q g(pin,q) h(w,q) of the singular
/// weight's cell integrals over the large-lag window consumed by the
/// second-order contraction of one block. Rank is chosen so the truncated
/// SVD reproduces the weights to ~1e-13 relative.
struct KappaLowRank {
  std::size_t pin0 = 0;     // first pin index
  Eigen::MatrixXd g;        // n_pins x rank
  Eigen::MatrixXd h;        // n_args(=w range) x rank
  std::size_t rank() const { return static_cast<std::size_t>(g.cols()); }
};

/// Immutable per-model context shared by all path simulations: resolvent
/// table, transform matrices, weight tables, exact fBm sampler.
class SolverContext {
 public:
  explicit SolverContext(ModelSpec model);

  const ModelSpec& model() const { return model_; }
  const resolvent::ResolventTable& table() const { return *table_; }
  const spectral::SineTransform& transform() const { return *transform_; }
  const fbm::PhiCellWeights& phi_weights() const { return *weights_; }
  const fbm::CholeskyFbmSampler& sampler() const { return *sampler_; }

  std::size_t n_steps() const { return n_; }          // cells on [0,T]
  std::size_t delay_cells() const { return L_; }
  std::size_t n_modes() const { return N_; }
  std::size_t n_points() const { return J_; }
  std::size_t block_count() const { return m_eff_; }  // ceil(n/L)
  std::size_t block_begin(std::size_t bn) const { return (bn - 1) * L_; }  // exclusive start
  std::size_t block_end(std::size_t bn) const { return std::min(bn * L_, n_); }

  const Eigen::MatrixXd& synth() const { return S_; }           // J x N
  double quad_weight() const { return qw_; }
  /// Resolvent column r_.(t_k) as an Eigen view.
  Eigen::Map<const Eigen::VectorXd> rvec(std::size_t k) const {
    return Eigen::Map<const Eigen::VectorXd>(table_->at_time(k), static_cast<Eigen::Index>(N_));
  }
  const KappaLowRank& kappa(std::size_t bn) const;  // bn in [2, m_eff-1]

  bool has_g_prime() const { return has_gp_; }
  bool has_f_prime() const { return has_fp_; }
  bool has_sigma_prime() const { return has_sp_; }

 private:
  ModelSpec model_;
  std::size_t n_, L_, N_, J_, m_eff_;
  std::unique_ptr<resolvent::ResolventTable> table_;
  std::unique_ptr<spectral::SineTransform> transform_;
  std::unique_ptr<fbm::PhiCellWeights> weights_;
  std::unique_ptr<fbm::CholeskyFbmSampler> sampler_;
  Eigen::MatrixXd S_;
  double qw_;
  std::vector<KappaLowRank> kappa_;  // indexed bn-2
  bool has_gp_, has_fp_, has_sp_;
};

/// One path simulation: block-by-block construction of the state x together
/// with the first-derivative surface D_u x(t) and, from depth K >= 2, the
/// pin-contracted second-derivative data consumed by the next block's
/// corrections. All storage is owned and reusable across paths.
class PathRun {
 public:
  explicit PathRun(const SolverContext& ctx);

  void start(std::uint64_t seed);
  void start(fbm::FbmSample path, std::uint64_t seed_label);

  std::size_t blocks_done() const { return blocks_done_; }
  bool finished() const { return blocks_done_ >= ctx_->block_count(); }
  void solve_block();  // advance one block
  void solve_all();

  // -- state access ---------------------------------------------------------
  const Eigen::MatrixXd& x() const { return x_; }                 // N x (n+1)
  Eigen::VectorXd x_col(std::size_t i) const { return x_.col(static_cast<Eigen::Index>(i)); }
  spectral::SpectralField x_field(std::size_t i) const;
  const Eigen::MatrixXd& history() const { return hist_coeff_; }  // N x (L+1)

  /// First-derivative surface at state time tau: N x (tau+1); column u holds
  /// D_u x(t_tau), the diagonal column the right-limit value sigma(x(u-r)).
  const Eigen::MatrixXd& d1(std::size_t tau) const { return D_[tau]; }

  /// Pin-contracted second derivative sum_w W(tau+L, w) D2_{w,u} x(tau);
  /// N x (tau+1), zero matrix where not maintained.
  const Eigen::MatrixXd& d2_contracted(std::size_t tau) const { return C_[tau]; }

  /// On-demand second-derivative march for a fixed pair (w,u): values of
  /// D2_{w,u} x(t_tau) for all tau, exact where order-3 closure data is zero,
  /// pathwise-corrected (and flagged) beyond.
  Eigen::MatrixXd second_derivative_march(std::size_t w, std::size_t u);

  /// Third-derivative march for a fixed triple, rooted at the vanishing of
  /// orders >= 2 on the first block.
  Eigen::MatrixXd third_derivative_march(std::size_t p, std::size_t w, std::size_t u);

  /// Skorohod term of block bn evaluated in x(T): pathwise minus trace over
  /// the block's cells with weights r(T - s).
  Eigen::VectorXd skorohod_block_term(std::size_t bn) const;
  /// Same split at an arbitrary grid time index.
  Eigen::VectorXd skorohod_window_term(std::size_t t_index, std::size_t j_from,
                                       std::size_t j_to) const;

  const std::set<std::pair<std::size_t, int>>& bias_flags() const { return bias_flags_; }
  const fbm::FbmSample& noise() const { return path_; }

  const SolverContext& context() const { return *ctx_; }

  /// Physical-space state at the delayed argument t_j - r (collocation values).
  Eigen::VectorXd delayed_phys(std::size_t j) const;

  /// Coefficients of sigma(x(t_j - r)).
  Eigen::VectorXd sigma_coeff(std::size_t j) const { return sig_.col(static_cast<Eigen::Index>(j)); }
  /// Coefficients of f(x(t_j - r)) and g(x(t_j - r)).
  Eigen::VectorXd f_coeff(std::size_t j) const { return f0_.col(static_cast<Eigen::Index>(j)); }
  Eigen::VectorXd g_coeff(std::size_t j) const { return g0_.col(static_cast<Eigen::Index>(j)); }

 private:
  void fill_caches(std::size_t j_from, std::size_t j_to);   // per-grid-index caches
  void assemble_x(std::size_t i_from, std::size_t i_to);
  void extend_d1(std::size_t tau_from, std::size_t tau_to);
  void extend_c(std::size_t bn);
  Eigen::VectorXd analyze_vec(const Eigen::VectorXd& phys) const;

  const SolverContext* ctx_;
  std::size_t n_, L_, N_, J_;
  double dt_;

  fbm::FbmSample path_;
  Eigen::VectorXd db_;          // increments, n

  Eigen::MatrixXd hist_coeff_;  // N x (L+1)
  Eigen::MatrixXd hist_phys_;   // J x (L+1)
  Eigen::MatrixXd x_;           // N x (n+1)
  Eigen::MatrixXd xphys_;       // J x (n+1)

  // caches along the grid (column j = quantities at delayed argument t_j - r)
  Eigen::MatrixXd sig_, f0_, g0_;                    // N x (n+1)
  Eigen::MatrixXd sp1_, sp2_, sp3_, sp4_;            // J x (n+1)
  Eigen::MatrixXd fp1_, fp2_, fp3_;                  // J x (n+1)
  Eigen::MatrixXd gp1_, gp2_, gp3_;                  // J x (n+1)
  Eigen::MatrixXd phitilde_;                         // J x (n+1)
  Eigen::MatrixXd htilde_;                           // N x (n+1)
  Eigen::MatrixXd xsrc_, zsrc_;                      // N x (n+1) fused summands
  Eigen::VectorXd c0_;                               // N

  std::vector<Eigen::MatrixXd> D_;       // tau -> N x (tau+1)
  std::vector<Eigen::MatrixXd> Dphys_;   // tau <= n-L -> J x (tau+1)
  std::vector<Eigen::MatrixXd> ASig_;    // s'-L -> N x (s'-L+1), fused weights
  std::vector<Eigen::MatrixXd> Asig_only_;  // s'-L -> N x (s'-L+1), sigma' only
  Eigen::MatrixXd Astart_;               // N x (n-L) trapezoid start corrections
  std::vector<char> astart_ready_;
  std::vector<Eigen::MatrixXd> C_;       // tau -> N x (tau+1)
  std::vector<Eigen::MatrixXd> Cphys_;   // tau -> J x (tau+1)

  std::size_t blocks_done_ = 0;
  std::set<std::pair<std::size_t, int>> bias_flags_;
};

}  // namespace nsfide::solver
