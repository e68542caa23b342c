#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nsfide/engine.hpp"

namespace nsfide::density {

/// Gradient field of the scalar functional F at a state:
///   linear(v):          F'(x) = v (constant)
///   norm:               F = ||.||, F'(x) = x/||x|| (undefined near 0)
///   norm_unnormalized:  the raw pairing <x, .> (the norm example without
///                       the 1/||x|| factor; both forms are reported)
class FunctionalF {
 public:
  enum class Kind { Linear, Norm, NormUnnormalized };

  static FunctionalF linear(Eigen::VectorXd v) { return FunctionalF(Kind::Linear, std::move(v)); }
  static FunctionalF norm() { return FunctionalF(Kind::Norm, {}); }
  static FunctionalF norm_unnormalized() { return FunctionalF(Kind::NormUnnormalized, {}); }

  Kind kind() const { return kind_; }

  /// Gradient vector at x; degenerate = true when F = ||.|| and ||x|| is
  /// numerically zero.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x, bool& degenerate) const;

 private:
  FunctionalF(Kind k, Eigen::VectorXd v) : kind_(k), v_(std::move(v)) {}
  Kind kind_;
  Eigen::VectorXd v_;
};

/// R(t-u) sigma(x(u-r)) for t - r < u < t (argument error outside).
Eigen::VectorXd last_interval_derivative(const solver::PathRun& run, std::size_t u_idx,
                                         std::size_t t_idx);

/// Trapezoidal value of int_{t-r}^t ( F'(x(t)) [ R(t-u) sigma(x(u-r)) ] )^2 du.
double density_criterion(const solver::PathRun& run, std::size_t t_idx, const FunctionalF& f,
                         bool& degenerate);

/// Same integrand extended over (0, t] with the stored derivative surface.
double density_criterion_extended(const solver::PathRun& run, std::size_t t_idx,
                                  const FunctionalF& f, bool& degenerate);

struct CriterionReport {
  double t = 0.0;
  double epsilon = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> values;     // NaN for degenerate-gradient paths
  double fraction_positive = 0.0; // fraction of paths with value > epsilon
  double min_value = 0.0;         // over non-degenerate paths
  double q25 = 0.0, q50 = 0.0, q75 = 0.0;
  std::size_t degenerate_count = 0;
};

CriterionReport criterion_statistics(const solver::SolverContext& ctx, std::size_t t_idx,
                                     std::size_t n_paths, double epsilon, const FunctionalF& f,
                                     std::uint64_t base_seed, unsigned threads = 1);

}  // namespace nsfide::density
