#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "nsfide/engine.hpp"

namespace nsfide::solver {

std::unique_ptr<PathRun> solve_path(const SolverContext& ctx, std::uint64_t seed);

struct SampledMoment {
  std::vector<std::size_t> point;  // (u..., t) grid indices
  double mean_sq = 0.0;
  double se = 0.0;
};

struct OrderAudit {
  int order = 0;
  std::size_t paths_used = 0;
  std::vector<SampledMoment> samples;
  double sup_mean_sq = 0.0;
  double sup_se = 0.0;
};

struct BlockTermStat {
  std::size_t block = 0;
  Eigen::VectorXd mean;  // per mode
  Eigen::VectorXd se;
  double max_abs_over_se = 0.0;
};

struct MomentsReport {
  std::vector<double> t;
  std::vector<double> mean_sq_norm;  // E ||x(t)||^2
  std::vector<double> se;
  double sup_mean_sq = 0.0;
  double sup_se = 0.0;
  std::size_t sup_index = 0;
  double continuity_max = 0.0;  // max_i E ||x(t_{i+1}) - x(t_i)||^2

  std::vector<OrderAudit> orders;
  std::vector<BlockTermStat> block_terms;  // at t = T
  std::set<std::pair<std::size_t, int>> bias_flags;

  // crude moment bound pieces (growth audit x coefficient bounds)
  double bound_det = 0.0;        // deterministic-part majorant
  double bound_noise_sq = 0.0;   // weighted-norm majorant of the diffusion term
  double bound_deriv_sq = 0.0;   // derivative-trace majorant
  double crude_bound = 0.0;
  bool bounded_ok = false;

  // same sup statistics over the first half of the paths (stability check)
  double sup_mean_sq_half = 0.0;
  double sup_se_half = 0.0;
  std::vector<double> order_sup_half;     // per maintained order
  std::vector<double> order_sup_se_half;

  std::size_t n_paths = 0;
};

struct MomentsOptions {
  unsigned threads = 1;
  std::size_t order2_path_stride = 4;  // second-order marches run on every k-th path
  bool skip_derivative_audit = false;
};

MomentsReport monte_carlo_moments(const SolverContext& ctx, std::size_t n_paths,
                                  std::uint64_t base_seed, const MomentsOptions& opt = {});

}  // namespace nsfide::solver
