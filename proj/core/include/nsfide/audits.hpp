#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsfide/model.hpp"
#include "nsfide/solver.hpp"

namespace nsfide::audits {

struct AuditResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

using AuditList = std::vector<AuditResult>;

/// Empirical covariance of the exact sampler vs the closed form, entrywise
/// within 3 standard errors, on an 8-point grid over [0,1].
AuditResult fbm_cholesky_covariance(double hurst, std::size_t n_paths, std::uint64_t seed);

/// Kernel-representation sampler: variance at T against the discrete truth
/// plus quadrature bias bound, and covariance agreement with the exact
/// sampler within combined tolerances.
AuditResult fbm_wiener_cross(double hurst, std::size_t n_paths, std::uint64_t seed);

/// Isometry of the kernel transpose operator on registry test functions:
/// relative defect <= tol at the base resolution, strictly smaller after one
/// refinement.
AuditResult kstar_isometry(double hurst, std::size_t base_steps, double tol);

AuditResult resolvent_exponential();        // b = 0 closed form
AuditResult resolvent_constant_kernel();    // second-order ODE closed form
AuditResult resolvent_residual_order();     // O(dt^2) residual, 4x drop under halving

/// Scalar Skorohod oracle: the trace equals T^{2H}/2 to 1e-3 relative and
/// the Monte Carlo mean of the integral is within 3 SE of zero.
AuditResult skorohod_scalar(double hurst, std::size_t n_paths, std::uint64_t seed);

/// Linear model (g = f = 0, constant sigma, b = 0): per-mode mean matches
/// the semigroup trajectory and per-mode variance matches the deterministic
/// variance oracle, within 3 SE.
AuditResult linear_model_end_to_end(std::size_t n_paths, std::uint64_t seed, unsigned threads);

/// Nonlinear model block checks: (a) block consistency, (b) per-block
/// Skorohod terms zero-mean, (c) last-interval derivative identity,
/// (d) moment audit finite and stable under halving the path count.
AuditList nonlinear_blocks(const solver::ModelSpec& model, std::size_t n_paths,
                           std::uint64_t seed, unsigned threads);

/// Coupled-noise self-convergence over three dt refinements.
AuditResult self_convergence(const solver::ModelSpec& finest, std::size_t levels,
                             std::size_t n_paths, std::uint64_t seed, unsigned threads);

/// Density criterion checks: degenerate sigma, sigma bounded below at the
/// derived threshold, and the constant-sigma closed-form quadrature.
AuditList density_checks(std::size_t n_paths, std::uint64_t seed, unsigned threads);

/// All audits at validation scale (path counts from `mc`).
AuditList run_all(const solver::ModelSpec& model, unsigned threads);

}  // namespace nsfide::audits
