#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsfide/hurst_grid.hpp"
#include "nsfide/memory_kernel.hpp"
#include "nsfide/spectral.hpp"

namespace nsfide::solver {

/// Deterministic separable initial history phi(t) = alpha(t) * field on
/// [-r, 0], alpha continuous. alpha registry: constant(c) | affine(a0,a1) |
/// cosine(a,w).
struct InitialHistory {
  std::string alpha_name = "constant";
  std::vector<double> alpha_params{1.0};
  spectral::SpectralField field;

  double alpha(double t) const;
  spectral::SpectralField at(double t) const;  // t in [-r, 0]
};

struct McSettings {
  std::size_t n_paths = 200;
  std::uint64_t base_seed = 20190405;
};

/// Full problem description. Invariants are itemized by validate().
struct ModelSpec {
  double hurst = 0.75;
  double horizon = 0.75;          // T
  double delay = 0.25;            // r
  std::size_t blocks = 3;         // m, horizon constraint T <= m r
  std::size_t n_modes = 32;
  std::size_t n_points = 127;
  double dt = 1.0 / 512.0;
  spectral::CoefficientFunctionPtr g, f, sigma;
  resolvent::MemoryKernelPtr b;
  InitialHistory phi;
  int derivative_depth = 2;       // K
  McSettings mc;

  /// Named violations; empty when the spec is admissible.
  std::vector<std::string> validate() const;
  void validate_or_throw() const;

  std::size_t delay_cells() const;   // r/dt, exact integer by invariant
  std::size_t n_steps() const;       // T/dt
  TimeGrid time_grid() const { return TimeGrid(horizon, n_steps()); }
  HurstParameter hurst_parameter() const { return HurstParameter(hurst); }
};

/// Default nonlinear heat-with-memory model (scaled_tanh coefficients,
/// exponentially decaying kernel).
ModelSpec default_model();

}  // namespace nsfide::solver
