#include "nsfide/model.hpp"

#include <cmath>
#include <stdexcept>

namespace nsfide::solver {

double InitialHistory::alpha(double t) const {
  if (alpha_name == "constant") return alpha_params.at(0);
  if (alpha_name == "affine") return alpha_params.at(0) + alpha_params.at(1) * t;
  if (alpha_name == "cosine") return alpha_params.at(0) * std::cos(alpha_params.at(1) * t);
  throw std::invalid_argument("configuration error: unknown history alpha '" + alpha_name + "'");
}

spectral::SpectralField InitialHistory::at(double t) const {
  spectral::SpectralField out = field;
  out *= alpha(t);
  return out;
}

std::vector<std::string> ModelSpec::validate() const {
  std::vector<std::string> errs;
  if (!(hurst > 0.5 && hurst < 1.0)) errs.push_back("hurst out of (1/2,1)");
  if (!(horizon > 0.0)) errs.push_back("horizon must be positive");
  if (!(delay > 0.0)) errs.push_back("delay must be positive");
  if (blocks == 0) errs.push_back("block count must be >= 1");
  if (horizon > 0.0 && delay > 0.0 && blocks > 0 &&
      horizon > static_cast<double>(blocks) * delay * (1.0 + 1e-12))
    errs.push_back("T exceeds m*r");
  if (blocks > 4)
    errs.push_back("block count exceeds registry derivative order 4");
  if (!(dt > 0.0)) {
    errs.push_back("dt must be positive");
  } else {
    const double ratio_r = delay / dt;
    if (std::abs(ratio_r - std::round(ratio_r)) > 1e-9 || std::round(ratio_r) < 1.0)
      errs.push_back("r/dt non-integer");
    const double ratio_t = horizon / dt;
    if (std::abs(ratio_t - std::round(ratio_t)) > 1e-9 || std::round(ratio_t) < 1.0)
      errs.push_back("T/dt non-integer");
  }
  if (n_modes == 0) errs.push_back("n_modes must be >= 1");
  if (n_points < n_modes) errs.push_back("n_points < n_modes (aliasing)");
  if (!g) errs.push_back("missing coefficient g");
  if (!f) errs.push_back("missing coefficient f");
  if (!sigma) errs.push_back("missing coefficient sigma");
  if (!b) errs.push_back("missing memory kernel b");
  if (g && !g->zero_at_zero()) errs.push_back("coefficient g must vanish at zero");
  if (f && !f->zero_at_zero()) errs.push_back("coefficient f must vanish at zero");
  if (derivative_depth < 1 || derivative_depth > 3)
    errs.push_back("derivative_depth must be in 1..3");
  if (phi.field.n_modes() != n_modes) errs.push_back("phi field mode count mismatch");
  if (mc.n_paths == 0) errs.push_back("mc.n_paths must be >= 1");
  return errs;
}

void ModelSpec::validate_or_throw() const {
  const auto errs = validate();
  if (errs.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& e : errs) msg += "\n  - " + e;
  throw std::invalid_argument(msg);
}

std::size_t ModelSpec::delay_cells() const {
  return static_cast<std::size_t>(std::llround(delay / dt));
}

std::size_t ModelSpec::n_steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

ModelSpec default_model() {
  ModelSpec m;
  m.g = spectral::registry_lookup("scaled_tanh", {0.1, 1.0}, true);
  m.f = spectral::registry_lookup("scaled_tanh", {0.5, 1.0}, true);
  m.sigma = spectral::registry_lookup("scaled_tanh", {0.5, 1.0});
  m.b = resolvent::memory_kernel_lookup("exp_decay", {1.0, 2.0});
  m.phi.field = spectral::SpectralField(m.n_modes);
  for (std::size_t n = 0; n < m.n_modes; ++n)
    m.phi.field.coeffs[n] = 1.0 / static_cast<double>((n + 1) * (n + 1));
  return m;
}

}  // namespace nsfide::solver
