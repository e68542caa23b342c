#pragma once

#include <string>

#include "nsfide/config.hpp"

namespace nsfide::harness {

struct RunOutcome {
  bool ok = false;
  std::string summary;  // JSON text also written to <out>/summary.json
};

RunOutcome run_simulate(const RunConfig& cfg);
RunOutcome run_density(const RunConfig& cfg);
RunOutcome run_resolvent(const RunConfig& cfg);
RunOutcome run_fbm_test(const RunConfig& cfg);
RunOutcome run_validate(const RunConfig& cfg);

std::string version_string();

}  // namespace nsfide::harness
