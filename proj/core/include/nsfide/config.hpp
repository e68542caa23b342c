#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsfide/density.hpp"
#include "nsfide/model.hpp"

namespace nsfide::harness {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> items)
      : std::runtime_error(join(items)), items_(std::move(items)) {}
  const std::vector<std::string>& items() const { return items_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string s = "invalid config:";
    for (const auto& it : items) s += "\n  - " + it;
    return s;
  }
  std::vector<std::string> items_;
};

struct DensityOptions {
  double t = -1.0;  // < 0 means horizon
  double epsilon = 1e-10;
  std::string functional = "norm";  // norm | norm_unnormalized | linear
  std::size_t linear_mode = 1;      // e_k pairing when functional == linear
};

struct RunConfig {
  solver::ModelSpec model;
  std::filesystem::path out_dir = "out";
  unsigned threads = 1;
  DensityOptions density;

  density::FunctionalF functional() const;
};

/// Parse + validate; throws ConfigError with one item per named violation.
RunConfig parse_config(const std::string& json_text);
RunConfig parse_config_file(const std::filesystem::path& path);

/// Normalized echo with defaults filled (bit-stable key order).
std::string config_to_json(const RunConfig& cfg);

}  // namespace nsfide::harness
