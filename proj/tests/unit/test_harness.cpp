#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "nsfide/config.hpp"
#include "nsfide/io.hpp"
#include "nsfide/rng.hpp"

using namespace nsfide;
using namespace nsfide::harness;

namespace {

const char* kValidConfig = R"json({
  "model": {
    "hurst": 0.75, "horizon": 0.5, "delay": 0.25, "blocks": 2,
    "n_modes": 8, "n_points": 31, "dt": 0.0078125,
    "g": {"name": "scaled_tanh", "params": [0.1, 1.0]},
    "f": {"name": "scaled_tanh", "params": [0.3, 1.0]},
    "sigma": {"name": "scaled_tanh", "params": [0.5, 1.0]},
    "b": {"name": "exp_decay", "params": [1.0, 2.0]},
    "phi": {"alpha": {"name": "constant", "params": [1.0]},
            "field": {"name": "decay", "params": [1.0, 2.0]}},
    "derivative_depth": 2,
    "mc": {"n_paths": 16, "base_seed": 99}
  },
  "outputs": "out_test",
  "threads": 2
})json";

bool has_item(const ConfigError& e, const std::string& needle) {
  return std::any_of(e.items().begin(), e.items().end(), [&](const std::string& s) {
    return s.find(needle) != std::string::npos;
  });
}

std::string patched(const std::string& base, const std::string& from, const std::string& to) {
  std::string s = base;
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("valid config round-trips through the normalized echo") {
  const RunConfig cfg = parse_config(kValidConfig);
  CHECK(cfg.model.n_modes == 8);
  CHECK(cfg.model.delay_cells() == 32);
  CHECK(cfg.threads == 2);
  const std::string echo = config_to_json(cfg);
  const RunConfig cfg2 = parse_config(echo);
  CHECK(config_to_json(cfg2) == echo);
}

TEST_CASE("each invariant raises its named error") {
  CHECK_THROWS_WITH_AS(parse_config("{"), doctest::Contains("malformed JSON"), ConfigError);

  try {
    parse_config(patched(kValidConfig, "\"hurst\": 0.75", "\"hurst\": 0.4"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(has_item(e, "hurst out of (1/2,1)"));
  }

  try {
    parse_config(patched(kValidConfig, "\"horizon\": 0.5", "\"horizon\": 3.0"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(has_item(e, "T exceeds m*r"));
  }

  try {
    parse_config(patched(kValidConfig, "\"dt\": 0.0078125", "\"dt\": 0.003"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(has_item(e, "r/dt non-integer"));
  }

  try {
    parse_config(patched(kValidConfig, "\"g\": {\"name\": \"scaled_tanh\", \"params\": [0.1, 1.0]}",
                         "\"g\": {\"name\": \"constant\", \"params\": [0.2]}"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(has_item(e, "must vanish at zero"));
  }

  try {
    parse_config(patched(kValidConfig, "\"derivative_depth\": 2", "\"derivative_depth\": 7"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(has_item(e, "derivative_depth must be in 1..3"));
  }

  try {
    parse_config(patched(kValidConfig, "\"hurst\": 0.75, ", ""));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(has_item(e, "missing key model.hurst"));
  }

  // multiple violations are itemized together
  try {
    parse_config(patched(patched(kValidConfig, "\"hurst\": 0.75", "\"hurst\": 0.2"),
                         "\"blocks\": 2", "\"blocks\": 0"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.items().size() >= 2);
  }
}

TEST_CASE("seed derivation is deterministic, sensitive and collision-free") {
  CHECK(derive_seed(7, 13) == derive_seed(7, 13));

  std::vector<std::uint64_t> seeds(1000001);
  for (std::size_t i = 0; i <= 1000000; ++i) seeds[i] = derive_seed(424242, i);
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());

  std::size_t differing = 0;
  for (std::size_t i = 0; i < 1000; ++i)
    if (derive_seed(5, i * 997) != derive_seed(6, i * 997)) ++differing;
  CHECK(differing == 1000);
}

TEST_CASE("decimal formatting survives a parse round trip") {
  GaussianSampler rng(2718);
  for (int k = 0; k < 200; ++k) {
    const double x = rng.normal() * std::pow(10.0, static_cast<int>(rng.uniform() * 40) - 20);
    const std::string s = io::format_number(x);
    CHECK(std::stod(s) == x);
  }
}

TEST_CASE("atomic write leaves no temporary and preserves bytes") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "nsfide_io_test";
  fs::remove_all(dir);
  const fs::path target = dir / "nested" / "file.csv";
  const std::string payload = "a,b\n1,2\n";
  io::atomic_write(target, payload);
  CHECK(io::read_file(target) == payload);
  CHECK_FALSE(fs::exists(target.string() + ".tmp"));
  io::atomic_write(target, "overwritten");
  CHECK(io::read_file(target) == "overwritten");
  fs::remove_all(dir);
}

}  // TEST_SUITE
