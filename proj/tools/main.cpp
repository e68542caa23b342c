#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "nsfide/config.hpp"
#include "nsfide/runner.hpp"

namespace {

// CLI flags win over env vars (prefix NSFIDE_), env vars win over the config.
void apply_overrides(nsfide::harness::RunConfig& cfg, long long paths, long long seed,
                     const std::string& out, long long threads) {
  if (const char* v = std::getenv("NSFIDE_PATHS")) cfg.model.mc.n_paths = std::stoull(v);
  if (const char* v = std::getenv("NSFIDE_SEED")) cfg.model.mc.base_seed = std::stoull(v);
  if (const char* v = std::getenv("NSFIDE_OUT")) cfg.out_dir = v;
  if (const char* v = std::getenv("NSFIDE_THREADS")) cfg.threads = std::stoul(v);
  if (paths >= 0) cfg.model.mc.n_paths = static_cast<std::size_t>(paths);
  if (seed >= 0) cfg.model.mc.base_seed = static_cast<std::uint64_t>(seed);
  if (!out.empty()) cfg.out_dir = out;
  if (threads >= 1) cfg.threads = static_cast<unsigned>(threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulator for neutral stochastic delay "
               "integro-differential equations driven by fractional Brownian motion"};
  app.set_version_flag("--version", nsfide::harness::version_string());

  std::string config_path;
  long long paths = -1, seed = -1, threads = -1;
  std::string out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--paths", paths, "override mc.n_paths");
    sub->add_option("--seed", seed, "override mc.base_seed");
    sub->add_option("--out", out, "override output directory");
    sub->add_option("--threads", threads, "worker count (affects speed only, never results)");
  };

  CLI::App* c_sim = app.add_subcommand("simulate", "Monte Carlo moments of the solution");
  CLI::App* c_den = app.add_subcommand("density", "density criterion statistics");
  CLI::App* c_res = app.add_subcommand("resolvent", "build and export the resolvent table");
  CLI::App* c_fbm = app.add_subcommand("fbm-test", "driver-noise sampler cross-checks");
  CLI::App* c_val = app.add_subcommand("validate", "run the oracle and audit suite");
  for (CLI::App* sub : {c_sim, c_den, c_res, c_fbm, c_val}) add_common(sub);
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    nsfide::harness::RunConfig cfg = nsfide::harness::parse_config_file(config_path);
    apply_overrides(cfg, paths, seed, out, threads);

    nsfide::harness::RunOutcome outcome;
    if (c_sim->parsed()) outcome = nsfide::harness::run_simulate(cfg);
    if (c_den->parsed()) outcome = nsfide::harness::run_density(cfg);
    if (c_res->parsed()) outcome = nsfide::harness::run_resolvent(cfg);
    if (c_fbm->parsed()) outcome = nsfide::harness::run_fbm_test(cfg);
    if (c_val->parsed()) outcome = nsfide::harness::run_validate(cfg);

    std::cout << outcome.summary << "\n";
    return outcome.ok ? 0 : 1;
  } catch (const nsfide::harness::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
