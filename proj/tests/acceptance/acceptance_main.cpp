// Acceptance suite: one externally checkable criterion per entry, printed as
// a single [PASS]/[FAIL] line with the measured quantities and its runtime.
// Exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nsfide/audits.hpp"
#include "nsfide/config.hpp"
#include "nsfide/io.hpp"
#include "nsfide/runner.hpp"
#include "nsfide/solver.hpp"

using namespace nsfide;

namespace {

unsigned worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 2 : hw;
}

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  bool (*run)(std::string& detail);
};

solver::ModelSpec acceptance_model() {
  solver::ModelSpec m;
  m.hurst = 0.75;
  m.horizon = 0.75;
  m.delay = 0.25;
  m.blocks = 3;
  m.n_modes = 32;
  m.n_points = 127;
  m.dt = 1.0 / 512.0;
  m.g = spectral::registry_lookup("scaled_tanh", {0.1, 1.0}, true);
  m.f = spectral::registry_lookup("scaled_tanh", {0.5, 1.0}, true);
  m.sigma = spectral::registry_lookup("scaled_tanh", {0.5, 1.0});
  m.b = resolvent::memory_kernel_lookup("exp_decay", {1.0, 2.0});
  m.derivative_depth = 2;
  m.phi.field = spectral::SpectralField(m.n_modes);
  for (std::size_t n = 0; n < m.n_modes; ++n)
    m.phi.field.coeffs[n] = 1.0 / static_cast<double>((n + 1) * (n + 1));
  return m;
}

bool all_pass(const audits::AuditList& list, std::string& detail) {
  bool ok = true;
  std::ostringstream os;
  for (const auto& a : list) {
    ok = ok && a.pass;
    os << (a.pass ? "" : "FAILED ") << a.name << ": " << a.detail << " | ";
  }
  detail = os.str();
  return ok;
}

bool criterion_1(std::string& detail) {
  audits::AuditList list;
  for (double h : {0.6, 0.75, 0.9})
    list.push_back(audits::fbm_cholesky_covariance(h, 20000, 90001));
  return all_pass(list, detail);
}

bool criterion_2(std::string& detail) {
  return all_pass({audits::fbm_wiener_cross(0.75, 20000, 90002)}, detail);
}

bool criterion_3(std::string& detail) {
  return all_pass({audits::kstar_isometry(0.75, 256, 2e-2)}, detail);
}

bool criterion_4(std::string& detail) {
  return all_pass({audits::resolvent_exponential(), audits::resolvent_constant_kernel(),
                   audits::resolvent_residual_order()},
                  detail);
}

bool criterion_5(std::string& detail) {
  return all_pass({audits::skorohod_scalar(0.75, 10000, 90005)}, detail);
}

bool criterion_6(std::string& detail) {
  return all_pass({audits::linear_model_end_to_end(10000, 90006, worker_count())}, detail);
}

bool criterion_7(std::string& detail) {
  audits::AuditList list =
      audits::nonlinear_blocks(acceptance_model(), 2000, 90007, worker_count());
  list.push_back(audits::self_convergence(acceptance_model(), 4, 96, 90008, worker_count()));
  return all_pass(list, detail);
}

bool criterion_8(std::string& detail) {
  return all_pass(audits::density_checks(200, 90009, worker_count()), detail);
}

bool criterion_9(std::string& detail) {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "nsfide_acceptance_repro";
  fs::remove_all(root);

  harness::RunConfig cfg;
  cfg.model = acceptance_model();
  cfg.model.n_modes = 8;
  cfg.model.n_points = 31;
  cfg.model.dt = 1.0 / 128.0;
  cfg.model.mc.n_paths = 48;
  cfg.model.mc.base_seed = 90010;

  auto simulate_into = [&](const fs::path& dir, unsigned threads) {
    harness::RunConfig c = cfg;
    c.out_dir = dir;
    c.threads = threads;
    harness::run_simulate(c);
    harness::RunConfig d = c;
    d.out_dir = dir / "density";
    harness::run_density(d);
  };
  simulate_into(root / "a", 1);
  simulate_into(root / "b", 1);
  simulate_into(root / "c", 8);

  auto same = [&](const char* rel) {
    return io::read_file(root / "a" / rel) == io::read_file(root / "b" / rel) &&
           io::read_file(root / "a" / rel) == io::read_file(root / "c" / rel);
  };
  const bool ok = same("moments.csv") && same("summary.json") && same("density/density.csv") &&
                  same("density/summary.json");
  detail = ok ? "byte-identical across reruns and --threads {1,8}"
              : "outputs differ across runs or thread counts";
  fs::remove_all(root);
  return ok;
}

const std::vector<Criterion> kCriteria = {
    {1, "exact-sampler covariance, H in {0.6,0.75,0.9}, 20000 paths", 30.0, criterion_1},
    {2, "kernel-representation sampler cross-check, 20000 paths", 60.0, criterion_2},
    {3, "kernel-transpose isometry with refinement improvement", 60.0, criterion_3},
    {4, "resolvent closed-form oracles and residual order", 10.0, criterion_4},
    {5, "scalar anticipating-integral oracle, 10000 paths", 60.0, criterion_5},
    {6, "linear model end-to-end moments, 10000 paths", 120.0, criterion_6},
    {7, "nonlinear model block checks at 2000 paths", 600.0, criterion_7},
    {8, "density criterion checks", 300.0, criterion_8},
    {9, "byte reproducibility across runs and thread counts", 120.0, criterion_9},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else if (std::strcmp(argv[i], "--list") == 0) {
      for (const auto& c : kCriteria) std::cout << c.id << ": " << c.title << "\n";
      return 0;
    }
  }

  bool all_ok = true;
  for (const auto& c : kCriteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      ok = false;
      detail += " [exceeded runtime budget " + std::to_string(c.budget_seconds) + " s]";
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << " (" << c.title << ", "
              << static_cast<int>(secs * 1000.0) / 1000.0 << " s / budget "
              << c.budget_seconds << " s): " << detail << "\n";
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
