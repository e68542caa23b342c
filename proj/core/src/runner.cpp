#include "nsfide/runner.hpp"

#include <json.hpp>
#include <sstream>

#include "nsfide/audits.hpp"
#include "nsfide/io.hpp"
#include "nsfide/rng.hpp"
#include "nsfide/solver.hpp"

namespace nsfide::harness {

using nlohmann::json;

std::string version_string() {
#ifdef NSFIDE_VERSION
  return std::string("nsfide ") + NSFIDE_VERSION;
#else
  return "nsfide (unversioned)";
#endif
}

namespace {

json base_summary(const RunConfig& cfg) {
  json s;
  s["version"] = version_string();
  s["config"] = json::parse(config_to_json(cfg));
  return s;
}

void write_summary(const RunConfig& cfg, const json& s) {
  io::atomic_write(cfg.out_dir / "summary.json", s.dump(2) + "\n");
}

}  // namespace

RunOutcome run_simulate(const RunConfig& cfg) {
  const solver::SolverContext ctx(cfg.model);
  solver::MomentsOptions opt;
  opt.threads = cfg.threads;
  const solver::MomentsReport rep =
      solver::monte_carlo_moments(ctx, cfg.model.mc.n_paths, cfg.model.mc.base_seed, opt);

  std::ostringstream csv;
  csv << "t,mean_sq_norm,se\n";
  for (std::size_t k = 0; k < rep.t.size(); ++k)
    csv << io::format_number(rep.t[k]) << "," << io::format_number(rep.mean_sq_norm[k]) << ","
        << io::format_number(rep.se[k]) << "\n";
  io::atomic_write(cfg.out_dir / "moments.csv", csv.str());

  json s = base_summary(cfg);
  s["n_paths"] = rep.n_paths;
  s["sup_mean_sq_norm"] = rep.sup_mean_sq;
  s["sup_se"] = rep.sup_se;
  s["sup_t"] = rep.t[rep.sup_index];
  s["continuity_max_increment"] = rep.continuity_max;
  s["crude_bound"] = rep.crude_bound;
  s["bound_pieces"] = {{"deterministic", rep.bound_det},
                       {"noise_sq", rep.bound_noise_sq},
                       {"derivative_sq", rep.bound_deriv_sq}};
  s["bounded_ok"] = rep.bounded_ok;
  for (const auto& o : rep.orders) {
    json jo;
    jo["order"] = o.order;
    jo["paths_used"] = o.paths_used;
    jo["sup_mean_sq"] = o.sup_mean_sq;
    jo["sup_se"] = o.sup_se;
    for (const auto& smp : o.samples) {
      json js;
      js["point"] = smp.point;
      js["mean_sq"] = smp.mean_sq;
      js["se"] = smp.se;
      jo["samples"].push_back(js);
    }
    s["derivative_moments"].push_back(jo);
  }
  for (const auto& bt : rep.block_terms) {
    json jb;
    jb["block"] = bt.block;
    jb["max_abs_mean_over_se"] = bt.max_abs_over_se;
    s["skorohod_block_terms"].push_back(jb);
  }
  for (const auto& fl : rep.bias_flags)
    s["bias_flags"].push_back({{"block", fl.first}, {"order", fl.second}});
  write_summary(cfg, s);
  return {true, s.dump(2)};
}

RunOutcome run_density(const RunConfig& cfg) {
  const solver::SolverContext ctx(cfg.model);
  std::size_t t_idx = ctx.n_steps();
  if (cfg.density.t >= 0.0) {
    const double ratio = cfg.density.t / cfg.model.dt;
    t_idx = static_cast<std::size_t>(std::llround(ratio));
    if (t_idx == 0 || t_idx > ctx.n_steps())
      throw ConfigError({"density.t must be a grid time in (0, T]"});
  }
  const auto rep = density::criterion_statistics(ctx, t_idx, cfg.model.mc.n_paths,
                                                 cfg.density.epsilon, cfg.functional(),
                                                 cfg.model.mc.base_seed, cfg.threads);
  std::ostringstream csv;
  csv << "seed,criterion\n";
  for (std::size_t i = 0; i < rep.values.size(); ++i)
    csv << rep.seeds[i] << "," << io::format_number(rep.values[i]) << "\n";
  io::atomic_write(cfg.out_dir / "density.csv", csv.str());

  json s = base_summary(cfg);
  s["t"] = rep.t;
  s["epsilon"] = rep.epsilon;
  s["fraction_positive"] = rep.fraction_positive;
  s["min"] = rep.min_value;
  s["quartiles"] = {rep.q25, rep.q50, rep.q75};
  s["degenerate_gradient_paths"] = rep.degenerate_count;
  write_summary(cfg, s);
  return {true, s.dump(2)};
}

RunOutcome run_resolvent(const RunConfig& cfg) {
  const solver::SolverContext ctx(cfg.model);
  std::ostringstream csv;
  ctx.table().write_csv(csv);
  io::atomic_write(cfg.out_dir / "resolvent.csv", csv.str());

  json s = base_summary(cfg);
  s["growth_audit_max_n"] = ctx.table().growth_audit_max_n();
  for (std::size_t m = 0; m < ctx.n_modes(); ++m) {
    const auto gb = ctx.table().growth_bound(m);
    s["growth_bounds"].push_back({{"lambda", ctx.table().eigenvalue(m)},
                                  {"n_const", gb.n_const},
                                  {"beta", gb.beta}});
  }
  s["identity_residual"] =
      resolvent::resolvent_identity_residual(ctx.table(), *cfg.model.b, 5);
  write_summary(cfg, s);
  return {true, s.dump(2)};
}

RunOutcome run_fbm_test(const RunConfig& cfg) {
  const std::size_t paths = cfg.model.mc.n_paths;
  const auto a1 = audits::fbm_cholesky_covariance(cfg.model.hurst, paths,
                                                  cfg.model.mc.base_seed);
  const auto a2 = audits::fbm_wiener_cross(cfg.model.hurst, paths, cfg.model.mc.base_seed + 1);

  // covariance table for external inspection
  const HurstParameter h(cfg.model.hurst);
  const TimeGrid grid(1.0, 8);
  const fbm::CholeskyFbmSampler sampler(grid, h);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(8, 8);
  for (std::size_t p = 0; p < paths; ++p) {
    const fbm::FbmSample smp = sampler.sample(derive_seed(cfg.model.mc.base_seed, p));
    Eigen::Map<const Eigen::VectorXd> v(smp.values.data() + 1, 8);
    second.noalias() += v * v.transpose();
  }
  second /= static_cast<double>(paths);
  std::ostringstream csv;
  csv << "i,j,t_i,t_j,r_exact,r_mc\n";
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      csv << (i + 1) << "," << (j + 1) << "," << io::format_number(grid.point(i + 1)) << ","
          << io::format_number(grid.point(j + 1)) << ","
          << io::format_number(fbm::covariance(grid.point(i + 1), grid.point(j + 1), h)) << ","
          << io::format_number(second(static_cast<Eigen::Index>(i),
                                      static_cast<Eigen::Index>(j)))
          << "\n";
  io::atomic_write(cfg.out_dir / "fbm_covariance.csv", csv.str());

  json s = base_summary(cfg);
  for (const auto& a : {a1, a2})
    s["audits"].push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  write_summary(cfg, s);
  return {a1.pass && a2.pass, s.dump(2)};
}

RunOutcome run_validate(const RunConfig& cfg) {
  const audits::AuditList all = audits::run_all(cfg.model, cfg.threads);
  bool ok = true;
  json s = base_summary(cfg);
  for (const auto& a : all) {
    ok = ok && a.pass;
    s["audits"].push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  }
  s["all_pass"] = ok;
  write_summary(cfg, s);
  return {ok, s.dump(2)};
}

}  // namespace nsfide::harness
