#include "nsfide/config.hpp"

#include <cmath>
#include <json.hpp>

#include "nsfide/io.hpp"

namespace nsfide::harness {

using nlohmann::json;

density::FunctionalF RunConfig::functional() const {
  if (density.functional == "norm") return density::FunctionalF::norm();
  if (density.functional == "norm_unnormalized")
    return density::FunctionalF::norm_unnormalized();
  if (density.functional == "linear") {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.n_modes));
    if (density.linear_mode >= 1 && density.linear_mode <= model.n_modes)
      v(static_cast<Eigen::Index>(density.linear_mode - 1)) = 1.0;
    return density::FunctionalF::linear(std::move(v));
  }
  throw ConfigError({"unknown density functional '" + density.functional + "'"});
}

namespace {

spectral::SpectralField phi_field_from_json(const json& j, std::size_t n_modes,
                                            std::vector<std::string>& errs) {
  spectral::SpectralField out(n_modes);
  if (j.contains("coeffs")) {
    const auto& c = j.at("coeffs");
    if (!c.is_array() || c.size() > n_modes) {
      errs.push_back("phi.field.coeffs must be an array of <= n_modes reals");
      return out;
    }
    for (std::size_t i = 0; i < c.size(); ++i) out.coeffs[i] = c[i].get<double>();
    return out;
  }
  const std::string name = j.value("name", "");
  const std::vector<double> params = j.value("params", std::vector<double>{});
  if (name == "decay") {
    if (params.size() != 2) {
      errs.push_back("phi.field decay takes params [amplitude, power]");
      return out;
    }
    for (std::size_t n = 0; n < n_modes; ++n)
      out.coeffs[n] = params[0] / std::pow(static_cast<double>(n + 1), params[1]);
  } else if (name == "mode") {
    if (params.size() != 2) {
      errs.push_back("phi.field mode takes params [mode_index, amplitude]");
      return out;
    }
    const auto k = static_cast<std::size_t>(params[0]);
    if (k < 1 || k > n_modes) {
      errs.push_back("phi.field mode index out of 1..n_modes");
      return out;
    }
    out.coeffs[k - 1] = params[1];
  } else {
    errs.push_back("phi.field needs 'coeffs' or name in {decay, mode}");
  }
  return out;
}

spectral::CoefficientFunctionPtr coeff_from_json(const json& model, const char* key,
                                                 bool zero_at_zero,
                                                 std::vector<std::string>& errs) {
  if (!model.contains(key)) {
    errs.push_back(std::string("missing key model.") + key);
    return nullptr;
  }
  try {
    const auto& j = model.at(key);
    return spectral::registry_lookup(j.value("name", ""),
                                     j.value("params", std::vector<double>{}), zero_at_zero);
  } catch (const std::exception& e) {
    errs.push_back(std::string(key) + ": " + e.what());
    return nullptr;
  }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  std::vector<std::string> errs;
  json root;
  try {
    root = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError({std::string("malformed JSON: ") + e.what()});
  }

  RunConfig cfg;
  cfg.model = solver::default_model();
  if (!root.contains("model")) {
    throw ConfigError({"missing key model"});
  }
  const json& m = root.at("model");
  solver::ModelSpec& md = cfg.model;

  for (const char* req : {"hurst", "horizon", "delay", "blocks"})
    if (!m.contains(req)) errs.push_back(std::string("missing key model.") + req);

  md.hurst = m.value("hurst", md.hurst);
  md.horizon = m.value("horizon", md.horizon);
  md.delay = m.value("delay", md.delay);
  md.blocks = m.value("blocks", md.blocks);
  md.n_modes = m.value("n_modes", md.n_modes);
  md.n_points = m.value("n_points", md.n_points);
  if (m.contains("dt") && m.contains("steps_per_delay"))
    errs.push_back("give exactly one of model.dt / model.steps_per_delay");
  if (m.contains("steps_per_delay")) {
    const auto spd = m.at("steps_per_delay").get<std::size_t>();
    if (spd == 0)
      errs.push_back("steps_per_delay must be >= 1");
    else
      md.dt = md.delay / static_cast<double>(spd);
  } else {
    md.dt = m.value("dt", md.dt);
  }
  md.derivative_depth = m.value("derivative_depth", md.derivative_depth);

  if (m.contains("g")) md.g = coeff_from_json(m, "g", true, errs);
  if (m.contains("f")) md.f = coeff_from_json(m, "f", true, errs);
  if (m.contains("sigma")) md.sigma = coeff_from_json(m, "sigma", false, errs);
  if (m.contains("b")) {
    try {
      md.b = resolvent::memory_kernel_lookup(
          m.at("b").value("name", ""), m.at("b").value("params", std::vector<double>{}));
    } catch (const std::exception& e) {
      errs.push_back(std::string("b: ") + e.what());
    }
  }
  if (m.contains("phi")) {
    const json& p = m.at("phi");
    if (p.contains("alpha")) {
      md.phi.alpha_name = p.at("alpha").value("name", "constant");
      md.phi.alpha_params = p.at("alpha").value("params", std::vector<double>{1.0});
      try {
        md.phi.alpha(0.0);
      } catch (const std::exception& e) {
        errs.push_back(std::string("phi.alpha: ") + e.what());
      }
    }
    if (p.contains("field")) md.phi.field = phi_field_from_json(p.at("field"), md.n_modes, errs);
  }
  if (md.phi.field.n_modes() != md.n_modes) {
    // re-shape default history to the configured truncation
    spectral::SpectralField f(md.n_modes);
    for (std::size_t n = 0; n < md.n_modes; ++n)
      f.coeffs[n] = 1.0 / static_cast<double>((n + 1) * (n + 1));
    md.phi.field = std::move(f);
  }
  if (m.contains("mc")) {
    md.mc.n_paths = m.at("mc").value("n_paths", md.mc.n_paths);
    md.mc.base_seed = m.at("mc").value("base_seed", md.mc.base_seed);
  }

  cfg.out_dir = root.value("outputs", std::string("out"));
  cfg.threads = root.value("threads", 1u);
  if (root.contains("density")) {
    const json& d = root.at("density");
    cfg.density.t = d.value("t", -1.0);
    cfg.density.epsilon = d.value("epsilon", 1e-10);
    if (d.contains("functional")) {
      cfg.density.functional = d.at("functional").value("name", "norm");
      cfg.density.linear_mode = d.at("functional").value("mode", std::size_t{1});
    }
  }

  if (md.g && md.f && md.sigma && md.b) {
    for (const auto& e : md.validate()) errs.push_back(e);
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  return parse_config(io::read_file(path));
}

std::string config_to_json(const RunConfig& cfg) {
  const solver::ModelSpec& md = cfg.model;
  json m;
  m["hurst"] = md.hurst;
  m["horizon"] = md.horizon;
  m["delay"] = md.delay;
  m["blocks"] = md.blocks;
  m["n_modes"] = md.n_modes;
  m["n_points"] = md.n_points;
  m["dt"] = md.dt;
  m["g"] = {{"name", md.g->name()}, {"params", md.g->params()}};
  m["f"] = {{"name", md.f->name()}, {"params", md.f->params()}};
  m["sigma"] = {{"name", md.sigma->name()}, {"params", md.sigma->params()}};
  m["b"] = {{"name", md.b->name()}, {"params", md.b->params()}};
  m["phi"]["alpha"]["name"] = md.phi.alpha_name;
  m["phi"]["alpha"]["params"] = md.phi.alpha_params;
  m["phi"]["field"]["coeffs"] = md.phi.field.coeffs;
  m["derivative_depth"] = md.derivative_depth;
  m["mc"]["n_paths"] = md.mc.n_paths;
  m["mc"]["base_seed"] = md.mc.base_seed;
  json root;
  root["model"] = m;
  root["outputs"] = cfg.out_dir.string();
  root["threads"] = cfg.threads;
  root["density"]["t"] = cfg.density.t;
  root["density"]["epsilon"] = cfg.density.epsilon;
  root["density"]["functional"]["name"] = cfg.density.functional;
  root["density"]["functional"]["mode"] = cfg.density.linear_mode;
  return root.dump(2);
}

}  // namespace nsfide::harness
