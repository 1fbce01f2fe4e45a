// Copyright 2026 The polykin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Run configuration (strict JSON schema: unknown keys are rejected, every
// violation names its field path) and the JSON-lines / CSV serialization of
// the report stream.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polykin/analysis.hpp"
#include "polykin/dsmc.hpp"
#include "polykin/models.hpp"

namespace polykin::cfg {

using nlohmann::json;

enum class Command { Simulate, Constants, Verify, SampleEq };

struct ScanK {
  double k_min = 2.0;
  double k_max = 40.0;
  std::vector<double> gammas;
  std::vector<double> alphas;
};

struct RunConfig {
  Command command = Command::Constants;
  dsmc::SimConfig sim;
  std::optional<ScanK> scan_k;
  std::string out_path;
  std::string csv_path;
  int verbosity = 1;
  bool quick = false;
};

namespace detail {

inline void reject_unknown(const json& obj, const std::set<std::string>& known,
                           const std::string& path) {
  for (const auto& [key, _] : obj.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown key '" + path + key + "'");
    }
  }
}

inline double get_number(const json& obj, const std::string& key,
                         const std::string& path, double fallback,
                         bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError("missing key '" + path + key + "'");
    return fallback;
  }
  if (!obj[key].is_number()) {
    throw ConfigError("'" + path + key + "' must be a number");
  }
  return obj[key].get<double>();
}

inline models::Model parse_model_name(const std::string& name,
                                      const std::string& path) {
  if (name == "Model1") return models::Model::Model1;
  if (name == "Model2") return models::Model::Model2;
  if (name == "Model3") return models::Model::Model3;
  throw ConfigError("'" + path +
                    "': unknown model '" + name +
                    "' (expected Model1, Model2 or Model3)");
}

inline models::ModelSpec parse_model(const json& root) {
  models::ModelSpec spec;
  if (!root.contains("model")) throw ConfigError("missing key 'model'");
  spec.model = parse_model_name(root["model"].get<std::string>(), "model");
  spec.gamma = get_number(root, "gamma", "", 2.0, true);
  if (!(spec.gamma > 0.0 && spec.gamma <= 2.0)) {
    throw ConfigError("'gamma' must lie in (0, 2]");
  }
  spec.params.alpha = get_number(root, "alpha", "", 0.0, true);
  if (!(spec.params.alpha > -1.0)) {
    throw ConfigError("'alpha' must satisfy alpha > -1");
  }
  spec.params.m = get_number(root, "m", "", 1.0);
  if (!(spec.params.m > 0.0)) throw ConfigError("'m' must be > 0");
  spec.params.kB = get_number(root, "kB", "", 1.0);
  if (!(spec.params.kB > 0.0)) throw ConfigError("'kB' must be > 0");
  if (root.contains("angular")) {
    const json& a = root["angular"];
    if (a.is_string()) {
      if (a.get<std::string>() != "isotropic") {
        throw ConfigError("'angular' string form must be \"isotropic\"");
      }
    } else if (a.is_object()) {
      reject_unknown(a, {"table"}, "angular.");
      if (!a.contains("table") || !a["table"].is_array()) {
        throw ConfigError("'angular.table' must be an array of pdf values");
      }
      spec.angular =
          models::AngularFn::table_pdf(a["table"].get<std::vector<double>>());
    } else {
      throw ConfigError("'angular' must be \"isotropic\" or {\"table\": [...]}");
    }
  }
  if (root.contains("bound_variant")) {
    const std::string v = root["bound_variant"].get<std::string>();
    if (v == "minmax") {
      spec.bound_variant = models::BoundVariant::MinMax;
    } else if (v == "product") {
      spec.bound_variant = models::BoundVariant::Product;
    } else {
      throw ConfigError("'bound_variant' must be \"minmax\" or \"product\"");
    }
  }
  return spec;
}

inline dsmc::InitSpec parse_init(const json& obj) {
  dsmc::InitSpec init;
  reject_unknown(obj, {"kind", "T", "T_kin", "T_int", "speed", "file"},
                 "init.");
  if (!obj.contains("kind")) throw ConfigError("missing key 'init.kind'");
  const std::string kind = obj["kind"].get<std::string>();
  if (kind == "Equilibrium") {
    init.kind = dsmc::InitSpec::Kind::Equilibrium;
    init.T = get_number(obj, "T", "init.", 1.0, true);
    if (!(init.T > 0.0)) throw ConfigError("'init.T' must be > 0");
  } else if (kind == "TwoTemperature") {
    init.kind = dsmc::InitSpec::Kind::TwoTemperature;
    init.T_kin = get_number(obj, "T_kin", "init.", 1.0, true);
    init.T_int = get_number(obj, "T_int", "init.", 1.0, true);
    if (!(init.T_kin > 0.0) || !(init.T_int > 0.0)) {
      throw ConfigError("'init' temperatures must be > 0");
    }
  } else if (kind == "BimodalBeams") {
    init.kind = dsmc::InitSpec::Kind::BimodalBeams;
    init.speed = get_number(obj, "speed", "init.", 1.0, true);
    init.T_int = get_number(obj, "T_int", "init.", 1.0, true);
    if (!(init.speed > 0.0) || !(init.T_int > 0.0)) {
      throw ConfigError("'init' speed and T_int must be > 0");
    }
  } else if (kind == "Custom") {
    init.kind = dsmc::InitSpec::Kind::Custom;
    if (!obj.contains("file")) throw ConfigError("'init.file' required");
    init.custom_path = obj["file"].get<std::string>();
  } else {
    throw ConfigError("'init.kind' must be one of Equilibrium, "
                      "TwoTemperature, BimodalBeams, Custom");
  }
  return init;
}

inline dsmc::Diagnostics parse_diagnostics(const json& obj) {
  dsmc::Diagnostics d;
  reject_unknown(obj,
                 {"moments", "exp_moments", "entropy", "entropy_bins",
                  "coercivity_spotcheck", "coercivity_probes"},
                 "diagnostics.");
  if (obj.contains("moments")) {
    d.moment_orders = obj["moments"].get<std::vector<double>>();
    for (double k : d.moment_orders) {
      if (!(k >= 0.0)) throw ConfigError("'diagnostics.moments' need k >= 0");
    }
  }
  if (obj.contains("exp_moments")) {
    for (const auto& e : obj["exp_moments"]) {
      reject_unknown(e, {"s", "beta"}, "diagnostics.exp_moments.");
      const double s = get_number(e, "s", "diagnostics.exp_moments.", 1.0, true);
      const double b =
          get_number(e, "beta", "diagnostics.exp_moments.", 0.1, true);
      if (!(s > 0.0 && s <= 1.0)) {
        throw ConfigError("'diagnostics.exp_moments.s' must lie in (0, 1]");
      }
      if (!(b > 0.0)) {
        throw ConfigError("'diagnostics.exp_moments.beta' must be > 0");
      }
      d.exp_moments.emplace_back(s, b);
    }
  }
  if (obj.contains("entropy")) d.entropy = obj["entropy"].get<bool>();
  if (obj.contains("entropy_bins")) {
    d.entropy_bins = obj["entropy_bins"].get<int>();
    if (d.entropy_bins < 10) {
      throw ConfigError("'diagnostics.entropy_bins' must be >= 10");
    }
  }
  if (obj.contains("coercivity_spotcheck")) {
    d.coercivity_spotcheck = obj["coercivity_spotcheck"].get<bool>();
  }
  if (obj.contains("coercivity_probes")) {
    d.coercivity_probes = obj["coercivity_probes"].get<int>();
  }
  return d;
}

}  // namespace detail

// Parse and validate the JSON run configuration; defaults are m = 1, kB = 1,
// isotropic b, delta = 1, seed = 0.
inline RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  detail::reject_unknown(
      root,
      {"command", "model", "gamma", "alpha", "m", "kB", "angular",
       "bound_variant", "n_particles", "t_end", "dt_report", "seed",
       "replicas", "delta", "init", "diagnostics", "scan_k", "out", "csv",
       "verbosity", "quick"},
      "");
  RunConfig rc;
  if (!root.contains("command")) throw ConfigError("missing key 'command'");
  const std::string cmd = root["command"].get<std::string>();
  if (cmd == "simulate") rc.command = Command::Simulate;
  else if (cmd == "constants") rc.command = Command::Constants;
  else if (cmd == "verify") rc.command = Command::Verify;
  else if (cmd == "sample-eq") rc.command = Command::SampleEq;
  else {
    throw ConfigError("'command' must be one of simulate, constants, "
                      "verify, sample-eq");
  }
  rc.sim.model = detail::parse_model(root);
  rc.sim.delta = detail::get_number(root, "delta", "", 1.0);
  if (!(rc.sim.delta > 0.0)) throw ConfigError("'delta' must be > 0");
  if (root.contains("seed")) rc.sim.seed = root["seed"].get<std::uint64_t>();
  if (root.contains("n_particles")) {
    const auto n = root["n_particles"].get<long long>();
    if (n < 2) throw ConfigError("'n_particles' must be >= 2");
    rc.sim.n_particles = std::size_t(n);
  }
  if (root.contains("t_end")) {
    rc.sim.t_end = root["t_end"].get<double>();
    if (!(rc.sim.t_end > 0.0)) throw ConfigError("'t_end' must be > 0");
  }
  if (root.contains("dt_report")) {
    rc.sim.dt_report = root["dt_report"].get<double>();
    if (!(rc.sim.dt_report > 0.0)) throw ConfigError("'dt_report' must be > 0");
  }
  if (root.contains("replicas")) {
    rc.sim.replicas = root["replicas"].get<int>();
    if (rc.sim.replicas < 1) throw ConfigError("'replicas' must be >= 1");
  }
  if (root.contains("init")) rc.sim.init = detail::parse_init(root["init"]);
  if (root.contains("diagnostics")) {
    rc.sim.diagnostics = detail::parse_diagnostics(root["diagnostics"]);
  }
  if (root.contains("scan_k")) {
    const json& s = root["scan_k"];
    detail::reject_unknown(s, {"k_min", "k_max", "gammas", "alphas"},
                           "scan_k.");
    ScanK sk;
    sk.k_min = detail::get_number(s, "k_min", "scan_k.", 2.0);
    sk.k_max = detail::get_number(s, "k_max", "scan_k.", 40.0);
    if (s.contains("gammas")) sk.gammas = s["gammas"].get<std::vector<double>>();
    if (s.contains("alphas")) sk.alphas = s["alphas"].get<std::vector<double>>();
    rc.scan_k = sk;
  }
  if (root.contains("out")) rc.out_path = root["out"].get<std::string>();
  if (root.contains("csv")) rc.csv_path = root["csv"].get<std::string>();
  if (root.contains("verbosity")) rc.verbosity = root["verbosity"].get<int>();
  if (root.contains("quick")) rc.quick = root["quick"].get<bool>();
  return rc;
}

inline Ensemble load_custom_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open custom init file '" + path + "'");
  Ensemble ens;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& ch : line) {
      if (ch == ',' || ch == ';') ch = ' ';
    }
    std::istringstream ss(line);
    MolecularState s;
    if (ss >> s.v[0] >> s.v[1] >> s.v[2] >> s.I) {
      if (!s.valid()) throw ConfigError("invalid particle row in '" + path + "'");
      ens.particles.push_back(s);
    }
  }
  if (ens.particles.size() < 2) {
    throw ConfigError("custom init '" + path + "' holds fewer than 2 rows");
  }
  ens.weight = 1.0 / double(ens.particles.size());
  return ens;
}

// --- report serialization ----------------------------------------------------

inline json report_to_json(const MomentReport& rep) {
  json j;
  j["t"] = rep.time;
  j["rho"] = rep.mass_density;
  j["U"] = {rep.momentum[0] / rep.mass_density,
            rep.momentum[1] / rep.mass_density,
            rep.momentum[2] / rep.mass_density};
  j["E_tot"] = rep.total_energy;
  json m = json::object();
  for (const auto& [k, v] : rep.poly_moments) {
    std::ostringstream key;
    key << k;
    m[key.str()] = v;
  }
  j["m"] = m;
  if (!rep.exp_moments.empty()) {
    json arr = json::array();
    for (const auto& [sb, val] : rep.exp_moments) {
      arr.push_back({{"s", sb.first},
                     {"beta", sb.second},
                     {"value", val.overflow ? json() : json(val.value)},
                     {"overflow", val.overflow}});
    }
    j["exp"] = arr;
  }
  j["entropy"] = rep.entropy_estimate ? json(*rep.entropy_estimate) : json();
  j["replica"] = rep.replica;
  return j;
}

inline std::string csv_header(const std::vector<double>& moment_orders) {
  std::ostringstream os;
  os << "t,rho,Ux,Uy,Uz,E_tot";
  for (double k : moment_orders) os << ",m_" << k;
  os << ",entropy,replica";
  return os.str();
}

inline std::string csv_row(const MomentReport& rep) {
  std::ostringstream os;
  os.precision(17);
  const double rho = rep.mass_density;
  os << rep.time << ',' << rho << ',' << rep.momentum[0] / rho << ','
     << rep.momentum[1] / rho << ',' << rep.momentum[2] / rho << ','
     << rep.total_energy;
  for (const auto& [k, v] : rep.poly_moments) os << ',' << v;
  os << ',';
  if (rep.entropy_estimate) os << *rep.entropy_estimate;
  os << ',' << rep.replica;
  return os.str();
}

// Constants document: the model averages plus, when a full simulation
// configuration is at hand, the threshold/moment-bound constants derived
// from it.  parse_constants_document inverts the model part exactly.
inline json constants_document(const models::ModelSpec& spec,
                               const models::ModelConstants& consts) {
  json j;
  j["model"] = models::to_string(spec.model);
  j["gamma"] = spec.gamma;
  j["alpha"] = spec.params.alpha;
  j["m"] = spec.params.m;
  j["c_lb"] = consts.c_lb_r;
  j["c_ub"] = consts.c_ub_r;
  j["C_lb"] = consts.C_lb_R;
  j["C_ub"] = consts.C_ub_R;
  j["kappa_lb"] = consts.kappa_lb;
  j["kappa_ub"] = consts.kappa_ub;
  return j;
}

// Extended document: threshold and moment-bound constants computed from the
// configured initial state (sampled once with the configured seed).
inline json constants_document_full(const dsmc::SimConfig& sim) {
  const auto& spec = sim.model;
  const auto consts = models::partition_constants(spec);
  json j = constants_document(spec, consts);
  j["delta"] = sim.delta;
  if (spec.params.alpha >= 0.0) {
    j["c_star"] = analysis::threshold_cstar(spec, consts);
    j["kbar_star"] = analysis::find_kbar_star(spec, consts);
  }
  Rng rng(sim.seed, 0);
  Ensemble ens = sim.init.kind == dsmc::InitSpec::Kind::Custom
                     ? load_custom_ensemble(sim.init.custom_path)
                     : dsmc::init_ensemble(sim.init, sim.n_particles,
                                           spec.params, rng);
  shift_to_com(ens);
  const double m0 = poly_moment(ens, 0.0, spec.params);
  const double m1 = poly_moment(ens, 1.0, spec.params);
  j["initial_moments"] = {{"m0", m0}, {"m1", m1}};
  auto coer = dsmc::coercivity_data_from_ensemble(ens, spec.params, sim.delta);
  analysis::coercivity_clb(coer, spec.gamma);
  j["coercivity"] = {{"M_l", coer.M_l},       {"M_u", coer.M_u},
                     {"E_l", coer.E_l},       {"E_u", coer.E_u},
                     {"Delta", coer.Delta},   {"rho_star", coer.rho_star},
                     {"S", coer.S_of_rho},    {"c_lb", coer.c_lb}};
  if (spec.params.alpha >= 0.0) {
    auto coeffs = analysis::make_moment_coeffs(spec, consts, coer, m0, m1);
    json mb;
    mb["k_star"] = coeffs.k_star;
    mb["C_kstar"] = coeffs.C_kstar;
    mb["A_kstar"] = coeffs.A_kstar;
    mb["eps"] = coeffs.eps;
    json per_k = json::array();
    for (double k : {coeffs.k_star, coeffs.k_star + 2.0}) {
      const auto& e = analysis::moment_coeffs(coeffs, spec, consts, k);
      per_k.push_back({{"k", e.k},
                       {"C_k", e.C_k},
                       {"eta_k", e.eta_k},
                       {"theta_k", e.theta_k},
                       {"log_B_k", e.log_B_k}});
    }
    mb["entries"] = per_k;
    j["moment_bounds"] = mb;
  }
  return j;
}

// (k, C_k^inf, C_k, threshold flag) scan over a (gamma, alpha) grid.
inline void write_scan_csv(std::ostream& os, const models::ModelSpec& base,
                           const ScanK& scan) {
  std::vector<double> gammas = scan.gammas;
  if (gammas.empty()) {
    for (int i = 1; i <= 20; ++i) gammas.push_back(0.1 * i);
  }
  std::vector<double> alphas = scan.alphas;
  if (alphas.empty()) alphas = {0.0, 0.5};
  os << "model,gamma,alpha,k,C_k_inf,C_k,below_kappa_lb\n";
  os.precision(17);
  for (double gamma : gammas) {
    for (double alpha : alphas) {
      models::ModelSpec spec = base;
      spec.gamma = gamma;
      spec.params.alpha = alpha;
      const auto consts = models::partition_constants(spec);
      for (double k = scan.k_min; k <= scan.k_max + 1e-12; k += 1.0) {
        const double cinf = analysis::povzner_cinf(k);
        const double ck = analysis::povzner_ck(k, spec, consts);
        os << models::to_string(spec.model) << ',' << gamma << ',' << alpha
           << ',' << k << ',' << cinf << ',' << ck << ','
           << (ck < consts.kappa_lb ? 1 : 0) << '\n';
      }
    }
  }
}

struct ConstantsRoundTrip {
  models::Model model;
  double gamma, alpha, m;
  models::ModelConstants consts;
  bool operator==(const ConstantsRoundTrip&) const = default;
};

inline ConstantsRoundTrip parse_constants_document(const json& j) {
  ConstantsRoundTrip c{};
  c.model = detail::parse_model_name(j.at("model").get<std::string>(), "model");
  c.gamma = j.at("gamma").get<double>();
  c.alpha = j.at("alpha").get<double>();
  c.m = j.at("m").get<double>();
  c.consts.c_lb_r = j.at("c_lb").get<double>();
  c.consts.c_ub_r = j.at("c_ub").get<double>();
  c.consts.C_lb_R = j.at("C_lb").get<double>();
  c.consts.C_ub_R = j.at("C_ub").get<double>();
  c.consts.kappa_lb = j.at("kappa_lb").get<double>();
  c.consts.kappa_ub = j.at("kappa_ub").get<double>();
  return c;
}

}  // namespace polykin::cfg
