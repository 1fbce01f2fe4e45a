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

// Command-line front end: simulate | constants | verify | sample-eq.
// Exit codes: 0 success, 1 verification failure, 2 diagnostic-invariant
// violation, 3 configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "polykin/polykin.hpp"
#include "polykin/verify.hpp"

namespace {

constexpr const char* kConfigHelp = R"(JSON configuration keys:
  command       simulate | constants | verify | sample-eq
  model         Model1 | Model2 | Model3
  gamma         kernel rate exponent, in (0, 2]
  alpha         internal-structure exponent, > -1 (D = 2 alpha + 5)
  m             molecular mass, > 0 (default 1)
  kB            Boltzmann constant, > 0 (default 1)
  angular       "isotropic" (default) or {"table": [pdf values over cos]}
  bound_variant "minmax" (default) or "product" envelope factors
  n_particles   ensemble size, >= 2
  t_end         simulated time, > 0
  dt_report     report interval, > 0
  seed          RNG seed (default 0); replicas use streams seed+replica
  replicas      independent replicas (default 1)
  delta         coercivity semi-moment order parameter (default 1.0)
  init          {"kind": "Equilibrium", "T": ...}
                {"kind": "TwoTemperature", "T_kin": ..., "T_int": ...}
                {"kind": "BimodalBeams", "speed": ..., "T_int": ...}
                {"kind": "Custom", "file": "particles.csv"}
  diagnostics   {"moments": [k...], "exp_moments": [{"s":..,"beta":..}],
                 "entropy": bool, "entropy_bins": int,
                 "coercivity_spotcheck": bool, "coercivity_probes": int}
  scan_k        {"k_min":.., "k_max":.., "gammas":[..], "alphas":[..]}
  out, csv      output paths (JSON-lines and CSV mirrors)
Environment: POLYKIN_THREADS caps replica worker threads.)";

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw polykin::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int thread_cap() {
  if (const char* env = std::getenv("POLYKIN_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : int(hc);
}

int cmd_simulate(const polykin::cfg::RunConfig& rc) {
  using namespace polykin;
  const auto& sim = rc.sim;
  Ensemble custom;
  const bool is_custom = sim.init.kind == dsmc::InitSpec::Kind::Custom;
  if (is_custom) custom = cfg::load_custom_ensemble(sim.init.custom_path);
  std::vector<dsmc::RunResult> results(std::size_t(sim.replicas));
  const int workers = std::min(thread_cap(), sim.replicas);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t rep = std::size_t(w); rep < results.size();
           rep += std::size_t(workers)) {
        results[rep] = dsmc::run(sim, int(rep), is_custom ? &custom : nullptr);
      }
    });
  }
  for (auto& t : pool) t.join();

  std::ofstream out_json;
  if (!rc.out_path.empty()) {
    out_json.open(rc.out_path);
    if (!out_json) throw ConfigError("cannot open '" + rc.out_path + "'");
  }
  std::ofstream out_csv;
  if (!rc.csv_path.empty()) {
    out_csv.open(rc.csv_path);
    if (!out_csv) throw ConfigError("cannot open '" + rc.csv_path + "'");
    out_csv << cfg::csv_header(sim.diagnostics.moment_orders) << '\n';
  }
  bool violated = false;
  int replica = 0;
  for (const auto& res : results) {
    for (const auto& rep : res.reports) {
      const auto j = cfg::report_to_json(rep);
      if (out_json.is_open()) out_json << j.dump() << '\n';
      else if (rc.verbosity > 0) std::cout << j.dump() << '\n';
      if (out_csv.is_open()) out_csv << cfg::csv_row(rep) << '\n';
      if (!rep.moments_monotone()) violated = true;
    }
    // closing summary record with the sampler statistics
    {
      const auto& m = res.majorant;
      cfg::json s;
      s["summary"] = true;
      s["replica"] = replica++;
      s["collisions"] = res.final_ensemble.collision_tally;
      s["candidates"] = m.candidates;
      s["accepted"] = m.accepted;
      s["param_trials"] = m.param_trials;
      s["majorant_violations"] = m.violations;
      s["momentum_drift"] = res.momentum_drift;
      s["energy_drift"] = res.energy_drift;
      s["mean_free_time"] = res.mean_free_time;
      if (res.spotcheck_done) {
        s["coercivity_violations"] = res.spotcheck_violations;
        s["coercivity_min_margin"] = res.spotcheck_min_margin;
      }
      if (out_json.is_open()) out_json << s.dump() << '\n';
      else if (rc.verbosity > 0) std::cout << s.dump() << '\n';
    }
    if (!res.conservation_ok) violated = true;
    if (res.spotcheck_done && res.spotcheck_violations > 0) violated = true;
    if (rc.verbosity > 0) {
      const auto& m = res.majorant;
      std::cerr << "replica done: collisions "
                << res.final_ensemble.collision_tally << ", candidates "
                << m.candidates << ", acceptance "
                << (m.candidates
                        ? double(m.accepted) / double(m.candidates)
                        : 0.0)
                << ", majorant violations " << m.violations
                << ", momentum drift " << res.momentum_drift
                << ", energy drift " << res.energy_drift
                << ", mean free time " << res.mean_free_time << '\n';
    }
    if (res.entropy_disabled) {
      std::cerr << "warning: entropy diagnostic disabled for anisotropic "
                   "custom input\n";
    }
  }
  return violated ? 2 : 0;
}

int cmd_constants(const polykin::cfg::RunConfig& rc) {
  using namespace polykin;
  if (rc.scan_k) {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!rc.out_path.empty()) {
      file.open(rc.out_path);
      if (!file) throw ConfigError("cannot open '" + rc.out_path + "'");
      os = &file;
    }
    cfg::write_scan_csv(*os, rc.sim.model, *rc.scan_k);
    return 0;
  }
  const auto doc = cfg::constants_document_full(rc.sim);
  if (!rc.out_path.empty()) {
    std::ofstream file(rc.out_path);
    if (!file) throw ConfigError("cannot open '" + rc.out_path + "'");
    file << doc.dump(2) << '\n';
  } else {
    std::cout << doc.dump(2) << '\n';
  }
  return 0;
}

int cmd_verify(const polykin::cfg::RunConfig& rc, bool have_config) {
  using namespace polykin;
  auto scale = rc.quick ? verify::Scale::quick() : verify::Scale::full();
  if (have_config) {
    scale.n_particles = rc.sim.n_particles;
    scale.seed = rc.sim.seed == 0 ? scale.seed : rc.sim.seed;
  }
  std::vector<verify::CheckResult> checks;
  checks.push_back(verify::check_conservation_involution(
      scale.n_conservation, scale.seed));
  checks.push_back(verify::check_jacobian_fd(scale.n_jacobian, scale.seed));
  checks.push_back(verify::check_weight_invariance(scale.n_weight, scale.seed));
  checks.push_back(verify::check_povzner_closed_form());
  checks.push_back(verify::check_threshold_model1());
  checks.push_back(verify::check_model1_constants());
  checks.push_back(verify::check_sandwich(scale.n_sandwich, scale.seed));
  checks.push_back(verify::check_bracket_envelope(scale.n_sandwich, scale.seed));
  checks.push_back(verify::check_microreversibility(
      std::max<std::uint64_t>(scale.n_sandwich / 10, 1000), scale.seed));
  checks.push_back(verify::check_energy_split(scale.n_weight, scale.seed));
  checks.push_back(verify::check_bernoulli());
  checks.push_back(verify::check_coercivity_formula());
  checks.push_back(verify::check_bound_factor_values());
  if (!rc.quick) {
    checks.push_back(verify::check_equilibrium_stationarity(
        scale.n_particles, scale.equilibrium_mft, 0.0, scale.seed));
    checks.push_back(verify::check_equilibrium_stationarity(
        scale.n_particles, scale.equilibrium_mft, 0.5, scale.seed));
    auto relax = verify::check_relaxation(scale.n_particles,
                                          scale.relaxation_mft,
                                          scale.relaxation_replicas,
                                          scale.seed);
    checks.push_back(relax.temperature);
    checks.push_back(relax.h_theorem);
    checks.push_back(relax.moment_envelopes);
    checks.push_back(verify::check_equilibrium_entropy(
        scale.n_particles, scale.equilibrium_mft, scale.seed));
    checks.push_back(verify::check_povzner_mc(
        20000, scale.povzner_pairs, scale.povzner_inner, scale.seed));
    checks.push_back(verify::check_coercivity_spotcheck(
        20000, scale.coercivity_probes, scale.seed));
    checks.push_back(verify::check_sample_params_stats(
        scale.n_param_stats, scale.n_param_chi2, scale.seed));
    checks.push_back(verify::check_exp_rates(scale.seed));
  }
  bool all = true;
  for (const auto& c : checks) {
    polykin::cfg::json j;
    j["check"] = c.name;
    j["pass"] = c.pass;
    j["detail"] = c.detail;
    j["seconds"] = c.seconds;
    std::cout << j.dump() << '\n';
    all = all && c.pass;
  }
  return all ? 0 : 1;
}

int cmd_sample_eq(std::size_t n, double T, double alpha, double m, double kB,
                  std::uint64_t seed, const std::string& out_path) {
  using namespace polykin;
  GasParams params{m, alpha, kB};
  params.validate();
  if (!(T > 0.0)) throw ConfigError("sample-eq: T must be > 0");
  const auto ens = dsmc::sample_equilibrium(n, T, params, seed);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot open '" + out_path + "'");
    out.precision(17);
    out << "vx,vy,vz,I\n";
    for (const auto& s : ens.particles) {
      out << s.v[0] << ',' << s.v[1] << ',' << s.v[2] << ',' << s.I << '\n';
    }
  }
  const auto obs = observables(ens, params);
  cfg::json j;
  j["n"] = n;
  j["T"] = T;
  j["rho"] = obs.rho;
  j["U"] = {obs.U[0], obs.U[1], obs.U[2]};
  j["internal_energy_density"] = obs.internal_energy;
  j["T_equiv"] = obs.T_equiv;
  std::cout << j.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "polykin: space-homogeneous Boltzmann solver for a polyatomic gas "
      "with continuous internal energy"};
  app.footer(kConfigHelp);
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path, scan_spec, gammas_csv,
      alphas_csv;
  std::uint64_t seed = 0;
  bool seed_set = false, quick = false;
  int replicas = 0;

  auto* sim = app.add_subcommand("simulate", "run the particle solver");
  sim->add_option("--config", config_path, "JSON run configuration")
      ->required();
  sim->add_option("--out", out_path, "JSON-lines report stream");
  sim->add_option("--csv", csv_path, "CSV report mirror");
  sim->add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_set = true; });
  sim->add_option("--replicas", replicas, "override the replica count");

  auto* con = app.add_subcommand(
      "constants", "emit the model/threshold/moment constants as JSON");
  con->add_option("--config", config_path, "JSON run configuration")
      ->required();
  con->add_option("--out", out_path, "output path (default stdout)");
  con->add_option("--scan-k", scan_spec,
                  "kmin:kmax -- emit a (k, C_k_inf, C_k, flag) CSV over the "
                  "(gamma, alpha) grid");
  con->add_option("--gammas", gammas_csv, "comma list for the scan grid");
  con->add_option("--alphas", alphas_csv, "comma list for the scan grid");

  auto* ver = app.add_subcommand("verify", "run the invariant suite");
  ver->add_option("--config", config_path, "JSON run configuration");
  ver->add_flag("--quick", quick,
                "deterministic 1e-12-precision checks only (< 10 s)");

  std::size_t eq_n = 100000;
  double eq_T = 1.0, eq_alpha = 0.0, eq_m = 1.0, eq_kB = 1.0;
  auto* smp = app.add_subcommand("sample-eq",
                                 "draw a Maxwellian equilibrium sample");
  smp->add_option("--n", eq_n, "number of particles");
  smp->add_option("--T", eq_T, "temperature");
  smp->add_option("--alpha", eq_alpha, "internal-structure exponent");
  smp->add_option("--m", eq_m, "molecular mass");
  smp->add_option("--kB", eq_kB, "Boltzmann constant");
  smp->add_option("--seed", seed, "RNG seed");
  smp->add_option("--out", out_path, "CSV particle dump path");

  CLI11_PARSE(app, argc, argv);

  try {
    polykin::cfg::RunConfig rc;
    if (!config_path.empty()) {
      rc = polykin::cfg::parse_config(read_file(config_path));
    }
    if (seed_set) rc.sim.seed = seed;
    if (replicas > 0) rc.sim.replicas = replicas;
    if (!out_path.empty()) rc.out_path = out_path;
    if (!csv_path.empty()) rc.csv_path = csv_path;
    rc.quick = rc.quick || quick;
    if (!scan_spec.empty()) {
      polykin::cfg::ScanK sk;
      const auto colon = scan_spec.find(':');
      if (colon == std::string::npos) {
        throw polykin::ConfigError("--scan-k expects kmin:kmax");
      }
      sk.k_min = std::stod(scan_spec.substr(0, colon));
      sk.k_max = std::stod(scan_spec.substr(colon + 1));
      const auto parse_list = [](const std::string& text) {
        std::vector<double> out;
        std::istringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
        return out;
      };
      if (!gammas_csv.empty()) sk.gammas = parse_list(gammas_csv);
      if (!alphas_csv.empty()) sk.alphas = parse_list(alphas_csv);
      rc.scan_k = sk;
    }

    if (sim->parsed()) return cmd_simulate(rc);
    if (con->parsed()) return cmd_constants(rc);
    if (ver->parsed()) return cmd_verify(rc, !config_path.empty());
    if (smp->parsed()) {
      return cmd_sample_eq(eq_n, eq_T, eq_alpha, eq_m, eq_kB, seed, out_path);
    }
  } catch (const polykin::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
