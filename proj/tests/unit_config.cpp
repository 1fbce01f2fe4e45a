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

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "polykin/config.hpp"

using namespace polykin;

TEST_CASE("minimal constants config applies the defaults") {
  const auto rc = cfg::parse_config(
      R"({"command":"constants","model":"Model1","gamma":2,"alpha":0})");
  CHECK(rc.command == cfg::Command::Constants);
  CHECK(rc.sim.model.params.m == 1.0);
  CHECK(rc.sim.model.params.kB == 1.0);
  CHECK(rc.sim.model.angular.is_isotropic());
  CHECK(rc.sim.delta == 1.0);
  CHECK(rc.sim.seed == 0);
}

TEST_CASE("config violations name the constraint") {
  SECTION("gamma outside (0, 2]") {
    try {
      cfg::parse_config(
          R"({"command":"constants","model":"Model1","gamma":2.5,"alpha":0})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("(0, 2]") != std::string::npos);
    }
  }
  SECTION("alpha at the monatomic limit") {
    try {
      cfg::parse_config(
          R"({"command":"constants","model":"Model1","gamma":2,"alpha":-1})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("> -1") != std::string::npos);
    }
  }
  SECTION("unknown model") {
    CHECK_THROWS_AS(
        cfg::parse_config(
            R"({"command":"constants","model":"Model9","gamma":2,"alpha":0})"),
        ConfigError);
  }
  SECTION("unknown keys are rejected with their path") {
    try {
      cfg::parse_config(
          R"({"command":"constants","model":"Model1","gamma":2,"alpha":0,
              "init":{"kind":"Equilibrium","T":1,"bogus":3}})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("init.bogus") != std::string::npos);
    }
  }
  SECTION("negative temperature") {
    CHECK_THROWS_AS(
        cfg::parse_config(
            R"({"command":"simulate","model":"Model1","gamma":2,"alpha":0,
                "init":{"kind":"Equilibrium","T":-1}})"),
        ConfigError);
  }
}

TEST_CASE("full simulate config parses") {
  const auto rc = cfg::parse_config(R"({
    "command": "simulate",
    "model": "Model2", "gamma": 1.5, "alpha": 0.5, "m": 2.0,
    "angular": "isotropic", "bound_variant": "product",
    "n_particles": 5000, "t_end": 2.0, "dt_report": 0.5,
    "seed": 42, "replicas": 3, "delta": 1.5,
    "init": {"kind": "TwoTemperature", "T_kin": 2.0, "T_int": 0.5},
    "diagnostics": {"moments": [1, 2, 3], "entropy": true,
                    "exp_moments": [{"s": 1.0, "beta": 0.1}]},
    "out": "reports.jsonl", "csv": "reports.csv"
  })");
  CHECK(rc.command == cfg::Command::Simulate);
  CHECK(rc.sim.model.model == models::Model::Model2);
  CHECK(rc.sim.model.bound_variant == models::BoundVariant::Product);
  CHECK(rc.sim.n_particles == 5000);
  CHECK(rc.sim.replicas == 3);
  CHECK(rc.sim.init.kind == dsmc::InitSpec::Kind::TwoTemperature);
  CHECK(rc.sim.diagnostics.exp_moments.size() == 1);
  CHECK(rc.out_path == "reports.jsonl");
}

TEST_CASE("constants document round-trips") {
  models::ModelSpec spec;
  spec.model = models::Model::Model2;
  spec.gamma = 1.25;
  spec.params = {1.5, 0.5, 1.0};
  const auto consts = models::partition_constants(spec);
  const auto doc = cfg::constants_document(spec, consts);
  const auto parsed =
      cfg::parse_constants_document(cfg::json::parse(doc.dump()));
  CHECK(parsed.model == spec.model);
  CHECK(parsed.gamma == spec.gamma);
  CHECK(parsed.alpha == spec.params.alpha);
  CHECK(parsed.m == spec.params.m);
  CHECK(parsed.consts == consts);
}

TEST_CASE("report serialization") {
  MomentReport rep;
  rep.time = 0.5;
  rep.mass_density = 1.0;
  rep.momentum = {0.1, 0.0, -0.1};
  rep.total_energy = 3.25;
  rep.poly_moments = {{1.0, 4.5}, {2.0, 30.0}};
  rep.exp_moments[{1.0, 0.1}] = {1.5, false};
  rep.entropy_estimate = -2.5;
  const auto j = cfg::report_to_json(rep);
  CHECK(j["t"] == 0.5);
  CHECK(j["rho"] == 1.0);
  CHECK(j["m"]["1"] == 4.5);
  CHECK(j["entropy"] == -2.5);
  const auto header = cfg::csv_header({1.0, 2.0});
  CHECK(header == "t,rho,Ux,Uy,Uz,E_tot,m_1,m_2,entropy,replica");
  const auto row = cfg::csv_row(rep);
  CHECK(row.find("0.5,1,") == 0);
}

TEST_CASE("custom ensemble loader") {
  const std::string path = "custom_particles_test.csv";
  {
    std::ofstream out(path);
    out << "0.1, 0.2, 0.3, 0.4\n";
    out << "-1 0 1 2.5\n";
  }
  const auto ens = cfg::load_custom_ensemble(path);
  CHECK(ens.particles.size() == 2);
  CHECK(ens.particles[1].I == 2.5);
  CHECK(ens.weight == 0.5);
  std::remove(path.c_str());
  CHECK_THROWS_AS(cfg::load_custom_ensemble("no_such_file.csv"), ConfigError);
}

TEST_CASE("scan CSV covers the grid") {
  models::ModelSpec base;
  base.model = models::Model::Model1;
  base.gamma = 2.0;
  base.params = {1.0, 0.0, 1.0};
  cfg::ScanK scan;
  scan.k_min = 2.0;
  scan.k_max = 6.0;
  scan.gammas = {1.0, 2.0};
  scan.alphas = {0.0};
  std::ostringstream os;
  cfg::write_scan_csv(os, base, scan);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "model,gamma,alpha,k,C_k_inf,C_k,below_kappa_lb");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 2 * 1 * 5);
}
