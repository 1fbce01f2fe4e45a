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

#include <cmath>

#include "polykin/analysis.hpp"
#include "polykin/oracles.hpp"
#include "polykin/rng.hpp"

using namespace polykin;

namespace {

models::ModelSpec model1_spec(double gamma = 2.0, double alpha = 0.0) {
  models::ModelSpec spec;
  spec.model = models::Model::Model1;
  spec.gamma = gamma;
  spec.params = {1.0, alpha, 1.0};
  return spec;
}

// Synthetic coefficient set with order-one constants, for the envelope laws.
analysis::MomentBoundCoeffs synthetic_coeffs(double A, double gamma) {
  analysis::MomentBoundCoeffs mc;
  mc.gamma = gamma;
  mc.m0 = mc.m1 = 1.0;
  mc.A_kstar = A;
  mc.k_star = 2.0;
  return mc;
}

analysis::MomentEntry synthetic_entry(double k, double B, double A,
                                      double gamma) {
  analysis::MomentEntry e;
  e.k = k;
  e.B_k = B;
  e.log_B_k = std::log(B);
  e.bern_a = A;
  e.bern_b = B;
  e.bern_c = 0.5 * gamma / k;
  return e;
}

}  // namespace

TEST_CASE("manifold-average closed form") {
  CHECK(analysis::povzner_cinf(2.0) ==
        Catch::Approx(31.0 / 48.0).margin(4e-16));
  CHECK(analysis::povzner_cinf(1.0) ==
        Catch::Approx(19.0 / 24.0).margin(4e-16));
  SECTION("exact rational reduction at k = 2") {
    // 1/(k+1) = 1/3; 2k/((k+1)(k+2)) = 4/12 = 1/3; 1 - 2^-4 = 15/16.
    // 1/3 + (1/3)(15/16) = 16/48 + 15/48 = 31/48.
    const long long num = 16 + 15;
    const long long den = 48;
    CHECK(num == 31);
    CHECK(analysis::povzner_cinf(2.0) ==
          Catch::Approx(double(num) / double(den)).margin(4e-16));
  }
  SECTION("matches direct 2-D quadrature") {
    for (double k : {1.5, 2.0, 5.0}) {
      CHECK(std::abs(analysis::povzner_cinf(k) -
                     oracles::povzner_cinf_quadrature(k)) < 1e-10);
    }
  }
  SECTION("decreases to zero") {
    double prev = analysis::povzner_cinf(2.0);
    for (int k = 3; k <= 200; ++k) {
      const double cur = analysis::povzner_cinf(double(k));
      CHECK(cur < prev);
      prev = cur;
    }
    CHECK(prev < 0.02);
  }
}

TEST_CASE("contracting constant C_k") {
  const auto spec = model1_spec();
  const auto consts = models::partition_constants(spec);
  SECTION("isotropic Model 1 at alpha = 0 collapses to 2 C_ub cinf(k)") {
    for (double k : {2.0, 5.0, 11.5}) {
      CHECK(analysis::povzner_ck(k, spec, consts) ==
            Catch::Approx(2.0 * (4.0 / 15.0) * analysis::povzner_cinf(k))
                .epsilon(1e-13));
    }
  }
  SECTION("monotone decreasing in k") {
    CHECK(analysis::povzner_ck(2.0, spec, consts) >
          analysis::povzner_ck(5.0, spec, consts));
    CHECK(analysis::povzner_ck(5.0, spec, consts) >
          analysis::povzner_ck(10.0, spec, consts));
    const auto table =
        analysis::make_povzner_table(spec, consts, {2, 3, 5, 8, 13, 21});
    CHECK(table.C.size() == 6);
  }
  SECTION("Monte Carlo table variant tracks the closed form") {
    const auto mc_table = analysis::make_povzner_table(
        spec, consts, {2.0, 6.0, 14.0},
        std::numeric_limits<double>::infinity(),
        analysis::PovznerTable::Variant::MonteCarlo, 200000, 17, 2);
    for (const auto& [k, ck] : mc_table.C) {
      // the MC value is the true manifold average; the closed form bounds it
      CHECK(ck <= analysis::povzner_ck(k, spec, consts) * 1.01);
      CHECK(ck > 0.2 * analysis::povzner_ck(k, spec, consts));
    }
    // reproducible at a fixed worker count
    const double again = analysis::povzner_ck_mc(6.0, spec, consts, 200000,
                                                 17, 2);
    CHECK(again == mc_table.C.at(6.0));
  }
  SECTION("Monte Carlo manifold average stays below the closed form") {
    Rng rng(41, 0);
    for (double k : {2.0, 5.0, 10.0}) {
      const auto mc = oracles::povzner_ck_mc(k, spec, consts, 200000, rng);
      CHECK(mc.value <= analysis::povzner_ck(k, spec, consts) +
                            4.0 * mc.std_err);
    }
  }
  SECTION("finite p route approaches the sup route") {
    const double c_inf = analysis::povzner_ck(5.0, spec, consts);
    const double c_p = analysis::povzner_ck(5.0, spec, consts, 64.0);
    CHECK(c_p == Catch::Approx(c_inf).epsilon(0.25));
  }
  SECTION("negative alpha has no sup route") {
    const auto spec_neg = model1_spec(2.0, -0.5);
    const auto consts_neg = models::partition_constants(spec_neg);
    CHECK_THROWS_AS(analysis::povzner_ck(3.0, spec_neg, consts_neg),
                    DomainError);
  }
}

TEST_CASE("loss-dominance threshold") {
  const auto spec = model1_spec();
  const auto consts = models::partition_constants(spec);
  const double cstar = analysis::threshold_cstar(spec, consts);
  CHECK(cstar == Catch::Approx(0.125).margin(1e-12));
  CHECK(analysis::find_kbar_star(spec, consts) == 22);

  SECTION("threshold has no angular-norm dependence") {
    auto flat = spec;
    flat.angular = models::AngularFn::table_pdf({0.5, 0.5, 0.5});
    const auto consts_flat = models::partition_constants(flat);
    CHECK(analysis::threshold_cstar(flat, consts_flat) ==
          Catch::Approx(cstar).epsilon(1e-12));
  }
  SECTION("larger C* can only lower the threshold order") {
    auto boosted = consts;
    boosted.C_lb_R *= 2.0;  // doubles C*
    CHECK(analysis::find_kbar_star(spec, boosted) <=
          analysis::find_kbar_star(spec, consts));
  }
  SECTION("Model 2 threshold is positive and below one half") {
    models::ModelSpec m2 = spec;
    m2.model = models::Model::Model2;
    const auto k2 = models::partition_constants(m2);
    const double c2 = analysis::threshold_cstar(m2, k2);
    CHECK(c2 > 0.0);
    CHECK(c2 < 0.5);
  }
}

TEST_CASE("coercivity lower-bound constant") {
  analysis::CoercivityData base;
  base.M_l = base.M_u = base.E_l = base.E_u = base.Delta = 1.0;
  base.delta = 1.0;
  SECTION("gamma = 0 degenerates to two") {
    auto d = base;
    CHECK(analysis::coercivity_clb(d, 0.0) == 2.0);
  }
  SECTION("worked example at gamma = 2") {
    auto d = base;
    const double c = analysis::coercivity_clb(d, 2.0);
    CHECK(c == Catch::Approx(7.0 / 312.0).epsilon(1e-12));
    CHECK(d.rho_star == Catch::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-12));
    CHECK(d.S_of_rho > 1.0);
  }
  SECTION("nondecreasing in the lower mass and energy data") {
    double prev = 0.0;
    for (double x : {0.25, 0.5, 0.75, 1.0}) {
      auto d = base;
      d.M_l = x;
      d.E_l = x;
      const double c = analysis::coercivity_clb(d, 1.0);
      CHECK(c >= prev);
      prev = c;
    }
  }
  SECTION("vanishing data is rejected") {
    auto d = base;
    d.M_l = 0.0;
    CHECK_THROWS_AS(analysis::coercivity_clb(d, 1.0), DomainError);
  }
}

TEST_CASE("moment ODI coefficients") {
  const auto spec = model1_spec();
  const auto consts = models::partition_constants(spec);
  analysis::CoercivityData coer;
  coer.M_l = coer.M_u = coer.E_l = coer.E_u = coer.Delta = 1.0;
  coer.delta = 1.0;
  analysis::coercivity_clb(coer, spec.gamma);
  auto mc = analysis::make_moment_coeffs(spec, consts, coer, 1.0, 1.0);
  CHECK(mc.k_star == 22.0);
  CHECK(mc.A_kstar > 0.0);
  SECTION("theta_k < 1 for all k above the threshold") {
    for (double k : {22.0, 25.0, 40.0, 100.0}) {
      const auto& e = analysis::moment_coeffs(mc, spec, consts, k);
      CHECK(e.theta_k < 1.0);
      CHECK(e.eta_k > 0.0);
      CHECK(std::isfinite(e.log_B_k));
    }
  }
  SECTION("A_kstar decreases with the mass moment") {
    auto mc2 = analysis::make_moment_coeffs(spec, consts, coer, 2.0, 1.0);
    CHECK(mc2.A_kstar < mc.A_kstar);
  }
  SECTION("k below the threshold is rejected") {
    CHECK_THROWS_AS(analysis::moment_coeffs(mc, spec, consts, 3.0),
                    DomainError);
  }
}

TEST_CASE("generation rate scan rejects astronomically heavy data") {
  // With M_G at the size of a physical m_{k*}(0) the smallness condition
  // needs a tail index far beyond any scan bound.
  const auto spec = model1_spec();
  const auto consts = models::partition_constants(spec);
  analysis::CoercivityData coer;
  coer.M_l = coer.M_u = coer.E_l = coer.E_u = coer.Delta = 1.0;
  coer.delta = 1.0;
  analysis::coercivity_clb(coer, spec.gamma);
  auto mc = analysis::make_moment_coeffs(spec, consts, coer, 1.0, 1.0);
  CHECK_THROWS_AS(
      analysis::exp_rate_generation(mc, spec, consts, 1e24, 1000000),
      NoValidK0);
}

TEST_CASE("bernoulli envelope") {
  SECTION("stationary point is a fixed point") {
    const double y_star = std::pow(3.0 / 2.0, 1.0 / 0.7);
    for (double t : {0.0, 0.5, 3.0}) {
      CHECK(analysis::bernoulli_envelope(2.0, 3.0, 0.7, y_star, t) ==
            Catch::Approx(y_star).epsilon(1e-12));
    }
  }
  SECTION("long-time limit") {
    CHECK(analysis::bernoulli_envelope(2.0, 3.0, 0.7, 9.0, 500.0) ==
          Catch::Approx(std::pow(1.5, 1.0 / 0.7)).epsilon(1e-10));
  }
  SECTION("worked example against RK4") {
    const double y = analysis::bernoulli_envelope(1.0, 1.0, 1.0, 2.0, 1.0);
    CHECK(y == Catch::Approx(1.0 / (1.0 - 0.5 * std::exp(-1.0)))
                   .epsilon(1e-13));
    CHECK(y == Catch::Approx(oracles::rk4_bernoulli(1, 1, 1, 2.0, 1.0))
                   .epsilon(1e-9));
  }
}

TEST_CASE("generation and propagation envelopes") {
  auto mc = synthetic_coeffs(1.0, 2.0);
  const auto e = synthetic_entry(3.0, 2.0, 1.0, 2.0);
  SECTION("propagation keeps a large initial moment") {
    // (B/A)^(2k/gamma) = 8; any larger initial value wins the max
    CHECK(analysis::propagation_bound(mc, e, 10.0) == Catch::Approx(10.0));
    CHECK(analysis::propagation_bound(mc, e, 1.0) ==
          Catch::Approx(8.0).epsilon(1e-12));
  }
  SECTION("generation bound is flat past t = 1") {
    const double b1 = analysis::generation_bound(mc, e, 1.0);
    const double b2 = analysis::generation_bound(mc, e, 10.0);
    CHECK(b1 == Catch::Approx(b2).epsilon(1e-12));
    CHECK(analysis::generation_bound(mc, e, 0.1) > b1);
  }
  SECTION("generation bound dominates the Bernoulli flow from large data") {
    for (double t : {0.1, 1.0, 10.0}) {
      const double env =
          analysis::bernoulli_envelope(e.bern_a, e.bern_b, e.bern_c, 1e12, t);
      CHECK(analysis::generation_bound(mc, e, t) >= env);
    }
  }
}
