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

#include "polykin/core.hpp"
#include "polykin/dsmc.hpp"
#include "polykin/rng.hpp"

using namespace polykin;

namespace {
const GasParams kUnit{1.0, 0.0, 1.0};
}

TEST_CASE("bracket values") {
  CHECK(bracket({{0, 0, 0}, 0.0}, kUnit) == 1.0);
  CHECK(bracket({{1, 1, 0}, 0.0}, kUnit) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
  // 1 + |v|^2/2 + I/m = 1 + 2 + 3
  CHECK(bracket({{0, 0, 2}, 3.0}, kUnit) ==
        Catch::Approx(std::sqrt(6.0)).epsilon(1e-15));
}

TEST_CASE("bracket is >= 1 and monotone in |v| and I") {
  Rng rng(7, 0);
  for (int i = 0; i < 2000; ++i) {
    MolecularState s{{rng.normal(), rng.normal(), rng.normal()},
                     rng.gamma(1.0)};
    const double b = bracket(s, kUnit);
    CHECK(b >= 1.0);
    MolecularState faster = s;
    faster.v = 1.5 * s.v;
    MolecularState hotter = s;
    hotter.I = s.I + 0.7;
    CHECK(bracket(faster, kUnit) >= b);
    CHECK(bracket(hotter, kUnit) > b);
  }
}

TEST_CASE("poly_moment examples") {
  Ensemble ens;
  ens.weight = 1.0;
  ens.particles = {{{1, 0, 0}, 0.0}, {{0, 0, 0}, 1.0}};
  CHECK(poly_moment(ens, 0.0, kUnit) == 2.0);
  // brackets squared: 1.5 and 2 -> sum 3.5 at k = 1
  CHECK(poly_moment(ens, 1.0, kUnit) == Catch::Approx(3.5).epsilon(1e-15));

  Ensemble rest;
  rest.weight = 1.0;
  rest.particles = {{{0, 0, 0}, 0.0}};
  CHECK(poly_moment(rest, 5.0, kUnit) == 1.0);
}

TEST_CASE("poly_moment monotone in the order") {
  Rng rng(8, 0);
  Ensemble ens;
  ens.weight = 1e-3;
  for (int i = 0; i < 1000; ++i) {
    ens.particles.push_back(
        {{rng.normal(), rng.normal(), rng.normal()}, rng.gamma(1.5)});
  }
  double prev = 0.0;
  for (double k : {0.0, 0.5, 1.0, 2.0, 3.5, 6.0}) {
    const double mk = poly_moment(ens, k, kUnit);
    CHECK(mk >= prev);
    prev = mk;
  }
}

TEST_CASE("exp_moment examples") {
  Ensemble rest;
  rest.weight = 1.0;
  rest.particles = {{{0, 0, 0}, 0.0}};
  CHECK(exp_moment(rest, 1.0, 1.0, kUnit).value ==
        Catch::Approx(std::exp(1.0)).epsilon(1e-15));

  Ensemble one;
  one.weight = 1.0;
  one.particles = {{{std::sqrt(2.0), 0, 0}, 0.0}};  // bracket^2 = 2
  CHECK(exp_moment(one, 1.0, 0.5, kUnit).value ==
        Catch::Approx(std::exp(1.0)).epsilon(1e-14));

  // beta -> 0 recovers the mass
  Ensemble ens;
  ens.weight = 0.25;
  ens.particles = {{{1, 2, 0}, 0.5}, {{0, 0, 1}, 2.0}};
  const double mass = poly_moment(ens, 0.0, kUnit);
  CHECK(exp_moment(ens, 1.0, 1e-13, kUnit).value ==
        Catch::Approx(mass).epsilon(1e-10));

  // overflow reports +inf with the flag instead of trapping
  Ensemble hot;
  hot.weight = 1.0;
  hot.particles = {{{100.0, 0, 0}, 0.0}};
  const auto ov = exp_moment(hot, 1.0, 1000.0, kUnit);
  CHECK(ov.overflow);
  CHECK(std::isinf(ov.value));
}

TEST_CASE("exp_moment equals its moment series") {
  Rng rng(9, 0);
  Ensemble ens;
  ens.weight = 0.1;
  for (int i = 0; i < 50; ++i) {
    ens.particles.push_back(
        {{0.5 * rng.normal(), 0.5 * rng.normal(), 0.5 * rng.normal()},
         rng.gamma(1.0, 0.3)});
  }
  for (double s : {1.0, 0.5}) {
    const double beta = 0.3;
    const double direct = exp_moment(ens, s, beta, kUnit).value;
    double series = 0.0, term_scale = 1.0;
    for (int k = 0; k < 200; ++k) {
      const double term =
          term_scale * poly_moment(ens, s * double(k), kUnit);
      series += term;
      if (k > 2 && term < 1e-14 * series) break;
      term_scale *= beta / double(k + 1);
    }
    CHECK(direct == Catch::Approx(series).epsilon(1e-8));
  }
}

TEST_CASE("observables") {
  SECTION("all particles at rest with zero internal energy") {
    Ensemble ens;
    ens.weight = 1.0;
    ens.particles = {{{0, 0, 0}, 0.0}, {{0, 0, 0}, 0.0}};
    const auto obs = observables(ens, kUnit);
    CHECK(obs.internal_energy == 0.0);
    CHECK(obs.T_equiv == 0.0);
  }
  SECTION("single particle: energy splits into bulk and internal parts") {
    // In the frame of its own mean velocity a single particle carries only
    // its internal energy; the lab-frame total energy density is 3.
    Ensemble ens;
    ens.weight = 1.0;
    ens.particles = {{{2, 0, 0}, 1.0}};
    const auto obs = observables(ens, kUnit);
    CHECK(obs.U[0] == 2.0);
    CHECK(obs.internal_energy == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(obs.T_equiv == Catch::Approx(1.0 / 2.5).epsilon(1e-15));
    CHECK(total_energy(ens, kUnit) == Catch::Approx(3.0).epsilon(1e-15));
  }
  SECTION("equilibrium sample recovers its temperature") {
    GasParams g{1.0, 0.5, 1.0};
    const auto ens = dsmc::sample_equilibrium(100000, 1.0, g, 12345u);
    const auto obs = observables(ens, g);
    CHECK(std::abs(obs.T_equiv - 1.0) < 0.02);
  }
}

TEST_CASE("report moment monotonicity assertion") {
  MomentReport rep;
  rep.poly_moments = {{1.0, 2.0}, {2.0, 5.0}, {3.0, 20.0}};
  CHECK(rep.moments_monotone());
  rep.poly_moments[3.0] = 1.0;
  CHECK_FALSE(rep.moments_monotone());
}

TEST_CASE("kahan summation keeps tiny increments") {
  KahanSum acc;
  acc.add(1.0);
  for (int i = 0; i < 1000000; ++i) acc.add(1e-16);
  CHECK(acc.value() == Catch::Approx(1.0 + 1e-10).epsilon(1e-12));
}

TEST_CASE("gamma evaluator accuracy") {
  // every constant needing Gamma routes through this evaluator; it must be
  // good to 1e-13 relative on [0.5, 30]
  double worst = 0.0;
  for (double x = 0.5; x <= 30.0; x += 1.0 / 32.0) {
    const long double ref = tgammal(static_cast<long double>(x));
    worst = std::max(worst, std::abs((special::gamma_fn(x) -
                                      double(ref)) / double(ref)));
  }
  CHECK(worst < 1e-13);
  CHECK(special::gamma_fn(0.5) ==
        Catch::Approx(std::sqrt(3.14159265358979323846)).epsilon(1e-14));
  CHECK(special::gamma_fn(6.0) == Catch::Approx(120.0).epsilon(1e-14));
  CHECK(special::gamma_fn(3.5) ==
        Catch::Approx(15.0 * std::sqrt(3.14159265358979323846) / 8.0)
            .epsilon(1e-14));
}
