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

#include "polykin/collision.hpp"
#include "polykin/oracles.hpp"
#include "polykin/rng.hpp"

using namespace polykin;
using collision::CollisionPair;
using collision::CollisionParams;

namespace {

const GasParams kUnit{1.0, 0.0, 1.0};

CollisionPair random_pair(Rng& rng) {
  CollisionPair p;
  p.a = {{rng.normal(), rng.normal(), rng.normal()}, rng.gamma(1.0)};
  p.b = {{rng.normal(), rng.normal(), rng.normal()}, rng.gamma(1.0)};
  return p;
}

CollisionParams random_params(Rng& rng) {
  CollisionParams cp;
  cp.r = rng.uniform();
  cp.R = rng.uniform();
  cp.sigma = rng.unit_vector();
  return cp;
}

}  // namespace

TEST_CASE("pure internal exchange with symmetric split") {
  CollisionPair p;
  p.a = {{0, 0, 0}, 1.0};
  p.b = {{0, 0, 0}, 1.0};
  CollisionParams cp;
  cp.r = 0.5;
  cp.R = 0.0;
  cp.sigma = {0.0, 1.0, 0.0};
  const auto out = collision::transform(p, cp, kUnit);
  CHECK(norm(out.pair.a.v) == 0.0);
  CHECK(norm(out.pair.b.v) == 0.0);
  CHECK(out.pair.a.I == 1.0);
  CHECK(out.pair.b.I == 1.0);
}

TEST_CASE("transform conserves the center-of-mass energy") {
  Rng rng(21, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto p = random_pair(rng);
    const auto cp = random_params(rng);
    const double E = collision::total_energy_cm(p, kUnit);
    const auto out = collision::transform(p, cp, kUnit);
    const double Ep = collision::total_energy_cm(out.pair, kUnit);
    CHECK(std::abs(Ep - E) <= 1e-12 * E);
    CHECK(out.pair.a.I >= 0.0);
    CHECK(out.pair.b.I >= 0.0);
  }
}

TEST_CASE("transform is an involution") {
  Rng rng(22, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto p = random_pair(rng);
    const auto cp = random_params(rng);
    const auto fwd = collision::transform(p, cp, kUnit);
    const auto back = collision::transform(fwd.pair, fwd.params, kUnit);
    const double E = collision::total_energy_cm(p, kUnit);
    CHECK(norm(back.pair.a.v - p.a.v) <= 1e-12 * std::sqrt(E));
    CHECK(norm(back.pair.b.v - p.b.v) <= 1e-12 * std::sqrt(E));
    CHECK(std::abs(back.pair.a.I - p.a.I) <= 1e-12 * E);
    CHECK(std::abs(back.pair.b.I - p.b.I) <= 1e-12 * E);
    CHECK(std::abs(back.params.r - cp.r) <= 1e-12);
    CHECK(std::abs(back.params.R - cp.R) <= 1e-12);
    CHECK(norm(back.params.sigma - cp.sigma) <= 1e-12);
  }
}

TEST_CASE("transform degenerate cases") {
  CollisionPair dead;  // u = 0 and I + I* = 0
  CHECK_THROWS_AS(collision::transform(dead, CollisionParams{}, kUnit),
                  DegenerateCollision);

  CollisionPair kinetic_only;
  kinetic_only.a = {{1, 0, 0}, 0.0};
  kinetic_only.b = {{-1, 0, 0}, 0.0};
  const auto out =
      collision::transform(kinetic_only, CollisionParams{0.3, 0.4, {0, 0, 1}},
                           kUnit);
  CHECK(out.r_degenerate);
  CHECK(out.params.r == 0.5);
}

TEST_CASE("jacobian closed form") {
  SECTION("symmetric configuration has unit jacobian") {
    CollisionPair p;
    p.a = {{1, 0, 0}, 0.5};
    p.b = {{-1, 0, 0}, 0.5};
    const double E = collision::total_energy_cm(p, kUnit);
    CollisionParams cp;
    cp.R = 0.25 * norm2(collision::relative_velocity(p)) / E;
    cp.r = 0.37;
    cp.sigma = {0, 1, 0};
    CHECK(collision::jacobian(p, cp, kUnit) ==
          Catch::Approx(1.0).epsilon(1e-14));
  }
  SECTION("matches the finite-difference determinant") {
    Rng rng(23, 0);
    for (int i = 0; i < 50; ++i) {
      auto p = random_pair(rng);
      p.a.I += 0.05;
      p.b.I += 0.05;
      CollisionParams cp;
      cp.r = rng.uniform(0.2, 0.8);
      cp.R = rng.uniform(0.2, 0.8);
      cp.sigma = rng.unit_vector();
      const double closed = collision::jacobian(p, cp, kUnit);
      const double fd = oracles::fd_jacobian(p, cp, kUnit);
      CHECK(closed == Catch::Approx(fd).epsilon(1e-6));
    }
  }
  SECTION("forward and inverse jacobians multiply to one") {
    Rng rng(24, 0);
    for (int i = 0; i < 500; ++i) {
      auto p = random_pair(rng);
      p.a.I += 0.01;
      p.b.I += 0.01;
      const auto cp = random_params(rng);
      const double jf = collision::jacobian(p, cp, kUnit);
      const auto fwd = collision::transform(p, cp, kUnit);
      const double jb = collision::jacobian(fwd.pair, fwd.params, kUnit);
      CHECK(std::abs(jf * jb - 1.0) < 1e-10);
    }
  }
  SECTION("singular at the boundary") {
    CollisionPair p;  // u = 0 makes the image R' = 0
    p.a = {{0, 0, 0}, 1.0};
    p.b = {{0, 0, 0}, 1.0};
    CHECK_THROWS_AS(
        collision::jacobian(p, CollisionParams{0.5, 0.5, {0, 0, 1}}, kUnit),
        SingularJacobian);
  }
}

TEST_CASE("alpha-weight invariance") {
  SECTION("alpha = 0 is identically one") {
    Rng rng(25, 0);
    const auto p = random_pair(rng);
    const auto cp = random_params(rng);
    const auto w = collision::weight_invariant(p, cp, kUnit);
    CHECK(w.lhs == 1.0);
    CHECK(w.rhs == 1.0);
  }
  SECTION("worked example at alpha = 1/2") {
    GasParams g{1.0, 0.5, 1.0};
    CollisionPair p;
    p.a = {{1, 0, 0}, 2.0};
    p.b = {{0, 0, 0}, 3.0};  // |u| = 1
    CollisionParams cp{0.3, 0.4, {0, 0, 1}};
    const auto w = collision::weight_invariant(p, cp, g);
    CHECK(std::abs(w.lhs - w.rhs) <= 1e-12 * w.lhs);
  }
  SECTION("random tuples at alpha = 1") {
    GasParams g{1.0, 1.0, 1.0};
    Rng rng(26, 0);
    for (int i = 0; i < 2000; ++i) {
      const auto p = random_pair(rng);
      CollisionParams cp;
      cp.r = rng.uniform(1e-3, 1.0 - 1e-3);
      cp.R = rng.uniform(1e-3, 1.0 - 1e-3);
      cp.sigma = rng.unit_vector();
      const auto w = collision::weight_invariant(p, cp, g);
      CHECK(std::abs(w.lhs - w.rhs) <= 1e-12 * w.lhs);
    }
  }
  SECTION("negative alpha requires strictly positive energies") {
    GasParams g{1.0, -0.5, 1.0};
    CollisionPair p;
    p.a = {{1, 0, 0}, 0.0};
    p.b = {{0, 0, 0}, 3.0};
    CHECK_THROWS_AS(
        collision::weight_invariant(p, CollisionParams{}, g), DomainError);
  }
}

TEST_CASE("energy split decomposition") {
  SECTION("kinetic part saturating the unit shift kills lambda") {
    CollisionPair rest;  // brackets are 1, E<> = 2, Theta = 1/2
    const auto es = collision::energy_split(rest, 0.7, kUnit);
    CHECK(es.Theta == Catch::Approx(0.5).epsilon(1e-15));
    CHECK(es.lambda == 0.0);
  }
  SECTION("p and q are convex conjugates") {
    Rng rng(27, 0);
    for (int i = 0; i < 2000; ++i) {
      const auto p = random_pair(rng);
      const auto cp = random_params(rng);
      const auto es = collision::energy_split(p, cp.R, kUnit);
      CHECK(std::abs(es.p(cp.r) + es.q(cp.r) - 1.0) <= 1e-14);
      CHECK(es.Theta >= 0.0);
      CHECK(es.Theta <= 1.0);
      CHECK(es.Sigma >= 0.0);
      CHECK(es.Sigma <= 1.0 + 1e-15);
      CHECK(es.s >= 0.0);
      CHECK(es.s <= 1.0 + 1e-15);
    }
  }
  SECTION("reproduces the post-collision brackets") {
    Rng rng(28, 0);
    for (int i = 0; i < 2000; ++i) {
      const auto p = random_pair(rng);
      const auto cp = random_params(rng);
      const auto es = collision::energy_split(p, cp.R, kUnit);
      const auto fwd = collision::transform(p, cp, kUnit);
      const double vn = norm(es.V);
      const double vs = vn > 0.0 ? dot(es.V, cp.sigma) / vn : 0.0;
      const double lhs_a = bracket2(fwd.pair.a, kUnit);
      const double lhs_b = bracket2(fwd.pair.b, kUnit);
      CHECK(lhs_a == Catch::Approx(es.E_bracket * es.p(cp.r) +
                                   es.lambda * vs)
                         .epsilon(1e-10));
      CHECK(lhs_b == Catch::Approx(es.E_bracket * es.q(cp.r) -
                                   es.lambda * vs)
                         .epsilon(1e-10));
      // total molecular energy in bracket form is preserved
      CHECK(lhs_a + lhs_b == Catch::Approx(es.E_bracket).epsilon(1e-12));
    }
  }
}
