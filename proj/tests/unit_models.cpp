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

#include "polykin/models.hpp"
#include "polykin/rng.hpp"

using namespace polykin;
using collision::CollisionPair;
using collision::CollisionParams;

namespace {

models::ModelSpec make_spec(models::Model m, double gamma, double alpha) {
  models::ModelSpec spec;
  spec.model = m;
  spec.gamma = gamma;
  spec.params = {1.0, alpha, 1.0};
  return spec;
}

}  // namespace

TEST_CASE("kernel potential examples") {
  auto spec = make_spec(models::Model::Model1, 2.0, 0.0);
  CollisionPair zero;
  CHECK(models::b_tilde(zero, spec) == 0.0);

  CollisionPair p1;
  p1.a = {{1, 0, 0}, 0.5};
  p1.b = {{0, 0, 0}, 0.5};  // |u| = 1, I + I* = 1
  CHECK(models::b_tilde(p1, spec) == 2.0);

  spec.gamma = 1.0;
  CollisionPair p2;
  p2.a = {{2, 0, 0}, 1.0};
  p2.b = {{0, 0, 0}, 3.0};  // |u| = 2, I + I* = 4
  CHECK(models::b_tilde(p2, spec) == 4.0);
}

TEST_CASE("transition examples") {
  const double inv4pi = 1.0 / models::kFourPi;
  SECTION("Model 1 is the center-of-mass energy to the gamma/2") {
    auto spec = make_spec(models::Model::Model1, 2.0, 0.0);
    CollisionPair p;
    p.a = {{2, 0, 0}, 1.0};
    p.b = {{0, 0, 0}, 1.0};  // |u|^2 = 4, E = 1 + 2 = 3
    CHECK(models::transition(p, CollisionParams{}, spec) ==
          Catch::Approx(3.0 * inv4pi).epsilon(1e-15));
  }
  SECTION("Model 2 at R = 1 reduces to the velocity part") {
    auto spec = make_spec(models::Model::Model2, 1.5, 0.0);
    CollisionPair p;
    p.a = {{1.2, 0, 0}, 0.8};
    p.b = {{-0.3, 0, 0}, 0.2};
    CollisionParams cp{0.4, 1.0, {0, 0, 1}};
    const double u = norm(collision::relative_velocity(p));
    CHECK(models::transition(p, cp, spec) ==
          Catch::Approx(inv4pi * std::pow(u, 1.5)).epsilon(1e-14));
  }
  SECTION("Model 3 at r = 1, R = 0 keeps only the first internal term") {
    auto spec = make_spec(models::Model::Model3, 1.0, 0.0);
    CollisionPair p;
    p.a = {{1e-9, 0, 0}, 2.0};
    p.b = {{0, 0, 0}, 0.7};
    CollisionParams cp{1.0, 0.0, {0, 0, 1}};
    CHECK(models::transition(p, cp, spec) ==
          Catch::Approx(inv4pi * std::sqrt(2.0)).epsilon(1e-9));
  }
}

TEST_CASE("bound factor spot values") {
  auto m1 = make_spec(models::Model::Model1, 2.0, 0.0);
  const auto f1 = models::bound_factors(m1);
  CHECK(f1.e_lb(0.4) == Catch::Approx(0.25).epsilon(1e-15));
  CHECK(f1.e_ub(0.4) == 1.0);

  auto m2 = make_spec(models::Model::Model2, 2.0, 0.0);
  const auto f2 = models::bound_factors(m2);
  CHECK(f2.e_lb(0.3) == Catch::Approx(0.3).epsilon(1e-15));
  CHECK(f2.e_ub(0.3) == Catch::Approx(0.7).epsilon(1e-15));

  auto m3 = make_spec(models::Model::Model3, 2.0, 0.0);
  const auto f3 = models::bound_factors(m3);
  CHECK(f3.d_lb(0.5) == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(f3.d_ub(0.9) == 1.0);
}

TEST_CASE("sandwich inequality") {
  Rng rng(31, 0);
  SECTION("holds on random tuples for every model and variant") {
    for (auto model : {models::Model::Model1, models::Model::Model2,
                       models::Model::Model3}) {
      for (auto variant :
           {models::BoundVariant::MinMax, models::BoundVariant::Product}) {
        for (double gamma : {0.5, 1.0, 2.0}) {
          auto spec = make_spec(model, gamma, 0.5);
          spec.bound_variant = variant;
          for (int i = 0; i < 3000; ++i) {
            CollisionPair p;
            p.a = {{rng.normal(), rng.normal(), rng.normal()},
                   rng.gamma(1.0)};
            p.b = {{rng.normal(), rng.normal(), rng.normal()},
                   rng.gamma(1.0)};
            CollisionParams cp{rng.uniform(), rng.uniform(),
                               rng.unit_vector()};
            const auto s = models::sandwich_check(p, cp, spec);
            REQUIRE(s.holds());
          }
        }
      }
    }
  }
  SECTION("Model 2 at the midpoint collapses to an equality chain") {
    auto spec = make_spec(models::Model::Model2, 2.0, 0.0);
    const auto f = models::bound_factors(spec);
    CHECK(f.e_lb(0.5) == f.e_ub(0.5));
    CollisionPair p;
    p.a = {{1.1, 0.3, 0}, 0.4};
    p.b = {{-0.2, 0, 0.5}, 1.1};
    const auto s =
        models::sandwich_check(p, CollisionParams{0.3, 0.5, {0, 1, 0}}, spec);
    CHECK(s.lower == Catch::Approx(s.upper).epsilon(1e-14));
    CHECK(s.value == Catch::Approx(s.lower).epsilon(1e-14));
  }
  SECTION("Model 1: the envelope does not depend on (r, R)") {
    auto spec = make_spec(models::Model::Model1, 1.0, 0.0);
    CollisionPair p;
    p.a = {{0.7, 0, 0}, 0.2};
    p.b = {{0, 0.4, 0}, 0.9};
    const auto s1 =
        models::sandwich_check(p, CollisionParams{0.1, 0.9, {0, 0, 1}}, spec);
    const auto s2 =
        models::sandwich_check(p, CollisionParams{0.8, 0.2, {0, 0, 1}}, spec);
    CHECK(s1.lower == s2.lower);
    CHECK(s1.value == s2.value);
    CHECK(s1.upper == s2.upper);
  }
}

TEST_CASE("partition constants") {
  SECTION("Model 1 closed forms at alpha = 0, gamma = 2, m = 1") {
    auto spec = make_spec(models::Model::Model1, 2.0, 0.0);
    const auto k = models::partition_constants(spec);
    CHECK(k.c_lb_r == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(k.c_ub_r == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(k.C_ub_R == Catch::Approx(4.0 / 15.0).epsilon(1e-13));
    CHECK(k.C_lb_R == Catch::Approx(1.0 / 15.0).epsilon(1e-13));
    CHECK(k.kappa_lb == Catch::Approx(1.0 / 15.0).epsilon(1e-13));
    CHECK(k.kappa_ub == Catch::Approx(4.0 / 15.0).epsilon(1e-13));
  }
  SECTION("closed form agrees with quadrature across alpha") {
    for (double alpha : {0.0, 0.5, 2.0}) {
      auto spec = make_spec(models::Model::Model1, 2.0, alpha);
      const auto closed = models::partition_constants(spec, alpha);
      const auto quad = models::partition_constants_quadrature(spec, alpha);
      CHECK(std::abs(closed.c_ub_r - quad.c_ub_r) < 1e-10);
      CHECK(std::abs(closed.C_lb_R - quad.C_lb_R) < 1e-10);
      CHECK(std::abs(closed.C_ub_R - quad.C_ub_R) < 1e-10);
    }
  }
  SECTION("Models 2 and 3 quadrature constants are ordered") {
    for (auto model : {models::Model::Model2, models::Model::Model3}) {
      for (double alpha : {-0.5, 0.0, 0.5}) {
        auto spec = make_spec(model, 1.5, alpha);
        const auto k = models::partition_constants(spec, alpha);
        CHECK(k.c_lb_r > 0.0);
        CHECK(k.c_lb_r <= k.c_ub_r);
        CHECK(k.C_lb_R > 0.0);
        CHECK(k.C_lb_R <= k.C_ub_R);
        CHECK(k.kappa_lb <= k.kappa_ub);
      }
    }
  }
}

TEST_CASE("proposal envelope majorizes the kernel mass") {
  for (double gamma : {0.5, 1.0, 2.0}) {
    auto m1 = make_spec(models::Model::Model1, gamma, 0.0);
    const auto env1 = models::proposal_envelope(m1);
    const auto k1 = models::partition_constants(m1);
    CHECK(env1.kappa_maj == Catch::Approx(k1.kappa_ub).epsilon(1e-12));
    for (auto model : {models::Model::Model2, models::Model::Model3}) {
      auto spec = make_spec(model, gamma, 0.5);
      const auto env = models::proposal_envelope(spec);
      const auto k = models::partition_constants(spec);
      CHECK(env.kappa_maj >= k.kappa_ub);
    }
  }
}

TEST_CASE("tabulated angular functions") {
  const auto b = models::AngularFn::table_pdf({0.2, 0.4, 0.8, 0.4, 0.2});
  CHECK(b.l1_norm() ==
        Catch::Approx(2.0 * 3.14159265358979323846 * 0.9).epsilon(1e-12));
  CHECK(b.linf_norm() == 0.8);
  CHECK(b.eval(0.0) == Catch::Approx(0.8).epsilon(1e-12));
  Rng rng(33, 0);
  // sampled mu respects the pdf symmetry
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean += b.sample_mu(rng);
  mean /= n;
  CHECK(std::abs(mean) < 0.02);
  CHECK_THROWS_AS(models::AngularFn::table_pdf({-1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(b.lp_norm(0.5), UnsupportedAngular);
}
