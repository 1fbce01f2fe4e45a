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

// Independent numerical oracles used only by the verification suites: a
// finite-difference determinant for the collision-map Jacobian, direct 2-D
// quadrature of the manifold-average integral, an RK4 integrator for the
// Bernoulli comparison ODE, and a Monte Carlo estimate of the contracting
// constant.  Nothing here is referenced by the solver itself.

#include <array>
#include <cmath>
#include <vector>

#include "polykin/analysis.hpp"
#include "polykin/collision.hpp"
#include "polykin/models.hpp"
#include "polykin/numerics.hpp"
#include "polykin/rng.hpp"

namespace polykin::oracles {

namespace detail {

// |det| by Gaussian elimination with partial pivoting.
template <int N>
double abs_det(std::array<std::array<double, N>, N> a) {
  double det = 1.0;
  for (int c = 0; c < N; ++c) {
    int piv = c;
    for (int r = c + 1; r < N; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (a[piv][c] == 0.0) return 0.0;
    if (piv != c) std::swap(a[piv], a[c]);
    det *= a[c][c];
    for (int r = c + 1; r < N; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < N; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return std::abs(det);
}

// Orthonormal pair spanning the tangent plane at unit vector n.
inline void tangent_frame(const Vec3& n, Vec3& e1, Vec3& e2) {
  if (std::abs(n[0]) < 0.6) {
    e1 = {0.0, -n[2], n[1]};
  } else {
    e1 = {-n[1], n[0], 0.0};
  }
  e1 = (1.0 / norm(e1)) * e1;
  e2 = {n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2],
        n[0] * e1[1] - n[1] * e1[0]};
}

}  // namespace detail

// Finite-difference determinant of the full collision map in the chart
// coordinates (v, v*, I, I*, r, R, sigma-chart).  The spherical directions
// enter through normalized tangent-plane offsets whose area element is 1 at
// the expansion point, so the chart determinant equals the Jacobian of the
// map with respect to the collision measure.
inline double fd_jacobian(const collision::CollisionPair& pair,
                          const collision::CollisionParams& cp,
                          const GasParams& g, double h = 1e-5) {
  Vec3 t1, t2;
  detail::tangent_frame(cp.sigma, t1, t2);

  // Image-side chart axes, anchored at the unperturbed image direction.
  const auto base = collision::transform(pair, cp, g);
  Vec3 s1, s2;
  detail::tangent_frame(base.params.sigma, s1, s2);

  struct Coords {
    std::array<double, 12> x;
  };
  const auto pack = [&](const collision::CollisionPair& p,
                        const collision::CollisionParams& c) {
    // sigma' chart coordinates relative to the base image direction.
    const double denom = dot(base.params.sigma, c.sigma);
    Coords out{};
    out.x = {p.a.v[0], p.a.v[1], p.a.v[2], p.b.v[0], p.b.v[1], p.b.v[2],
             p.a.I,    p.b.I,    c.r,      c.R,      dot(s1, c.sigma) / denom,
             dot(s2, c.sigma) / denom};
    return out;
  };
  const auto eval = [&](const std::array<double, 12>& q) {
    collision::CollisionPair p;
    p.a.v = {q[0], q[1], q[2]};
    p.b.v = {q[3], q[4], q[5]};
    p.a.I = q[6];
    p.b.I = q[7];
    collision::CollisionParams c;
    c.r = q[8];
    c.R = q[9];
    Vec3 s = cp.sigma + q[10] * t1 + q[11] * t2;
    c.sigma = (1.0 / norm(s)) * s;
    return pack(collision::transform(p, c, g).pair,
                collision::transform(p, c, g).params);
  };

  const std::array<double, 12> x0 = {
      pair.a.v[0], pair.a.v[1], pair.a.v[2], pair.b.v[0],
      pair.b.v[1], pair.b.v[2], pair.a.I,    pair.b.I,
      cp.r,        cp.R,        0.0,         0.0};
  std::array<std::array<double, 12>, 12> jac{};
  for (int c = 0; c < 12; ++c) {
    auto xp = x0, xm = x0;
    xp[c] += h;
    xm[c] -= h;
    const Coords fp = eval(xp);
    const Coords fm = eval(xm);
    for (int r = 0; r < 12; ++r) {
      jac[r][c] = (fp.x[r] - fm.x[r]) / (2.0 * h);
    }
  }
  return detail::abs_det<12>(jac);
}

// Direct 2-D adaptive quadrature of
//   integral over [0,1]^2 of max((1+mu)/2, r)^k dr dmu,
// splitting the inner integral at its kink.
inline double povzner_cinf_quadrature(double k, double tol = 1e-12) {
  const auto outer = [&](double mu) {
    const double split = 0.5 * (1.0 + mu);
    const auto inner = [&](double r) {
      return std::pow(std::max(split, r), k);
    };
    double v = quad::integrate_or_throw(inner, 0.0, split, 0.25 * tol);
    if (split < 1.0) {
      v += quad::integrate_or_throw(inner, split, 1.0, 0.25 * tol);
    }
    return v;
  };
  return quad::integrate_or_throw(outer, 0.0, 1.0, tol);
}

// Classical RK4 for y' = -a y^(1+c) + b y.
inline double rk4_bernoulli(double a, double b, double c, double y0, double t,
                            int steps = 20000) {
  const auto f = [&](double y) { return -a * std::pow(y, 1.0 + c) + b * y; };
  double y = y0;
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * h * k1);
    const double k3 = f(y + 0.5 * h * k2);
    const double k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

struct McValue {
  double value = 0.0;
  double std_err = 0.0;
};

// Monte Carlo estimate of the manifold average
//   sup_{Vhat, uhat} 2 C_ub int max((1+|Vhat.sigma|)/2, r)^k
//                        b(uhat.sigma) d_ub(r) phi_a(r) dr dsigma.
// For isotropic b the supremum is direction-free; otherwise a coarse grid
// over the angle between Vhat and uhat is scanned.
inline McValue povzner_ck_mc(double k, const models::ModelSpec& spec,
                             const models::ModelConstants& consts,
                             std::size_t n_samples, Rng& rng) {
  const auto factors = models::bound_factors(spec);
  const double alpha = spec.params.alpha;
  const int n_angles = spec.angular.is_isotropic() ? 1 : 16;
  McValue best;
  for (int ia = 0; ia < n_angles; ++ia) {
    const double psi = n_angles == 1 ? 0.0
                                     : 3.14159265358979323846 * double(ia) /
                                           double(n_angles - 1);
    const Vec3 vhat{0.0, 0.0, 1.0};
    const Vec3 uhat{std::sin(psi), 0.0, std::cos(psi)};
    KahanSum sum, sum2;
    for (std::size_t s = 0; s < n_samples; ++s) {
      const Vec3 sigma = rng.unit_vector();
      const double r = rng.uniform();
      const double term =
          std::pow(std::max(0.5 * (1.0 + std::abs(dot(vhat, sigma))), r), k) *
          spec.angular.eval(dot(uhat, sigma)) * factors.d_ub(r) *
          collision::phi_alpha(r, alpha) * models::kFourPi;
      sum.add(term);
      sum2.add(term * term);
    }
    const double mean = sum.value() / double(n_samples);
    const double var =
        std::max(0.0, sum2.value() / double(n_samples) - mean * mean);
    const double value = 2.0 * consts.C_ub_R * mean;
    const double err =
        2.0 * consts.C_ub_R * std::sqrt(var / double(n_samples));
    if (value > best.value) best = {value, err};
  }
  return best;
}

}  // namespace polykin::oracles
