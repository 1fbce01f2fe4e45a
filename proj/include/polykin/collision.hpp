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

// Exact Borgnakke-Larsen collision kinematics: the forward/inverse
// transformation on (v, v*, I, I*, r, R, sigma), its Jacobian, the invariant
// alpha-weight, and the energy-identity decomposition used by the
// compact-manifold averaging estimates.

#include <cmath>

#include "polykin/core.hpp"
#include "polykin/errors.hpp"

namespace polykin::collision {

// Partition functions of the internal-energy split r and the kinetic/internal
// split R that make the polyatomic collision measure invariant.
inline double phi_alpha(double r, double alpha) {
  return std::pow(r * (1.0 - r), alpha);
}
inline double psi_alpha(double R, double alpha) {
  return std::pow(1.0 - R, 2.0 * alpha);
}

// Point on the compact manifold K = [0,1]^2 x S^2.
struct CollisionParams {
  double r = 0.5;
  double R = 0.5;
  Vec3 sigma{0.0, 0.0, 1.0};

  bool valid() const {
    return r >= 0.0 && r <= 1.0 && R >= 0.0 && R <= 1.0 &&
           std::abs(norm2(sigma) - 1.0) <= 2e-12;
  }
};

struct CollisionPair {
  MolecularState a;
  MolecularState b;
};

struct TransformResult {
  CollisionPair pair;       // post-map states
  CollisionParams params;   // parameters that map the image back
  bool r_degenerate = false;  // I + I* = 0 made the image r a 0/0
};

inline Vec3 center_of_mass(const CollisionPair& p) {
  return 0.5 * (p.a.v + p.b.v);
}
inline Vec3 relative_velocity(const CollisionPair& p) { return p.a.v - p.b.v; }

// Total molecular energy in the center-of-mass frame: m|u|^2/4 + I + I*.
inline double total_energy_cm(const CollisionPair& p, const GasParams& g) {
  return 0.25 * g.m * norm2(relative_velocity(p)) + p.a.I + p.b.I;
}

// The collision map T.  Outgoing states:
//   v' = V + sqrt(RE/m) sigma,  v*' = V - sqrt(RE/m) sigma,
//   I' = r(1-R)E,               I*' = (1-r)(1-R)E,
// and the parameters that send the image back through the same map:
//   r' = I/(I+I*),  R' = m|u|^2/(4E),  sigma' = u/|u|.
// T is an involution; momentum and total energy are conserved exactly.
inline TransformResult transform(const CollisionPair& p,
                                 const CollisionParams& cp,
                                 const GasParams& g) {
  const Vec3 V = center_of_mass(p);
  const Vec3 u = relative_velocity(p);
  const double u2 = norm2(u);
  const double E = 0.25 * g.m * u2 + p.a.I + p.b.I;
  if (!(E > 0.0)) {
    throw DegenerateCollision("zero total energy: u = 0 and I + I* = 0");
  }
  TransformResult out;
  const double x = std::sqrt(cp.R * E / g.m);
  out.pair.a.v = V + x * cp.sigma;
  out.pair.b.v = V - x * cp.sigma;
  const double internal = (1.0 - cp.R) * E;
  out.pair.a.I = cp.r * internal;
  out.pair.b.I = (1.0 - cp.r) * internal;

  out.params.R = 0.25 * g.m * u2 / E;
  const double itot = p.a.I + p.b.I;
  if (itot > 0.0) {
    out.params.r = p.a.I / itot;
  } else {
    // Measure-zero 0/0; the symmetric value keeps the involution on the
    // complement.
    out.params.r = 0.5;
    out.r_degenerate = true;
  }
  const double unorm = std::sqrt(u2);
  if (unorm > 0.0) {
    out.params.sigma = (1.0 / unorm) * u;
  } else {
    out.params.sigma = cp.sigma;  // any unit vector; image has |u'| decided by R
  }
  return out;
}

// Jacobian of T with respect to the measure dv dv* dI dI* dr dR dsigma:
//   J = (1-R) R^{1/2} / ((1-R') R'^{1/2}).
inline double jacobian(const CollisionPair& p, const CollisionParams& cp,
                       const GasParams& g) {
  const TransformResult t = transform(p, cp, g);
  const double Rp = t.params.R;
  if (Rp <= 0.0 || Rp >= 1.0 || cp.R >= 1.0) {
    throw SingularJacobian("R' in {0,1} or R = 1");
  }
  return (1.0 - cp.R) * std::sqrt(cp.R) / ((1.0 - Rp) * std::sqrt(Rp));
}

struct WeightInvariant {
  double lhs = 0.0;
  double rhs = 0.0;
};

// I^a I*^a phi_a(r) psi_a(R) is invariant under T; both sides are returned so
// callers can assert equality.  The image-side partition complements are
// evaluated from their exact ratios (1 - r' = I*/(I+I*), 1 - R' = (I+I*)/E):
// forming them as 1 - x cancels catastrophically when the internal energies
// are skewed, and the alpha power amplifies that loss.
inline WeightInvariant weight_invariant(const CollisionPair& p,
                                        const CollisionParams& cp,
                                        const GasParams& g) {
  if (g.alpha < 0.0 && (p.a.I <= 0.0 || p.b.I <= 0.0)) {
    throw DomainError("weight_invariant: alpha < 0 needs I, I* > 0");
  }
  const TransformResult t = transform(p, cp, g);
  WeightInvariant w;
  const double a = g.alpha;
  w.lhs = std::pow(p.a.I, a) * std::pow(p.b.I, a) * phi_alpha(cp.r, a) *
          psi_alpha(cp.R, a);
  const double itot = p.a.I + p.b.I;
  if (itot > 0.0) {
    const double E = total_energy_cm(p, g);
    const double rp_prod = (p.a.I / itot) * (p.b.I / itot);  // r'(1-r')
    w.rhs = std::pow(t.pair.a.I, a) * std::pow(t.pair.b.I, a) *
            std::pow(rp_prod, a) * std::pow(itot / E, 2.0 * a);
  } else {
    w.rhs = std::pow(t.pair.a.I, a) * std::pow(t.pair.b.I, a) *
            phi_alpha(t.params.r, a) * psi_alpha(t.params.R, a);
  }
  return w;
}

// Convex split of the pair energy E<> = <v,I>^2 + <v*,I*>^2 into the factors
// driving the post-collision brackets:
//   <v',I'>^2  = E<> p + lambda (Vhat . sigma),
//   <v*',I*'>^2 = E<> q - lambda (Vhat . sigma),
// with p = s/2 + r(1-s), q = s/2 + (1-r)(1-s), p + q = 1.
struct EnergySplit {
  double E = 0.0;        // m|u|^2/4 + I + I*
  double E_bracket = 0.0;  // <v,I>^2 + <v*,I*>^2 = 2 + |V|^2 + E/m
  Vec3 V{0.0, 0.0, 0.0};
  Vec3 u{0.0, 0.0, 0.0};
  double Theta = 0.0;
  double Sigma = 0.0;
  double s = 0.0;
  double lambda = 0.0;

  double p(double r) const { return 0.5 * s + r * (1.0 - s); }
  double q(double r) const { return 0.5 * s + (1.0 - r) * (1.0 - s); }
};

inline EnergySplit energy_split(const CollisionPair& pr, double R,
                                const GasParams& g) {
  EnergySplit es;
  es.V = center_of_mass(pr);
  es.u = relative_velocity(pr);
  es.E = 0.25 * g.m * norm2(es.u) + pr.a.I + pr.b.I;
  es.E_bracket = bracket2(pr.a, g) + bracket2(pr.b, g);
  // Theta E<> = 1 + |V|^2 and Sigma (1-Theta) E<> = 1 + R E/m; both fractions
  // lie in [0,1] by construction.
  es.Theta = (1.0 + norm2(es.V)) / es.E_bracket;
  const double rest = (1.0 - es.Theta) * es.E_bracket;  // = 1 + E/m
  es.Sigma = (1.0 + R * es.E / g.m) / rest;
  es.s = es.Theta + es.Sigma * (1.0 - es.Theta);
  double prod = (es.Theta * es.E_bracket - 1.0) *
                (es.Sigma * rest - 1.0);
  // Cancellation can leave a tiny negative under the root.
  if (prod < 0.0 && prod > -1e-14) prod = 0.0;
  es.lambda = std::sqrt(prod);
  return es;
}

}  // namespace polykin::collision
