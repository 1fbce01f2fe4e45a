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

// Domain types for a single polyatomic gas with continuous internal energy,
// the Lebesgue bracket weight, and moment/observable reductions over particle
// ensembles.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "polykin/errors.hpp"
#include "polykin/numerics.hpp"

namespace polykin {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double s, const Vec3& a) {
  return {s * a[0], s * a[1], s * a[2]};
}
inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

// One particle: velocity plus a continuous internal energy I >= 0 carrying
// the rotational/vibrational modes.
struct MolecularState {
  Vec3 v{0.0, 0.0, 0.0};
  double I = 0.0;

  bool valid() const {
    return I >= 0.0 && std::isfinite(I) && std::isfinite(v[0]) &&
           std::isfinite(v[1]) && std::isfinite(v[2]);
  }
};

// Molecular mass, internal-structure exponent alpha (total degrees of
// freedom D = 2 alpha + 5), and the Boltzmann constant.  Defaults give the
// nondimensional units used throughout the tests.
struct GasParams {
  double m = 1.0;
  double alpha = 0.0;
  double kB = 1.0;

  void validate() const {
    if (!(m > 0.0)) throw DomainError("GasParams: m must be > 0");
    if (!(alpha > -1.0)) throw DomainError("GasParams: alpha must be > -1");
    if (!(kB > 0.0)) throw DomainError("GasParams: kB must be > 0");
  }
};

// Lebesgue bracket <v,I> = sqrt(1 + |v|^2/2 + I/m), the weight generating
// the polynomially weighted norms.  Always >= 1.
inline double bracket2(const MolecularState& s, const GasParams& p) {
  return 1.0 + 0.5 * norm2(s.v) + s.I / p.m;
}

inline double bracket(const MolecularState& s, const GasParams& p) {
  return std::sqrt(bracket2(s, p));
}

// Equal-weight N-particle representation of the distribution function.
// `weight` is the physical number density carried by each particle; binary
// collisions conserve N so it is constant over a run.
struct Ensemble {
  std::vector<MolecularState> particles;
  double weight = 1.0;
  double time = 0.0;
  std::uint64_t collision_tally = 0;

  std::size_t size() const { return particles.size(); }
  double number_density() const { return weight * double(particles.size()); }
};

struct ExpMomentValue {
  double value = 0.0;
  bool overflow = false;
};

// Polynomial moment of order k: weight * sum_i <v_i,I_i>^(2k).  Real k >= 0
// is accepted; the theory uses fractional orders such as k + gamma/2.
inline double poly_moment(const Ensemble& ens, double k, const GasParams& p) {
  if (!(k >= 0.0)) throw DomainError("poly_moment: k must be >= 0");
  KahanSum acc;
  if (k == 0.0) {
    return ens.weight * double(ens.size());
  }
  const bool plain = (k == 1.0);
  for (const auto& s : ens.particles) {
    const double b2 = bracket2(s, p);
    acc.add(plain ? b2 : std::pow(b2, k));
  }
  return ens.weight * acc.value();
}

// Exponential moment of order 2s and rate beta:
// weight * sum_i exp(beta <v_i,I_i>^(2s)).  Overflow is reported through the
// flag rather than by trapping.
inline ExpMomentValue exp_moment(const Ensemble& ens, double s, double beta,
                                 const GasParams& p) {
  if (!(s > 0.0 && s <= 1.0)) throw DomainError("exp_moment: need 0 < s <= 1");
  if (!(beta > 0.0)) throw DomainError("exp_moment: need beta > 0");
  KahanSum acc;
  bool overflow = false;
  for (const auto& st : ens.particles) {
    const double b2 = bracket2(st, p);
    const double w = (s == 1.0) ? b2 : std::pow(b2, s);
    const double term = std::exp(beta * w);
    if (!std::isfinite(term)) overflow = true;
    acc.add(term);
  }
  double val = ens.weight * acc.value();
  if (!std::isfinite(val)) overflow = true;
  return {overflow ? std::numeric_limits<double>::infinity() : val, overflow};
}

struct Observables {
  double rho = 0.0;              // mass density m * weight * N
  Vec3 U{0.0, 0.0, 0.0};         // mean velocity
  double internal_energy = 0.0;  // rho e = weight * sum (m|c|^2/2 + I)
  double T_equiv = 0.0;          // from rho e = (alpha + 5/2) n kB T
};

// Macroscopic observables.  The temperature solves the polyatomic caloric
// law with n = weight * N; the peculiar velocity is measured about U.
inline Observables observables(const Ensemble& ens, const GasParams& p) {
  if (ens.size() < 1) throw DomainError("observables: empty ensemble");
  Observables out;
  const double n = ens.number_density();
  out.rho = p.m * n;
  KahanSum ux, uy, uz;
  for (const auto& s : ens.particles) {
    ux.add(s.v[0]);
    uy.add(s.v[1]);
    uz.add(s.v[2]);
  }
  const double invN = 1.0 / double(ens.size());
  out.U = {ux.value() * invN, uy.value() * invN, uz.value() * invN};
  KahanSum e;
  for (const auto& s : ens.particles) {
    const Vec3 c = s.v - out.U;
    e.add(0.5 * p.m * norm2(c) + s.I);
  }
  out.internal_energy = ens.weight * e.value();
  out.T_equiv = out.internal_energy / ((p.alpha + 2.5) * n * p.kB);
  return out;
}

// Lab-frame total energy density: weight * sum (m|v|^2/2 + I).
inline double total_energy(const Ensemble& ens, const GasParams& p) {
  KahanSum e;
  for (const auto& s : ens.particles) e.add(0.5 * p.m * norm2(s.v) + s.I);
  return ens.weight * e.value();
}

inline Vec3 total_momentum(const Ensemble& ens, const GasParams& p) {
  KahanSum px, py, pz;
  for (const auto& s : ens.particles) {
    px.add(s.v[0]);
    py.add(s.v[1]);
    pz.add(s.v[2]);
  }
  return {p.m * ens.weight * px.value(), p.m * ens.weight * py.value(),
          p.m * ens.weight * pz.value()};
}

// Shift velocities to the center-of-momentum frame; returns the removed U.
inline Vec3 shift_to_com(Ensemble& ens) {
  KahanSum ux, uy, uz;
  for (const auto& s : ens.particles) {
    ux.add(s.v[0]);
    uy.add(s.v[1]);
    uz.add(s.v[2]);
  }
  const double invN = 1.0 / double(ens.size());
  const Vec3 U{ux.value() * invN, uy.value() * invN, uz.value() * invN};
  for (auto& s : ens.particles) s.v = s.v - U;
  return U;
}

// One time-series record.  Serialization lives in config.hpp.
struct MomentReport {
  double time = 0.0;
  double mass_density = 0.0;
  Vec3 momentum{0.0, 0.0, 0.0};
  double total_energy = 0.0;
  std::map<double, double> poly_moments;                       // k -> m_k
  std::map<std::pair<double, double>, ExpMomentValue> exp_moments;  // (s,b)
  std::optional<double> entropy_estimate;
  int replica = 0;

  // Moment monotonicity in the order k holds for any ensemble because the
  // bracket weight is >= 1; assert it on the computed values.
  bool moments_monotone() const {
    double prev = -std::numeric_limits<double>::infinity();
    double prev_k = -1.0;
    for (const auto& [k, mk] : poly_moments) {
      if (prev_k >= 0.0 && k >= prev_k && mk < prev * (1.0 - 1e-12)) {
        return false;
      }
      prev = mk;
      prev_k = k;
    }
    return true;
  }
};

}  // namespace polykin
