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

// The three transition-function models, their extended-Grad envelope factors,
// and the weighted r/R averages (partition constants) that the moment and
// threshold analysis is built from.
//
// Every model is sandwiched as
//   d_lb(r) e_lb(R) b(uhat.sigma) Btilde <= B <= d_ub(r) e_ub(R) b(...) Btilde
// with Btilde = |u|^gamma + ((I+I*)/m)^(gamma/2).

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "polykin/collision.hpp"
#include "polykin/core.hpp"
#include "polykin/errors.hpp"
#include "polykin/numerics.hpp"
#include "polykin/rng.hpp"

namespace polykin::models {

inline constexpr double kFourPi = 12.566370614359172953850573533118;

enum class Model { Model1, Model2, Model3 };

inline std::string to_string(Model m) {
  switch (m) {
    case Model::Model1: return "Model1";
    case Model::Model2: return "Model2";
    case Model::Model3: return "Model3";
  }
  return "?";
}

// Angular function b(uhat.sigma).  Either the isotropic constant 1/(4 pi) or
// a tabulated pdf over cos(theta) given on a uniform grid.  All norms are
// with respect to the sphere measure dsigma.
class AngularFn {
 public:
  static AngularFn isotropic() { return AngularFn(); }

  static AngularFn table_pdf(std::vector<double> values) {
    if (values.size() < 2) {
      throw ConfigError("angular table needs at least 2 points");
    }
    for (double v : values) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError("angular table values must be finite and >= 0");
      }
    }
    AngularFn b;
    b.table_ = std::move(values);
    b.build_cdf();
    return b;
  }

  bool is_isotropic() const { return table_.empty(); }

  // Value at mu = cos(theta).
  double eval(double mu) const {
    if (is_isotropic()) return 1.0 / kFourPi;
    const double x = std::clamp(mu, -1.0, 1.0);
    const double t = (x + 1.0) * 0.5 * double(table_.size() - 1);
    const std::size_t i =
        std::min<std::size_t>(std::size_t(t), table_.size() - 2);
    const double f = t - double(i);
    return table_[i] * (1.0 - f) + table_[i + 1] * f;
  }

  // L1 norm over the sphere: 2 pi * integral b(mu) dmu.
  double l1_norm() const {
    if (is_isotropic()) return 1.0;
    return l1_;
  }

  double linf_norm() const {
    if (is_isotropic()) return 1.0 / kFourPi;
    double mx = 0.0;
    for (double v : table_) mx = std::max(mx, v);
    return mx;
  }

  double lp_norm(double p) const {
    if (!(p >= 1.0)) throw UnsupportedAngular("p must be >= 1");
    if (std::isinf(p)) return linf_norm();
    if (is_isotropic()) return std::pow(kFourPi, 1.0 / p - 1.0);
    const auto f = [&](double mu) { return std::pow(eval(mu), p); };
    const double ip =
        quad::integrate_or_throw(f, -1.0, 1.0, 1e-13, 400000);
    return std::pow(2.0 * 3.14159265358979323846 * ip, 1.0 / p);
  }

  // Draw mu = cos(theta) from the density proportional to b(mu) dmu.
  double sample_mu(Rng& rng) const {
    if (is_isotropic()) return 2.0 * rng.uniform() - 1.0;
    const double u = rng.uniform() * cdf_.back();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t i = it == cdf_.begin() ? 0 : std::size_t(it - cdf_.begin() - 1);
    i = std::min(i, cdf_.size() - 2);
    const double h = 2.0 / double(table_.size() - 1);
    const double rem = u - cdf_[i];
    const double a = table_[i], b = table_[i + 1];
    // Piecewise-linear density: invert the per-cell quadratic.
    double f;
    if (std::abs(b - a) < 1e-14 * (a + b + 1e-300)) {
      f = a > 0.0 ? rem / (a * h) : 0.5;
    } else {
      const double disc = a * a + 2.0 * (b - a) * rem / h;
      f = (std::sqrt(std::max(0.0, disc)) - a) / (b - a);
    }
    return -1.0 + (double(i) + std::clamp(f, 0.0, 1.0)) * h;
  }

 private:
  void build_cdf() {
    const double h = 2.0 / double(table_.size() - 1);
    cdf_.assign(table_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < table_.size(); ++i) {
      cdf_[i + 1] = cdf_[i] + 0.5 * (table_[i] + table_[i + 1]) * h;
    }
    if (!(cdf_.back() > 0.0)) throw ConfigError("angular table integrates to 0");
    l1_ = 2.0 * 3.14159265358979323846 * cdf_.back();
  }

  std::vector<double> table_;  // values on a uniform mu grid over [-1, 1]
  std::vector<double> cdf_;
  double l1_ = 1.0;
};

// The min/max envelopes are the defaults (tighter); the product-form
// alternates sit behind this flag.
enum class BoundVariant { MinMax, Product };

struct ModelSpec {
  Model model = Model::Model1;
  double gamma = 2.0;
  GasParams params;
  AngularFn angular = AngularFn::isotropic();
  BoundVariant bound_variant = BoundVariant::MinMax;

  void validate() const {
    params.validate();
    if (!(gamma > 0.0 && gamma <= 2.0)) {
      throw ConfigError("gamma must lie in (0, 2]");
    }
  }
};

// Weighted averages of the envelope factors and the resulting kappa bounds.
struct ModelConstants {
  double c_lb_r = 0.0;   // integral d_lb(r) phi_a(r) dr
  double c_ub_r = 0.0;   // integral d_ub(r) phi_a(r) dr
  double C_lb_R = 0.0;   // integral e_lb(R) psi_a(R)(1-R)R^{1/2} dR
  double C_ub_R = 0.0;   // integral e_ub(R) psi_a(R)(1-R)R^{1/2} dR
  double kappa_lb = 0.0; // ||b||_1 c_lb C_lb
  double kappa_ub = 0.0; // ||b||_1 c_ub C_ub

  bool operator==(const ModelConstants&) const = default;
};

namespace detail {

// x^(gamma/2) with a fast path for gamma = 2, the hot case in the solver.
inline double pow_g2(double x, double g2) {
  return g2 == 1.0 ? x : std::pow(x, g2);
}

}  // namespace detail

// Kernel potential Btilde(|u|, I, I*) = |u|^gamma + ((I+I*)/m)^(gamma/2).
inline double b_tilde(const collision::CollisionPair& p,
                      const ModelSpec& spec) {
  const double u2 = norm2(collision::relative_velocity(p));
  const double g2 = 0.5 * spec.gamma;
  return detail::pow_g2(u2, g2) +
         detail::pow_g2((p.a.I + p.b.I) / spec.params.m, g2);
}

namespace detail {

// b(uhat.sigma) with the u = 0 convention: isotropic b contributes its
// constant value, otherwise the direction is undefined.
inline double angular_value(const collision::CollisionPair& p,
                            const Vec3& sigma, const AngularFn& b) {
  if (b.is_isotropic()) return 1.0 / kFourPi;
  const Vec3 u = collision::relative_velocity(p);
  const double un = norm(u);
  if (!(un > 0.0)) {
    throw DegenerateCollision("u = 0 with anisotropic angular function");
  }
  return b.eval(dot(u, sigma) / un);
}

}  // namespace detail

// Transition function B(v, v*, I, I*, r, R, sigma) for the chosen model.
// The factored evaluation shares its pow() subexpressions with the envelope
// factors so the sandwich inequality also holds in floating point.
inline double transition(const collision::CollisionPair& p,
                         const collision::CollisionParams& cp,
                         const ModelSpec& spec) {
  const double bval = detail::angular_value(p, cp.sigma, spec.angular);
  const double g2 = 0.5 * spec.gamma;
  const double m = spec.params.m;
  const double u2 = norm2(collision::relative_velocity(p));
  const auto pg = [g2](double x) { return detail::pow_g2(x, g2); };
  switch (spec.model) {
    case Model::Model1:
      // total collision energy in the center-of-mass frame
      return bval * pg(0.25 * m * u2 + p.a.I + p.b.I);
    case Model::Model2:
      return bval *
             (pg(cp.R) * pg(u2) + pg(1.0 - cp.R) * pg((p.a.I + p.b.I) / m));
    case Model::Model3:
      return bval * (pg(cp.R) * pg(u2) +
                     pg(cp.r) * pg(1.0 - cp.R) * pg(p.a.I / m) +
                     pg(1.0 - cp.r) * pg(1.0 - cp.R) * pg(p.b.I / m));
  }
  return 0.0;
}

// The four envelope factor functions plus their suprema (used to normalize
// rejection sampling).
struct BoundFactors {
  std::function<double(double)> d_lb, d_ub, e_lb, e_ub;
  double d_ub_max = 1.0;
  double e_ub_max = 1.0;
};

inline BoundFactors bound_factors(const ModelSpec& spec) {
  const double g2 = 0.5 * spec.gamma;
  const double m_g2 = detail::pow_g2(spec.params.m, g2);
  BoundFactors f;
  const auto one = [](double) { return 1.0; };
  const auto pg_min = [g2](double x) {
    return detail::pow_g2(std::min(x, 1.0 - x), g2);
  };
  const auto pg_max = [g2](double x) {
    return detail::pow_g2(std::max(x, 1.0 - x), g2);
  };
  const auto pg_prod = [g2](double x) {
    return detail::pow_g2(x * (1.0 - x), g2);
  };
  switch (spec.model) {
    case Model::Model1: {
      f.d_lb = one;
      f.d_ub = one;
      const double lo = m_g2 * std::pow(2.0, -(g2 + 1.0));
      f.e_lb = [lo](double) { return lo; };
      f.e_ub = [m_g2](double) { return m_g2; };
      f.e_ub_max = m_g2;
      break;
    }
    case Model::Model2: {
      f.d_lb = one;
      f.d_ub = one;
      if (spec.bound_variant == BoundVariant::MinMax) {
        f.e_lb = pg_min;
        f.e_ub = pg_max;
      } else {
        f.e_lb = pg_prod;
        f.e_ub = one;
      }
      f.e_ub_max = 1.0;
      break;
    }
    case Model::Model3: {
      f.d_ub = one;
      const double c = std::pow(2.0, 1.0 - g2);
      if (spec.bound_variant == BoundVariant::MinMax) {
        f.d_lb = pg_min;
        f.e_lb = pg_min;
        f.e_ub = [c, pg_max](double R) { return c * pg_max(R); };
      } else {
        f.d_lb = pg_prod;
        f.e_lb = pg_prod;
        f.e_ub = [c](double) { return c; };
      }
      f.e_ub_max = c;
      break;
    }
  }
  return f;
}

struct Sandwich {
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
  bool holds() const { return lower <= value && value <= upper; }
};

inline Sandwich sandwich_check(const collision::CollisionPair& p,
                               const collision::CollisionParams& cp,
                               const ModelSpec& spec) {
  const BoundFactors f = bound_factors(spec);
  const double bval = detail::angular_value(p, cp.sigma, spec.angular);
  const double bt = b_tilde(p, spec);
  Sandwich s;
  s.value = transition(p, cp, spec);
  s.lower = f.d_lb(cp.r) * f.e_lb(cp.R) * bval * bt;
  s.upper = f.d_ub(cp.r) * f.e_ub(cp.R) * bval * bt;
  return s;
}

// Weighted averages of the envelope factors.  Model 1 has closed Gamma-form
// values; Models 2 and 3 are integrated adaptively against phi_a(r) dr and
// psi_a(R)(1-R)R^{1/2} dR (absolute tolerance 1e-12).  Splitting at the
// factor kinks and integrating the endpoint-singular weights adaptively
// keeps alpha in (-1, 0) well-behaved.
namespace detail {

// Weighted average of an envelope factor against phi_a(r) dr.  The axis is
// split at the factor kink; the upper half runs through the reflection
// r = 1 - t with the weight written directly in t, so that the alpha in
// (-1, 0) endpoint singularity sits at t = 0 where dyadic refinement can
// still resolve it (the fp grid near 1 cannot).
inline double average_r(const std::function<double(double)>& d,
                        double alpha) {
  const auto low = [&](double r) {
    return d(r) * collision::phi_alpha(r, alpha);
  };
  const auto high = [&](double t) {
    return d(1.0 - t) * std::pow((1.0 - t) * t, alpha);
  };
  return quad::integrate_or_throw(low, 0.0, 0.5, 5e-13) +
         quad::integrate_or_throw(high, 0.0, 0.5, 5e-13);
}

// Same against psi_a(R) (1-R) R^{1/2} dR.
inline double average_R(const std::function<double(double)>& e,
                        double alpha) {
  const auto low = [&](double R) {
    return e(R) * collision::psi_alpha(R, alpha) * (1.0 - R) * std::sqrt(R);
  };
  const auto high = [&](double t) {
    // R = 1 - t: psi_a = t^(2 alpha), (1-R) = t, sqrt(R) = sqrt(1-t)
    return e(1.0 - t) * std::pow(t, 2.0 * alpha) * t * std::sqrt(1.0 - t);
  };
  return quad::integrate_or_throw(low, 0.0, 0.5, 5e-13) +
         quad::integrate_or_throw(high, 0.0, 0.5, 5e-13);
}

}  // namespace detail

// Quadrature route, also used as the independent cross-check of the Model 1
// closed forms.
inline ModelConstants partition_constants_quadrature(const ModelSpec& spec,
                                                     double alpha) {
  if (!(alpha > -1.0)) throw DomainError("partition_constants: alpha <= -1");
  ModelConstants k;
  const BoundFactors f = bound_factors(spec);
  k.c_lb_r = detail::average_r(f.d_lb, alpha);
  k.c_ub_r = detail::average_r(f.d_ub, alpha);
  k.C_lb_R = detail::average_R(f.e_lb, alpha);
  k.C_ub_R = detail::average_R(f.e_ub, alpha);
  const double b1 = spec.angular.l1_norm();
  k.kappa_lb = b1 * k.c_lb_r * k.C_lb_R;
  k.kappa_ub = b1 * k.c_ub_r * k.C_ub_R;
  return k;
}

inline ModelConstants partition_constants(const ModelSpec& spec,
                                          double alpha) {
  if (!(alpha > -1.0)) throw DomainError("partition_constants: alpha <= -1");
  if (!(spec.model == Model::Model1 &&
        spec.bound_variant == BoundVariant::MinMax)) {
    return partition_constants_quadrature(spec, alpha);
  }
  // Model 1 has closed Gamma-function forms.
  using special::gamma_fn;
  const double g2 = 0.5 * spec.gamma;
  const double m_g2 = std::pow(spec.params.m, g2);
  ModelConstants k;
  k.c_lb_r = k.c_ub_r = gamma_fn(alpha + 1.0) * gamma_fn(alpha + 1.0) /
                        gamma_fn(2.0 * alpha + 2.0);
  const double sqrt_pi = 1.77245385090551602729816748334;
  k.C_ub_R = m_g2 * sqrt_pi * gamma_fn(2.0 * alpha + 2.0) /
             (2.0 * gamma_fn(2.0 * alpha + 3.5));
  k.C_lb_R = std::pow(2.0, -(g2 + 1.0)) * k.C_ub_R;
  const double b1 = spec.angular.l1_norm();
  k.kappa_lb = b1 * k.c_lb_r * k.C_lb_R;
  k.kappa_ub = b1 * k.c_ub_r * k.C_ub_R;
  return k;
}

inline ModelConstants partition_constants(const ModelSpec& spec) {
  return partition_constants(spec, spec.params.alpha);
}

// Normalization data for rejection sampling of (r, R, sigma) against the
// Beta(a+1, a+1) x Beta(3/2, 2a+2) x b proposal:
//   c_phi  = integral phi_a(r) dr,
//   C_psi  = integral psi_a(R)(1-R)R^{1/2} dR,
// and the suprema of the upper envelope factors.  kappa_maj is the exact
// per-pair kernel-mass majorant ||b||_1 c_phi C_psi sup(d_ub) sup(e_ub);
// for Model 1 it coincides with kappa_ub.
struct ProposalEnvelope {
  double c_phi = 0.0;
  double C_psi = 0.0;
  double d_ub_max = 1.0;
  double e_ub_max = 1.0;
  double kappa_maj = 0.0;
};

inline ProposalEnvelope proposal_envelope(const ModelSpec& spec) {
  const double a = spec.params.alpha;
  ProposalEnvelope env;
  env.c_phi = special::beta_fn(a + 1.0, a + 1.0);
  env.C_psi = special::beta_fn(1.5, 2.0 * a + 2.0);
  const BoundFactors f = bound_factors(spec);
  env.d_ub_max = f.d_ub_max;
  env.e_ub_max = f.e_ub_max;
  env.kappa_maj = spec.angular.l1_norm() * env.c_phi * env.C_psi *
                  env.d_ub_max * env.e_ub_max;
  return env;
}

// Pointwise upper envelope of the kernel potential:
//   Btilde <= 2^(gamma/2 + 1) (<v,I>^gamma + <v*,I*>^gamma),
// from |u|^g = 2^g (|u|^2/4)^(g/2), subadditivity of the g/2 power, and
// |u|^2/4 + (I+I*)/m <= <v,I>^2 + <v*,I*>^2.  The frequently quoted
// 2^(3 gamma/2 - 1) coincides with this at gamma = 2 but under-bounds the
// skewed-internal-energy states for gamma < 2 (e.g. gamma = 1,
// v = -v* = (20,0,0), I = 200, I* = 0).
inline double bracket_envelope_constant(double gamma) {
  return std::pow(2.0, 0.5 * gamma + 1.0);
}

}  // namespace polykin::models
