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

// Explicit constants of the moment theory: the compact-manifold averaging
// (Povzner-type) contracting constants, the loss/gain threshold order, the
// coercivity lower bound, the moment-ODI coefficients with their Bernoulli
// envelopes, and the exponential-moment rates.
//
// Several of these constants are astronomically large or small for physical
// configurations; everything is therefore computed in log space internally
// and exponentiated on the way out (which may round to inf/0 in double —
// the log-space accessors stay exact).

#include <cmath>
#include <limits>
#include <map>
#include <thread>
#include <vector>

#include "polykin/models.hpp"
#include "polykin/numerics.hpp"

namespace polykin::analysis {

// Closed form of the two-parameter manifold average
//   integral over [0,1]^2 of max((1+mu)/2, r)^k dr dmu
//     = 1/(k+1) + 2k/((k+1)(k+2)) (1 - (1/2)^(k+2)).
// Monotone decreasing in k and -> 0 like 3/k.
inline double povzner_cinf(double k) {
  return 1.0 / (k + 1.0) +
         2.0 * k / ((k + 1.0) * (k + 2.0)) *
             (1.0 - std::pow(0.5, k + 2.0));
}

namespace detail {

// sup_r d_ub(r) phi_alpha(r); all three models have d_ub = 1, so this is the
// peak of (r(1-r))^alpha, finite only for alpha >= 0.
inline double sup_dub_phi(const models::ModelSpec& spec) {
  const double a = spec.params.alpha;
  if (a < 0.0) {
    throw DomainError("L^inf route needs alpha >= 0 (d_ub phi_a unbounded)");
  }
  return std::pow(0.25, a);
}

// ||d_ub phi_alpha||_{L^p(dr)} = B(alpha p + 1, alpha p + 1)^{1/p}.
inline double lp_dub_phi(const models::ModelSpec& spec, double p) {
  const double a = spec.params.alpha;
  if (a * p <= -1.0) {
    throw DomainError("d_ub phi_a not in L^p for this (alpha, p)");
  }
  return std::pow(special::beta_fn(a * p + 1.0, a * p + 1.0), 1.0 / p);
}

}  // namespace detail

// Contracting constant C_k bounding the manifold average of post-collision
// 2k-brackets by E<>^k.  p = inf (default) uses
//   C_k = 8 pi C_ub ||b||_inf ||d_ub phi_a||_inf cinf(k);
// finite p uses the Holder form with the conjugate exponent.
inline double povzner_ck(double k, const models::ModelSpec& spec,
                         const models::ModelConstants& consts,
                         double p = std::numeric_limits<double>::infinity()) {
  if (std::isinf(p)) {
    const double b_inf = spec.angular.linf_norm();
    return 8.0 * 3.14159265358979323846 * consts.C_ub_R * b_inf *
           detail::sup_dub_phi(spec) * povzner_cinf(k);
  }
  if (!(p > 1.0)) throw DomainError("povzner_ck: need p > 1 or p = inf");
  const double pc = p / (p - 1.0);  // conjugate
  const double bracket = 1.0 / (k * pc + 1.0) +
                         2.0 * k * pc / ((k * pc + 1.0) * (k * pc + 2.0)) *
                             (1.0 - std::pow(0.5, k * pc + 2.0));
  return 2.0 * consts.C_ub_R * spec.angular.lp_norm(p) *
         detail::lp_dub_phi(spec, p) * std::pow(models::kFourPi, 1.0 / pc) *
         std::pow(bracket, 1.0 / pc);
}

// Threshold C* = (1/2) c_lb C_lb / C_ub; the loss moment prevails once
// cinf(k) drops below it.
inline double threshold_cstar(const models::ModelSpec& spec,
                              const models::ModelConstants& consts) {
  if (spec.params.alpha < 0.0) {
    throw DomainError("threshold_cstar: L^inf route needs alpha >= 0");
  }
  return 0.5 * consts.c_lb_r * consts.C_lb_R / consts.C_ub_R;
}

// Smallest integer k > 1 with cinf(k) < C*.  cinf is strictly decreasing, so
// a doubling scan plus bisection lands exactly on the integer boundary.
inline long find_kbar_star(const models::ModelSpec& spec,
                           const models::ModelConstants& consts,
                           long k_max = 1000000) {
  const double cstar = threshold_cstar(spec, consts);
  long lo = 1;  // cinf(1) = 19/24, never below a valid threshold
  long hi = 2;
  while (hi <= k_max && !(povzner_cinf(double(hi)) < cstar)) {
    lo = hi;
    hi *= 2;
  }
  if (hi > k_max) {
    throw NotFound("no k <= " + std::to_string(k_max) +
                   " with cinf(k) < C* (misconfigured constants?)");
  }
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (povzner_cinf(double(mid)) < cstar) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// Povzner table k -> C_k; C_k must be strictly decreasing.
struct PovznerTable {
  enum class Variant { ClosedFormLp, MonteCarlo };
  Variant variant = Variant::ClosedFormLp;
  double p = std::numeric_limits<double>::infinity();
  std::map<double, double> C;
};

// Monte Carlo estimate of the contracting constant: the supremum over the
// frame directions of the manifold average
//   2 C_ub int max((1+|Vhat.sigma|)/2, r)^k b(uhat.sigma) d_ub(r) phi_a(r)
// sampled with per-worker counter-based streams so the estimate is
// reproducible at a fixed worker count.
inline double povzner_ck_mc(double k, const models::ModelSpec& spec,
                            const models::ModelConstants& consts,
                            std::size_t n_samples, std::uint64_t seed,
                            int workers = 1) {
  if (workers < 1) workers = 1;
  const auto factors = models::bound_factors(spec);
  const double alpha = spec.params.alpha;
  const int n_angles = spec.angular.is_isotropic() ? 1 : 16;
  const std::size_t per_worker = (n_samples + workers - 1) / workers;
  double best = 0.0;
  for (int ia = 0; ia < n_angles; ++ia) {
    const double psi = n_angles == 1 ? 0.0
                                     : 3.14159265358979323846 * double(ia) /
                                           double(n_angles - 1);
    const double up[3] = {std::sin(psi), 0.0, std::cos(psi)};
    std::vector<double> partial(std::size_t(workers), 0.0);
    const auto work = [&](int w) {
      Rng rng(seed, 0x9000 + std::uint64_t(w));
      KahanSum sum;
      for (std::size_t s = 0; s < per_worker; ++s) {
        const auto sigma = rng.unit_vector();
        const double r = rng.uniform();
        const double mu_u =
            up[0] * sigma[0] + up[1] * sigma[1] + up[2] * sigma[2];
        sum.add(std::pow(std::max(0.5 * (1.0 + std::abs(sigma[2])), r), k) *
                spec.angular.eval(mu_u) * factors.d_ub(r) *
                collision::phi_alpha(r, alpha) * models::kFourPi);
      }
      partial[std::size_t(w)] = sum.value() / double(per_worker);
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    KahanSum mean;
    for (double x : partial) mean.add(x / double(workers));
    best = std::max(best, 2.0 * consts.C_ub_R * mean.value());
  }
  return best;
}

inline PovznerTable make_povzner_table(
    const models::ModelSpec& spec, const models::ModelConstants& consts,
    const std::vector<double>& orders,
    double p = std::numeric_limits<double>::infinity(),
    PovznerTable::Variant variant = PovznerTable::Variant::ClosedFormLp,
    std::size_t mc_samples = 1000000, std::uint64_t mc_seed = 0,
    int mc_workers = 1) {
  PovznerTable table;
  table.variant = variant;
  table.p = p;
  for (double k : orders) {
    table.C[k] = variant == PovznerTable::Variant::ClosedFormLp
                     ? povzner_ck(k, spec, consts, p)
                     : povzner_ck_mc(k, spec, consts, mc_samples, mc_seed,
                                     mc_workers);
  }
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& [k, ck] : table.C) {
    if (!(ck < prev)) {
      throw DomainError("make_povzner_table: C_k not strictly decreasing");
    }
    prev = ck;
  }
  return table;
}

// Hypotheses and output of the coercivity (convolution lower bound) estimate:
// mass in [M_l, M_u], kinetic+internal semi-energy in [E_l, E_u], centered
// momentum, and a (2+delta)/2 semi-moment bounded by Delta.
struct CoercivityData {
  double M_l = 0.0, M_u = 0.0;
  double E_l = 0.0, E_u = 0.0;
  double Delta = 0.0;
  double delta = 1.0;
  // filled by coercivity_clb
  double rho_star = 0.0;
  double S_of_rho = 0.0;
  double c_lb = 0.0;
};

// c_lb with  f * (|v|^gamma + (I/m)^(gamma/2)) >= c_lb <v,I>^gamma:
//   rho* = (2 (M_u + E_u) / (M_l (2^(gamma-2) - 1/8)))^(1/gamma),
//   S    = (2^(4+delta) (max(M_u, Delta)/E_l) (1+rho*^2)^((2+delta)/2))^(1/delta),
//   c_lb = (min(M_l, E_l)/8) S^(gamma-2) (1+rho*^2)^(-gamma/2),
// and c_lb = 2 in the degenerate gamma = 0 case.  S is inflated by 1e-9 to
// honor the strict inequality it comes from.
inline double coercivity_clb(CoercivityData& data, double gamma) {
  if (gamma == 0.0) {
    data.c_lb = 2.0;
    return data.c_lb;
  }
  if (!(gamma > 0.0 && gamma <= 2.0)) {
    throw DomainError("coercivity_clb: gamma must lie in [0, 2]");
  }
  if (!(data.M_l > 0.0) || !(data.E_l > 0.0)) {
    throw DomainError("coercivity_clb: M_l and E_l must be positive");
  }
  if (!(data.delta > 0.0)) throw DomainError("coercivity_clb: delta <= 0");
  const double denom = data.M_l * (std::pow(2.0, gamma - 2.0) - 0.125);
  data.rho_star = std::pow(2.0 * (data.M_u + data.E_u) / denom, 1.0 / gamma);
  const double one_rho2 = 1.0 + data.rho_star * data.rho_star;
  data.S_of_rho =
      std::pow(std::pow(2.0, 4.0 + data.delta) *
                   (std::max(data.M_u, data.Delta) / data.E_l) *
                   std::pow(one_rho2, 0.5 * (2.0 + data.delta)),
               1.0 / data.delta) *
      (1.0 + 1e-9);
  data.c_lb = (std::min(data.M_l, data.E_l) / 8.0) *
              std::pow(data.S_of_rho, gamma - 2.0) *
              std::pow(one_rho2, -0.5 * gamma);
  return data.c_lb;
}

// Coefficients of the moment ordinary differential inequality
//   d/dt m_k <= -A_{k*} m_k^(1 + (gamma/2)/k) + B_k m_k,
// for k above the threshold order k* = max(kbar*, 1+gamma, 1+delta/2).
struct MomentEntry {
  double k = 0.0;
  double C_k = 0.0;
  double eta_k = 0.0;
  double theta_k = 0.0;
  double log_B_k = 0.0;  // natural log; B_k itself may overflow
  double B_k = 0.0;
  // Bernoulli envelope y' = -a y^(1+c) + b y
  double bern_a = 0.0, bern_b = 0.0, bern_c = 0.0;
};

struct MomentBoundCoeffs {
  double gamma = 2.0;
  double m0 = 1.0;  // mass (zeroth moment)
  double m1 = 1.0;  // first Lebesgue moment
  double c_lb = 0.0;
  double kappa_lb = 0.0;
  double kbar_star = 0.0;
  double k_star = 0.0;
  double C_kstar = 0.0;
  double A_kstar = 0.0;  // (c_lb/2)(kappa_lb - C_{k*}) m0^(-(gamma/2)/k*)
  double eps = 0.0;      // (c_lb/2)(1 - C_{k*}/kappa_lb)
  std::map<double, MomentEntry> entries;
};

inline MomentBoundCoeffs make_moment_coeffs(
    const models::ModelSpec& spec, const models::ModelConstants& consts,
    const CoercivityData& coer, double m0, double m1) {
  if (!(coer.c_lb > 0.0)) {
    throw DomainError("make_moment_coeffs: coercivity c_lb not computed");
  }
  MomentBoundCoeffs mc;
  mc.gamma = spec.gamma;
  mc.m0 = m0;
  mc.m1 = m1;
  mc.c_lb = coer.c_lb;
  mc.kappa_lb = consts.kappa_lb;
  mc.kbar_star = double(find_kbar_star(spec, consts));
  mc.k_star = std::max({mc.kbar_star, 1.0 + spec.gamma, 1.0 + 0.5 * coer.delta});
  mc.C_kstar = povzner_ck(mc.k_star, spec, consts);
  if (mc.C_kstar >= mc.kappa_lb) {
    throw DomainError("make_moment_coeffs: C_{k*} >= kappa_lb");
  }
  mc.A_kstar = 0.5 * mc.c_lb * (mc.kappa_lb - mc.C_kstar) *
               std::pow(m0, -(0.5 * spec.gamma) / mc.k_star);
  mc.eps = 0.5 * mc.c_lb * (1.0 - mc.C_kstar / mc.kappa_lb);
  return mc;
}

inline const MomentEntry& moment_coeffs(MomentBoundCoeffs& mc,
                                        const models::ModelSpec& spec,
                                        const models::ModelConstants& consts,
                                        double k) {
  if (!(k >= mc.k_star)) {
    throw DomainError("moment_coeffs: k below threshold order k*");
  }
  const auto found = mc.entries.find(k);
  if (found != mc.entries.end()) return found->second;

  MomentEntry e;
  e.k = k;
  e.C_k = povzner_ck(k, spec, consts);
  const double g2 = 0.5 * mc.gamma;
  e.theta_k = g2 / (k - 1.0 + g2) + (k - 1.0) / (k + g2);
  e.eta_k = std::pow(mc.m0, (1.0 + g2) / (k + g2)) *
            std::pow(mc.m1, (k - 1.0) / (k - 1.0 + g2));
  // B_k = C_k 2^((3g+k)/2) max{ (kappa_lb 2^((3g+k)/2) / A)^(t/(1-t))
  //                              eta^(1/(1-t)) / m1 , 1 } m1, in log space.
  const double ln2 = 0.69314718055994530941723212145818;
  const double pow2_log = 0.5 * (3.0 * mc.gamma + k) * ln2;
  const double t_ratio = e.theta_k / (1.0 - e.theta_k);
  const double max_arg = t_ratio * (std::log(mc.kappa_lb) + pow2_log -
                                    std::log(mc.A_kstar)) +
                         (1.0 / (1.0 - e.theta_k)) * std::log(e.eta_k) -
                         std::log(mc.m1);
  e.log_B_k = std::log(e.C_k) + pow2_log + std::max(max_arg, 0.0) +
              std::log(mc.m1);
  e.B_k = std::exp(e.log_B_k);
  e.bern_a = mc.A_kstar;
  e.bern_b = e.B_k;
  e.bern_c = 0.5 * mc.gamma / k;
  return mc.entries.emplace(k, e).first->second;
}

// Explicit solution of y' = -a y^(1+c) + b y, y(0) = y0:
//   y(t) = ( (a/b)(1 - e^(-cbt)) + y0^(-c) e^(-cbt) )^(-1/c).
inline double bernoulli_envelope(double a, double b, double c, double y0,
                                 double t) {
  if (!(a > 0.0 && b > 0.0 && c > 0.0 && y0 > 0.0)) {
    throw DomainError("bernoulli_envelope: a, b, c, y0 must be positive");
  }
  const double decay = std::exp(-c * b * t);
  return std::pow(a / b * (1.0 - decay) + std::pow(y0, -c) * decay,
                  -1.0 / c);
}

// log of the uniform-in-time propagation bound max{(B_k/A)^(2k/gamma), m_k(0)}.
inline double propagation_bound_log(const MomentBoundCoeffs& mc,
                                    const MomentEntry& e, double mk0) {
  const double exponent = 2.0 * e.k / mc.gamma;
  const double stat = exponent * (e.log_B_k - std::log(mc.A_kstar));
  return std::max(stat, std::log(mk0));
}

inline double propagation_bound(const MomentBoundCoeffs& mc,
                                const MomentEntry& e, double mk0) {
  return std::exp(propagation_bound_log(mc, e, mk0));
}

// log of the generation-bound prefactor
//   Bk_frak = (B/A)^(2k/g) max{ (g B/(2k))^(-2k/g) e^(B/2),
//                               (1 - e^(-g B/(2k)))^(-2k/g) }.
inline double generation_prefactor_log(const MomentBoundCoeffs& mc,
                                       const MomentEntry& e) {
  const double ex = 2.0 * e.k / mc.gamma;
  const double logA = std::log(mc.A_kstar);
  const double x = e.log_B_k - std::log(ex);  // log(g B/(2k)) = log B - log(2k/g)
  double alt1;
  if (e.B_k < 700.0) {
    alt1 = -ex * x + 0.5 * e.B_k;
  } else {
    alt1 = std::numeric_limits<double>::infinity();
  }
  double alt2;
  const double gb2k = std::exp(x);
  if (gb2k > 1e-8) {
    alt2 = -ex * std::log1p(-std::exp(-gb2k));
  } else {
    alt2 = -ex * x;  // 1 - e^-z ~ z
  }
  return ex * (e.log_B_k - logA) + std::max(alt1, alt2);
}

// Generation bound Bk_frak * max{1, t^(-2k/gamma)} for t > 0.
inline double generation_bound(const MomentBoundCoeffs& mc,
                               const MomentEntry& e, double t) {
  if (!(t > 0.0)) throw DomainError("generation_bound: t must be positive");
  const double ex = 2.0 * e.k / mc.gamma;
  const double log_t_factor = t >= 1.0 ? 0.0 : -ex * std::log(t);
  return std::exp(generation_prefactor_log(mc, e) + log_t_factor);
}

// Exponential-moment rate results.  The exact rates for gamma
// near 2 are far below double resolution; `beta` is then clamped to the
// smallest positive normal double and the exact value kept in log space.
struct ExpRateResult {
  double beta = 0.0;
  long k0 = 0;
  double A_ks = 0.0;        // c_lb (kappa_lb - C_{k*})
  double log_beta_cap = 0.0;  // natural log of the data-dependent candidate
  bool clamped = false;
};

namespace detail {

inline double clamp_beta(double log_beta, bool& clamped) {
  const double b = std::exp(log_beta);
  if (b >= std::numeric_limits<double>::min()) return b;
  clamped = true;
  return std::numeric_limits<double>::min();
}

// Smallest k0 > k_lo with C(order_scale * k0) < bound, by doubling +
// bisection on the monotone closed form.
inline long find_k0(const models::ModelSpec& spec,
                    const models::ModelConstants& consts, double order_scale,
                    double k_lo, double bound, long k0_max) {
  const auto ok = [&](long k0) {
    return povzner_ck(order_scale * double(k0), spec, consts) < bound;
  };
  long lo = std::max<long>(1, long(std::floor(k_lo)) + 1);
  if (ok(lo)) return lo;
  long hi = 2 * lo;
  while (hi <= k0_max && !ok(hi)) {
    lo = hi;
    hi *= 2;
  }
  if (hi > k0_max) {
    throw NoValidK0("no k0 <= " + std::to_string(k0_max) +
                    " satisfies the smallness condition");
  }
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace detail

// Propagation: rate beta = min{beta0, ln 2, (A_ks M_P / (4 c (1+A_ks)))^(g/2)}
// where k0 is the smallest index making the tail coefficient small,
//   2^(3g/2 - 1) C_{s k0} * 8 M_P < A_ks / 2,
// and c uniformly bounds the low-order moments and their derivatives (via
// the propagation bounds at the dominating order and the initial exponential
// moment).
inline ExpRateResult exp_rate_propagation(MomentBoundCoeffs& mc,
                                          const models::ModelSpec& spec,
                                          const models::ModelConstants& consts,
                                          double s, double beta0, double MP,
                                          long k0_max = 100000000) {
  if (!(s > 0.0 && s <= 1.0)) throw DomainError("exp rate: need 0 < s <= 1");
  if (!(beta0 > 0.0 && MP > 0.0)) throw DomainError("exp rate: beta0, MP > 0");
  ExpRateResult out;
  out.A_ks = mc.c_lb * (mc.kappa_lb - mc.C_kstar);
  const double tail = std::pow(2.0, 1.5 * mc.gamma - 1.0);
  out.k0 = detail::find_k0(spec, consts, s, mc.k_star / s,
                           out.A_ks / (16.0 * MP * tail), k0_max);

  // Dominating moment order for the low-index uniform constant.
  const double K = std::max(s * double(out.k0 - 1) + 1.0, mc.k_star + 1.0);
  const MomentEntry& eK = moment_coeffs(mc, spec, consts, K);
  // m_{s k}(0) <= MP k!/beta0^k for k <= k0 - 1.
  const double log_minit = std::log(MP) +
                           special::log_gamma_fn(double(out.k0)) -
                           double(out.k0 - 1) * std::log(beta0);
  const double log_MK =
      std::max(2.0 * K / mc.gamma * (eK.log_B_k - std::log(mc.A_kstar)),
               log_minit);
  const double log_c = log_MK + std::max(0.0, eK.log_B_k);

  out.log_beta_cap = 0.5 * mc.gamma *
                     (std::log(out.A_ks) + std::log(MP) - std::log(4.0) -
                      log_c - std::log1p(out.A_ks));
  const double ln2 = 0.69314718055994530941723212145818;
  double beta = std::min(beta0, ln2);
  if (out.log_beta_cap < std::log(beta)) {
    beta = detail::clamp_beta(out.log_beta_cap, out.clamped);
  }
  out.beta = beta;
  return out;
}

// Generation: beta = min{ ln 2, A_ks M_G / (4 cbar (1 + A_ks)) } with k0 the
// smallest index making 4 * 2^(3g/2-1) C_{g k0 / 2} M_G < A_ks / 2 and cbar
// the uniform constant built from the generation bounds.
inline ExpRateResult exp_rate_generation(MomentBoundCoeffs& mc,
                                         const models::ModelSpec& spec,
                                         const models::ModelConstants& consts,
                                         double MG, long k0_max = 100000000) {
  if (!(MG > 0.0)) throw DomainError("exp rate: MG > 0");
  ExpRateResult out;
  out.A_ks = mc.c_lb * (mc.kappa_lb - mc.C_kstar);
  const double tail = std::pow(2.0, 1.5 * mc.gamma - 1.0);
  out.k0 = detail::find_k0(spec, consts, 0.5 * mc.gamma,
                           2.0 * mc.k_star / mc.gamma,
                           out.A_ks / (8.0 * MG * tail), k0_max);
  const double K =
      std::max(0.5 * mc.gamma * double(out.k0 - 1) + 1.0, mc.k_star + 1.0);
  const MomentEntry& eK = moment_coeffs(mc, spec, consts, K);
  const double log_cbar =
      generation_prefactor_log(mc, eK) + std::max(0.0, eK.log_B_k);
  out.log_beta_cap = std::log(out.A_ks) + std::log(MG) - std::log(4.0) -
                     log_cbar - std::log1p(out.A_ks);
  const double ln2 = 0.69314718055994530941723212145818;
  double beta = ln2;
  if (out.log_beta_cap < std::log(beta)) {
    beta = detail::clamp_beta(out.log_beta_cap, out.clamped);
  }
  out.beta = beta;
  return out;
}

}  // namespace polykin::analysis
