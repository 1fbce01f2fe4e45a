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

// Stochastic particle solution of the space-homogeneous polyatomic Boltzmann
// equation: equilibrium and non-equilibrium samplers, collision-parameter
// sampling on the compact manifold, a no-time-counter majorant collision
// loop, and runtime diagnostics.
//
// Rate normalization: with the distribution represented as
// f = weight * sum_i delta_i, the loss frequency of particle i is
// weight * sum_j Lambda(i,j), Lambda(i,j) the kernel mass of the pair.  The
// candidate count uses the per-pair majorant
//   Lambda_max = kappa_maj * env(gamma) * 2 max_i <v_i,I_i>^gamma,
// with kappa_maj the proposal-normalization constant of the model envelope
// and env(gamma) the pointwise bracket bound on the kernel potential;
// accepted candidates are thinned through the bracket bound, the
// kernel-potential bound, and the parameter-proposal weight so the accepted
// collision measure is exactly weight * B phi psi (1-R) R^(1/2).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polykin/analysis.hpp"
#include "polykin/collision.hpp"
#include "polykin/core.hpp"
#include "polykin/models.hpp"
#include "polykin/rng.hpp"

namespace polykin::dsmc {

struct InitSpec {
  enum class Kind { Equilibrium, TwoTemperature, BimodalBeams, Custom };
  Kind kind = Kind::Equilibrium;
  double T = 1.0;       // Equilibrium
  double T_kin = 1.0;   // TwoTemperature: translational temperature
  double T_int = 1.0;   // TwoTemperature / BimodalBeams: internal temperature
  double speed = 1.0;   // BimodalBeams shell speed
  std::string custom_path;  // Custom: CSV rows "vx vy vz I"

  bool isotropic() const { return kind != Kind::Custom; }
};

struct Diagnostics {
  std::vector<double> moment_orders{1.0, 2.0, 3.0};
  std::vector<std::pair<double, double>> exp_moments;  // (s, beta)
  bool entropy = false;
  int entropy_bins = 40;
  bool coercivity_spotcheck = false;
  int coercivity_probes = 100;
};

struct SimConfig {
  std::size_t n_particles = 10000;
  double t_end = 1.0;
  double dt_report = 0.1;
  std::uint64_t seed = 0;
  int replicas = 1;
  double delta = 1.0;  // order parameter of the coercivity semi-moment
  models::ModelSpec model;
  InitSpec init;
  Diagnostics diagnostics;

  void validate() const {
    model.validate();
    if (n_particles < 2) throw ConfigError("n_particles must be >= 2");
    if (!(t_end > 0.0)) throw ConfigError("t_end must be > 0");
    if (!(dt_report > 0.0)) throw ConfigError("dt_report must be > 0");
    if (replicas < 1) throw ConfigError("replicas must be >= 1");
    if (init.kind == InitSpec::Kind::Equilibrium && !(init.T > 0.0)) {
      throw ConfigError("Equilibrium temperature must be > 0");
    }
    if (init.kind == InitSpec::Kind::TwoTemperature &&
        (!(init.T_kin > 0.0) || !(init.T_int > 0.0))) {
      throw ConfigError("TwoTemperature temperatures must be > 0");
    }
    if (init.kind == InitSpec::Kind::BimodalBeams &&
        (!(init.speed > 0.0) || !(init.T_int > 0.0))) {
      throw ConfigError("BimodalBeams needs speed > 0 and T_int > 0");
    }
  }
};

// Maxwellian sample: Gaussian velocities (variance kT/m per component) and
// Gamma(alpha+1, kT) internal energies.  Particles carry weight 1/n so the
// sampled mass density (zeroth moment) is one.
inline Ensemble sample_equilibrium(std::size_t n, double T,
                                   const GasParams& params, Rng& rng) {
  if (!(T > 0.0) || n < 1) throw DomainError("sample_equilibrium: T, n");
  Ensemble ens;
  ens.particles.resize(n);
  ens.weight = 1.0 / double(n);
  const double sv = std::sqrt(params.kB * T / params.m);
  for (auto& s : ens.particles) {
    s.v = {sv * rng.normal(), sv * rng.normal(), sv * rng.normal()};
    s.I = rng.gamma(params.alpha + 1.0, params.kB * T);
  }
  return ens;
}

inline Ensemble sample_equilibrium(std::size_t n, double T,
                                   const GasParams& params,
                                   std::uint64_t seed) {
  Rng rng(seed, 0);
  return sample_equilibrium(n, T, params, rng);
}

inline Ensemble init_ensemble(const InitSpec& init, std::size_t n,
                              const GasParams& params, Rng& rng);

// --- collision-parameter sampling -----------------------------------------

struct ParamSampleStats {
  std::uint64_t tried = 0;
  std::uint64_t accepted = 0;
};

namespace detail {

struct Proposal {
  collision::CollisionParams cp;
  double b_value = 0.0;  // b(uhat . sigma) at the drawn sigma
};

// Draw (r, R, sigma) from the proposal measure
//   Beta(a+1, a+1) x Beta(3/2, 2a+2) x b-distribution,
// i.e. proportional to phi_a(r) dr, psi_a(R)(1-R)R^(1/2) dR and b dsigma.
inline Proposal draw_proposal(const Vec3& u_dir, bool have_dir,
                              const models::ModelSpec& spec, Rng& rng) {
  const double a = spec.params.alpha;
  Proposal prop;
  prop.cp.r = rng.beta(a + 1.0, a + 1.0);
  prop.cp.R = rng.beta(1.5, 2.0 * a + 2.0);
  if (spec.angular.is_isotropic()) {
    prop.cp.sigma = rng.unit_vector();
    prop.b_value = 1.0 / models::kFourPi;
  } else {
    if (!have_dir) {
      throw DegenerateCollision("u = 0 with anisotropic angular function");
    }
    const double mu = spec.angular.sample_mu(rng);
    // orthonormal frame around u_dir
    Vec3 e1;
    if (std::abs(u_dir[0]) < 0.6) {
      e1 = {0.0, -u_dir[2], u_dir[1]};
    } else {
      e1 = {-u_dir[1], u_dir[0], 0.0};
    }
    const double n1 = norm(e1);
    e1 = (1.0 / n1) * e1;
    const Vec3 e2{u_dir[1] * e1[2] - u_dir[2] * e1[1],
                  u_dir[2] * e1[0] - u_dir[0] * e1[2],
                  u_dir[0] * e1[1] - u_dir[1] * e1[0]};
    const double phi = 6.283185307179586476925286766559 * rng.uniform();
    const double st = std::sqrt(std::fmax(0.0, 1.0 - mu * mu));
    prop.cp.sigma = mu * u_dir + (st * std::cos(phi)) * e1 +
                    (st * std::sin(phi)) * e2;
    prop.b_value = spec.angular.eval(mu);
  }
  return prop;
}

}  // namespace detail

// Sample (r, R, sigma) with density proportional to
// B(.,r,R,sigma) phi_a(r) psi_a(R) (1-R) R^(1/2) for the fixed pair, by
// rejection against the Beta x Beta x b proposal.  The acceptance weight is
// B / (sup(d_ub) sup(e_ub) b Btilde), which the extended-Grad sandwich keeps
// in [0, 1].
inline collision::CollisionParams sample_params(
    const collision::CollisionPair& pair, const models::ModelSpec& spec,
    const models::ProposalEnvelope& env, Rng& rng,
    ParamSampleStats* stats = nullptr) {
  const Vec3 u = collision::relative_velocity(pair);
  const double un = norm(u);
  const bool have_dir = un > 0.0;
  const Vec3 u_dir = have_dir ? (1.0 / un) * u : Vec3{0.0, 0.0, 1.0};
  const double bt = models::b_tilde(pair, spec);
  if (!(bt > 0.0)) {
    throw DegenerateCollision("sample_params: zero kernel potential");
  }
  const double denom_const = env.d_ub_max * env.e_ub_max * bt;
  for (std::uint64_t tries = 1; tries <= 1000000; ++tries) {
    const auto prop = detail::draw_proposal(u_dir, have_dir, spec, rng);
    if (stats) ++stats->tried;
    const double B = models::transition(pair, prop.cp, spec);
    const double w = B / (denom_const * prop.b_value);
    if (rng.uniform() < w) {
      if (stats) ++stats->accepted;
      return prop.cp;
    }
  }
  throw RejectionStall("sample_params: acceptance < 1e-6 over 1e6 tries");
}

// --- the no-time-counter loop ----------------------------------------------

struct MajorantState {
  double max_br2 = 0.0;     // running max of <v,I>^2 over the ensemble
  double lambda_max = 0.0;  // per-pair rate majorant
  std::uint64_t candidates = 0;
  std::uint64_t accepted = 0;
  std::uint64_t param_trials = 0;
  std::uint64_t violations = 0;
  int steps_since_refresh = 0;

  void refresh(const Ensemble& ens, const models::ModelSpec& spec,
               const models::ProposalEnvelope& env) {
    double mx = 0.0;
    for (const auto& s : ens.particles) {
      mx = std::max(mx, bracket2(s, spec.params));
    }
    max_br2 = mx;
    recompute_lambda(spec, env);
    steps_since_refresh = 0;
  }

  void recompute_lambda(const models::ModelSpec& spec,
                        const models::ProposalEnvelope& env) {
    lambda_max = env.kappa_maj * 2.0 *
                 models::bracket_envelope_constant(spec.gamma) *
                 models::detail::pow_g2(max_br2, 0.5 * spec.gamma);
  }
};

// One NTC sweep of length dt.  Candidate pairs are drawn uniformly; each is
// thinned by (i) the bracket majorant, (ii) the kernel-potential envelope,
// and (iii) one parameter proposal, then collided in place with exact
// per-collision conservation.  A candidate whose pair bound exceeds
// lambda_max is a logged majorant violation; the majorant is refreshed and
// the sweep continues.
inline void step(Ensemble& ens, double dt, const models::ModelSpec& spec,
                 const models::ProposalEnvelope& env, MajorantState& maj,
                 Rng& rng) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
  const std::size_t N = ens.size();
  if (N < 2) throw DomainError("step: need at least two particles");
  const double g2 = 0.5 * spec.gamma;
  const auto pg = [g2](double x) { return models::detail::pow_g2(x, g2); };
  if (maj.lambda_max <= 0.0 || ++maj.steps_since_refresh >= 64) {
    maj.refresh(ens, spec, env);
  }
  const double env_c = models::bracket_envelope_constant(spec.gamma);
  const double m = spec.params.m;
  const double pair_count = 0.5 * double(N) * double(N - 1);
  const double mean_candidates = pair_count * ens.weight * maj.lambda_max * dt;
  // Stochastic rounding keeps the candidate rate exact (a fixed ceil would
  // bias it upward by up to one candidate per sweep).
  auto n_cand = std::uint64_t(std::floor(mean_candidates));
  if (rng.uniform() < mean_candidates - double(n_cand)) ++n_cand;

  auto& parts = ens.particles;
  for (std::uint64_t c = 0; c < n_cand; ++c) {
    ++maj.candidates;
    const std::size_t i = std::size_t(rng.below(N));
    std::size_t j = std::size_t(rng.below(N - 1));
    if (j >= i) ++j;
    const double br2_i = bracket2(parts[i], spec.params);
    const double br2_j = bracket2(parts[j], spec.params);
    if (br2_i > maj.max_br2 || br2_j > maj.max_br2) {
      ++maj.violations;
      maj.max_br2 = std::max(br2_i, br2_j);
      maj.recompute_lambda(spec, env);
    }
    const double br_sum = pg(br2_i) + pg(br2_j);
    const double p_pair = br_sum / (2.0 * pg(maj.max_br2));
    if (rng.uniform() >= p_pair) continue;

    const collision::CollisionPair pair{parts[i], parts[j]};
    const Vec3 u = collision::relative_velocity(pair);
    const double u2 = norm2(u);
    const double itot = pair.a.I + pair.b.I;
    if (!(u2 > 0.0 || itot > 0.0)) continue;  // zero total energy
    const double bt = pg(u2) + pg(itot / m);
    const double p_kernel = bt / (env_c * br_sum);

    const double un = std::sqrt(u2);
    const bool have_dir = un > 0.0;
    if (!have_dir && !spec.angular.is_isotropic()) continue;
    const Vec3 u_dir = have_dir ? (1.0 / un) * u : Vec3{0.0, 0.0, 1.0};
    const auto prop = detail::draw_proposal(u_dir, have_dir, spec, rng);
    ++maj.param_trials;
    const double B = models::transition(pair, prop.cp, spec);
    const double p_param =
        B / (env.d_ub_max * env.e_ub_max * prop.b_value * bt);
    if (rng.uniform() >= p_kernel * p_param) continue;

    const auto post = collision::transform(pair, prop.cp, spec.params);
    parts[i] = post.pair.a;
    parts[j] = post.pair.b;
    ++maj.accepted;
    ++ens.collision_tally;
  }
  ens.time += dt;
}

// dt that keeps the expected candidate count per sweep at most 0.1 N.
inline double suggested_dt(const Ensemble& ens, const models::ModelSpec& spec,
                           const models::ProposalEnvelope& env,
                           MajorantState& maj) {
  if (maj.lambda_max <= 0.0) maj.refresh(ens, spec, env);
  const double N = double(ens.size());
  const double pair_rate = 0.5 * N * (N - 1.0) * ens.weight * maj.lambda_max;
  return 0.1 * N / pair_rate;
}

// Advance until the accepted-collision tally reaches `target_tally`.  With
// the mean free time defined as N / (accepted collisions per unit time),
// running for n mean free times is exactly running for n * N collisions.
template <class Callback>
void run_until_collisions(Ensemble& ens, std::uint64_t target_tally,
                          const models::ModelSpec& spec,
                          const models::ProposalEnvelope& env,
                          MajorantState& maj, Rng& rng, Callback&& cb,
                          std::uint64_t callback_every) {
  std::uint64_t next_cb =
      callback_every ? ens.collision_tally + callback_every : target_tally;
  while (ens.collision_tally < target_tally) {
    step(ens, suggested_dt(ens, spec, env, maj), spec, env, maj, rng);
    if (ens.collision_tally >= next_cb) {
      cb(ens);
      next_cb += callback_every;
    }
  }
}

// --- diagnostics ------------------------------------------------------------

// Histogram entropy estimate of integral f log(f I^-alpha) for ensembles
// isotropic in velocity.  The density is binned over (speed, I) and mapped
// back to phase space through the 4 pi w^2 shell factor; the range covers
// the 99.9% quantiles with outliers clamped into the last bin, which keeps
// occupied cells statistically meaningful.  Absolute values are binning
// dependent; only trends and stationarity are asserted by the test suites.
inline double entropy_estimate(const Ensemble& ens, const GasParams& params,
                               int bins = 40) {
  if (bins < 10) throw DomainError("entropy_estimate: bins must be >= 10");
  const std::size_t N = ens.size();
  if (N < 100) throw InsufficientSamples("entropy_estimate: ensemble too small");
  KahanSum ux, uy, uz;
  for (const auto& s : ens.particles) {
    ux.add(s.v[0]);
    uy.add(s.v[1]);
    uz.add(s.v[2]);
  }
  const Vec3 U{ux.value() / double(N), uy.value() / double(N),
               uz.value() / double(N)};
  std::vector<double> w(N), en(N);
  for (std::size_t i = 0; i < N; ++i) {
    w[i] = norm(ens.particles[i].v - U);
    en[i] = ens.particles[i].I;
  }
  auto quantile = [](std::vector<double> v, double q) {
    const std::size_t idx = std::size_t(q * double(v.size() - 1));
    std::nth_element(v.begin(), v.begin() + idx, v.end());
    return v[idx];
  };
  const double w_max = std::max(quantile(w, 0.999), 1e-12);
  const double I_max = std::max(quantile(en, 0.999), 1e-12);
  const double dw = w_max / bins;
  const double dI = I_max / bins;
  std::vector<std::uint64_t> counts(std::size_t(bins) * bins, 0);
  for (std::size_t i = 0; i < N; ++i) {
    const int bw = std::min(bins - 1, int(w[i] / dw));
    const int bi = std::min(bins - 1, int(en[i] / dI));
    ++counts[std::size_t(bw) * bins + bi];
  }
  std::size_t occupied = 0, thin = 0;
  KahanSum H;
  const double four_pi = models::kFourPi;
  for (int bw = 0; bw < bins; ++bw) {
    for (int bi = 0; bi < bins; ++bi) {
      const std::uint64_t c = counts[std::size_t(bw) * bins + bi];
      if (c == 0) continue;
      ++occupied;
      if (c < 5) ++thin;
      const double wc = (bw + 0.5) * dw;
      const double Ic = (bi + 0.5) * dI;
      const double h = ens.weight * double(c) / (dw * dI);
      const double f_hat = h / (four_pi * wc * wc);
      H.add(h * dw * dI *
            (std::log(f_hat) - params.alpha * std::log(Ic)));
    }
  }
  if (2 * thin > occupied) {
    throw InsufficientSamples("entropy_estimate: > 50% of occupied cells "
                              "have < 5 particles");
  }
  return H.value();
}

// Coercivity hypotheses evaluated on the ensemble: exact mass and
// kinetic+internal semi-energy, and the (2+delta)/2 semi-moment.
inline analysis::CoercivityData coercivity_data_from_ensemble(
    const Ensemble& ens, const GasParams& params, double delta) {
  analysis::CoercivityData d;
  d.delta = delta;
  const double m0 = ens.number_density();
  d.M_l = d.M_u = m0;
  KahanSum e, dd;
  for (const auto& s : ens.particles) {
    const double x = 0.5 * norm2(s.v) + s.I / params.m;
    e.add(x);
    dd.add(std::pow(x, 0.5 * (2.0 + delta)));
  }
  d.E_l = d.E_u = ens.weight * e.value();
  d.Delta = ens.weight * dd.value();
  return d;
}

// Spot check of the convolution lower bound
//   weight sum_j (|v - v_j|^gamma + ((I + I_j)/m)^(gamma/2))
//     >= c_lb <v,I>^gamma
// at the probe states.  The ensemble must be momentum-centered; callers
// shift to the center-of-momentum frame first.
inline std::vector<std::pair<double, double>> coercivity_spotcheck(
    const Ensemble& ens, const models::ModelSpec& spec,
    const analysis::CoercivityData& data,
    const std::vector<MolecularState>& probes) {
  if (!(data.c_lb > 0.0)) {
    throw DomainError("coercivity_spotcheck: c_lb not computed");
  }
  const auto obs = observables(ens, spec.params);
  const double thermal =
      std::sqrt(std::max(spec.params.kB * obs.T_equiv, 1e-300) /
                spec.params.m);
  if (norm(obs.U) > 1e-8 * thermal) {
    throw HypothesisViolation("ensemble momentum not centered; shift frame");
  }
  const double g2 = 0.5 * spec.gamma;
  const auto pg = [g2](double x) { return models::detail::pow_g2(x, g2); };
  std::vector<std::pair<double, double>> out;
  out.reserve(probes.size());
  for (const auto& probe : probes) {
    KahanSum acc;
    for (const auto& s : ens.particles) {
      const double du2 = norm2(probe.v - s.v);
      acc.add((spec.gamma == 0.0 ? 2.0
                                 : pg(du2) + pg((probe.I + s.I) / spec.params.m)));
    }
    const double lhs = ens.weight * acc.value();
    const double rhs = data.c_lb * pg(bracket2(probe, spec.params));
    out.emplace_back(lhs, rhs);
  }
  return out;
}

struct PovznerMcResult {
  double ratio_max = 0.0;  // max over pairs of manifold average / E<>^k
  double C_k = 0.0;        // analytic contracting constant
  double std_err_at_max = 0.0;
};

// Monte Carlo check of the compact-manifold averaging bound: for random
// ensemble pairs, estimate the K-average of <v',I'>^2k + <v*',I*'>^2k
// against the d_ub e_ub b weighted measure and compare with C_k E<>^k.
inline PovznerMcResult povzner_mc_check(const Ensemble& ens,
                                        const models::ModelSpec& spec,
                                        const models::ModelConstants& consts,
                                        double k, std::size_t n_pairs,
                                        Rng& rng,
                                        std::size_t n_inner = 4000) {
  if (!(k >= 1.0)) throw DomainError("povzner_mc_check: k >= 1");
  const auto env = models::proposal_envelope(spec);
  const auto factors = models::bound_factors(spec);
  const double measure_norm =
      spec.angular.l1_norm() * env.c_phi * env.C_psi;
  PovznerMcResult res;
  res.C_k = analysis::povzner_ck(k, spec, consts);
  const std::size_t N = ens.size();
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const std::size_t i = std::size_t(rng.below(N));
    std::size_t j = std::size_t(rng.below(N - 1));
    if (j >= i) ++j;
    const collision::CollisionPair pair{ens.particles[i], ens.particles[j]};
    const Vec3 u = collision::relative_velocity(pair);
    const double un = norm(u);
    if (!(un > 0.0)) continue;
    const Vec3 u_dir = (1.0 / un) * u;
    const double Eb = bracket2(pair.a, spec.params) +
                      bracket2(pair.b, spec.params);
    KahanSum sum, sum2;
    for (std::size_t t = 0; t < n_inner; ++t) {
      const auto prop = detail::draw_proposal(u_dir, true, spec, rng);
      const auto post = collision::transform(pair, prop.cp, spec.params);
      const double val =
          (std::pow(bracket2(post.pair.a, spec.params), k) +
           std::pow(bracket2(post.pair.b, spec.params), k)) *
          factors.d_ub(prop.cp.r) * factors.e_ub(prop.cp.R);
      sum.add(val);
      sum2.add(val * val);
    }
    const double mean = sum.value() / double(n_inner);
    const double var =
        std::max(0.0, sum2.value() / double(n_inner) - mean * mean);
    const double scale = measure_norm / std::pow(Eb, k);
    const double ratio = mean * scale;
    if (ratio > res.ratio_max) {
      res.ratio_max = ratio;
      res.std_err_at_max = std::sqrt(var / double(n_inner)) * scale;
    }
  }
  return res;
}

// --- full simulation --------------------------------------------------------

struct RunResult {
  std::vector<MomentReport> reports;
  MajorantState majorant;
  Ensemble final_ensemble;
  bool conservation_ok = true;
  double momentum_drift = 0.0;  // max over reports, relative
  double energy_drift = 0.0;
  double mean_free_time = 0.0;  // N / (accepted collisions per unit time)
  bool entropy_disabled = false;
  // final-state coercivity spot check, when requested
  bool spotcheck_done = false;
  int spotcheck_violations = 0;
  double spotcheck_min_margin = 0.0;
};

inline MomentReport make_report(const Ensemble& ens,
                                const models::ModelSpec& spec,
                                const Diagnostics& diag, bool want_entropy,
                                int replica) {
  MomentReport rep;
  rep.time = ens.time;
  rep.replica = replica;
  const auto obs = observables(ens, spec.params);
  rep.mass_density = obs.rho;
  rep.momentum = total_momentum(ens, spec.params);
  rep.total_energy = total_energy(ens, spec.params);
  for (double k : diag.moment_orders) {
    rep.poly_moments[k] = poly_moment(ens, k, spec.params);
  }
  for (const auto& [s, beta] : diag.exp_moments) {
    rep.exp_moments[{s, beta}] = exp_moment(ens, s, beta, spec.params);
  }
  if (want_entropy) {
    try {
      rep.entropy_estimate =
          entropy_estimate(ens, spec.params, diag.entropy_bins);
    } catch (const InsufficientSamples&) {
      rep.entropy_estimate.reset();
    }
  }
  return rep;
}

// One replica of the configured simulation.  Reports are emitted at t = 0
// and then every dt_report until t_end.  Custom initial data (loaded by the
// config layer) is passed through `initial`.
inline RunResult run(const SimConfig& config, int replica = 0,
                     const Ensemble* initial = nullptr) {
  config.validate();
  RunResult out;
  Rng rng(config.seed, std::uint64_t(replica));
  Ensemble ens = initial ? *initial
                         : init_ensemble(config.init, config.n_particles,
                                         config.model.params, rng);
  const auto env = models::proposal_envelope(config.model);
  MajorantState maj;
  maj.refresh(ens, config.model, env);
  const bool want_entropy = config.diagnostics.entropy && config.init.isotropic();
  out.entropy_disabled = config.diagnostics.entropy && !config.init.isotropic();

  const Vec3 p0 = total_momentum(ens, config.model.params);
  const double e0 = total_energy(ens, config.model.params);
  double p_scale = 0.0;
  for (const auto& s : ens.particles) p_scale += norm(s.v);
  p_scale = std::max(p_scale * config.model.params.m * ens.weight, 1e-300);

  out.reports.push_back(make_report(ens, config.model, config.diagnostics,
                                    want_entropy, replica));
  double next_report = config.dt_report;
  while (ens.time < config.t_end - 1e-12 * config.t_end) {
    const double target = std::min(next_report, config.t_end);
    while (ens.time < target - 1e-12 * target) {
      const double dt =
          std::min(suggested_dt(ens, config.model, env, maj),
                   target - ens.time);
      step(ens, dt, config.model, env, maj, rng);
    }
    out.reports.push_back(make_report(ens, config.model, config.diagnostics,
                                      want_entropy, replica));
    const Vec3 p = total_momentum(ens, config.model.params);
    const double e = total_energy(ens, config.model.params);
    out.momentum_drift =
        std::max(out.momentum_drift, norm(p - p0) / p_scale);
    out.energy_drift =
        std::max(out.energy_drift, std::abs(e - e0) / std::abs(e0));
    next_report += config.dt_report;
  }
  out.conservation_ok =
      out.momentum_drift < 1e-9 && out.energy_drift < 1e-9;
  if (maj.accepted > 0 && ens.time > 0.0) {
    out.mean_free_time =
        double(ens.size()) / (double(maj.accepted) / ens.time);
  }
  if (config.diagnostics.coercivity_spotcheck) {
    Ensemble centered = ens;
    shift_to_com(centered);
    auto coer = coercivity_data_from_ensemble(centered, config.model.params,
                                              config.delta);
    analysis::coercivity_clb(coer, config.model.gamma);
    std::vector<MolecularState> probes;
    const auto obs = observables(centered, config.model.params);
    const double vth = std::sqrt(
        std::max(config.model.params.kB * obs.T_equiv, 1e-12) /
        config.model.params.m);
    for (int p = 0; p < config.diagnostics.coercivity_probes; ++p) {
      probes.push_back({{vth * rng.normal(), vth * rng.normal(),
                         vth * rng.normal()},
                        rng.gamma(config.model.params.alpha + 1.0,
                                  config.model.params.kB * obs.T_equiv)});
    }
    const auto pairs =
        coercivity_spotcheck(centered, config.model, coer, probes);
    out.spotcheck_done = true;
    out.spotcheck_min_margin = std::numeric_limits<double>::infinity();
    for (const auto& [lhs, rhs] : pairs) {
      if (lhs < rhs) ++out.spotcheck_violations;
      out.spotcheck_min_margin =
          std::min(out.spotcheck_min_margin, lhs - rhs);
    }
  }
  out.majorant = maj;
  out.final_ensemble = std::move(ens);
  return out;
}

inline Ensemble init_ensemble(const InitSpec& init, std::size_t n,
                              const GasParams& params, Rng& rng) {
  switch (init.kind) {
    case InitSpec::Kind::Equilibrium:
      return sample_equilibrium(n, init.T, params, rng);
    case InitSpec::Kind::TwoTemperature: {
      Ensemble ens;
      ens.particles.resize(n);
      ens.weight = 1.0 / double(n);
      const double sv = std::sqrt(params.kB * init.T_kin / params.m);
      for (auto& s : ens.particles) {
        s.v = {sv * rng.normal(), sv * rng.normal(), sv * rng.normal()};
        s.I = rng.gamma(params.alpha + 1.0, params.kB * init.T_int);
      }
      return ens;
    }
    case InitSpec::Kind::BimodalBeams: {
      // Isotropic bimodal speed distribution: half the particles on a
      // mono-speed shell, half at rest, internal energies thermal.
      Ensemble ens;
      ens.particles.resize(n);
      ens.weight = 1.0 / double(n);
      for (std::size_t i = 0; i < n; ++i) {
        auto& s = ens.particles[i];
        if (i % 2 == 0) {
          s.v = init.speed * rng.unit_vector();
        } else {
          s.v = {0.0, 0.0, 0.0};
        }
        s.I = rng.gamma(params.alpha + 1.0, params.kB * init.T_int);
      }
      return ens;
    }
    case InitSpec::Kind::Custom:
      throw ConfigError("Custom init must be loaded through the config layer");
  }
  throw ConfigError("unknown init kind");
}

}  // namespace polykin::dsmc
