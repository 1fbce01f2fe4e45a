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

// Small statistics toolbox used by the runtime diagnostics and the
// verification suites: KS and chi-square goodness-of-fit, the Mann-Kendall
// trend test, and the incomplete gamma/beta functions behind them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "polykin/errors.hpp"
#include "polykin/numerics.hpp"

namespace polykin::stats {

// Regularized lower incomplete gamma P(a, x); series for x < a+1, Lentz
// continued fraction otherwise.
inline double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double lg = special::log_gamma_fn(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // continued fraction for Q(a,x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

inline double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction.
inline double inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lbeta = special::log_gamma_fn(a) + special::log_gamma_fn(b) -
                       special::log_gamma_fn(a + b);
  const double front =
      std::exp(a * std::log(x) + b * std::log(1.0 - x) - lbeta);
  const bool swap = x > (a + 1.0) / (a + b + 2.0);
  if (swap) return 1.0 - inc_beta(b, a, 1.0 - x);
  const double tiny = 1e-300;
  double c = 1.0, d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 400; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-14) break;
  }
  return front * h / a;
}

// Beta(a, b) CDF; used to test the (r, R) proposal marginals.
inline double beta_cdf(double a, double b, double x) {
  return inc_beta(a, b, std::clamp(x, 0.0, 1.0));
}

inline double erfc_fn(double x) { return std::erfc(x); }

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^(j-1) exp(-2 j^2 l^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * double(j) * double(j) * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample KS test against a continuous CDF.
inline KsResult ks_test(std::vector<double> data,
                        const std::function<double(double)>& cdf) {
  if (data.empty()) throw InsufficientSamples("ks_test: empty sample");
  std::sort(data.begin(), data.end());
  const double n = double(data.size());
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = cdf(data[i]);
    d = std::max(d, std::abs(f - double(i) / n));
    d = std::max(d, std::abs(double(i + 1) / n - f));
  }
  const double sn = std::sqrt(n);
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

struct Chi2Result {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

// Pearson chi-square against expected bin counts (already scaled to the
// sample size).  Bins with expectation below 5 should be merged upstream.
inline Chi2Result chi2_gof(const std::vector<double>& observed,
                           const std::vector<double>& expected,
                           int constraints = 1) {
  if (observed.size() != expected.size() || observed.empty()) {
    throw DomainError("chi2_gof: size mismatch");
  }
  Chi2Result r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) continue;
    const double diff = observed[i] - expected[i];
    r.statistic += diff * diff / expected[i];
  }
  r.dof = double(observed.size() - std::size_t(constraints));
  r.p_value = gamma_q(0.5 * r.dof, 0.5 * r.statistic);
  return r;
}

struct TrendResult {
  long s = 0;            // Mann-Kendall S statistic
  double z = 0.0;        // normal score
  double p_decreasing = 1.0;  // one-sided: evidence for a decreasing trend
  double p_two_sided = 1.0;
};

// Mann-Kendall trend test (no tie correction; our series are continuous).
inline TrendResult mann_kendall(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 4) throw InsufficientSamples("mann_kendall: need >= 4 points");
  TrendResult r;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = series[j] - series[i];
      if (d > 0.0) ++r.s;
      else if (d < 0.0) --r.s;
    }
  }
  const double var = double(n) * (double(n) - 1.0) * (2.0 * double(n) + 5.0) / 18.0;
  double z = 0.0;
  if (r.s > 0) z = (double(r.s) - 1.0) / std::sqrt(var);
  if (r.s < 0) z = (double(r.s) + 1.0) / std::sqrt(var);
  r.z = z;
  const double inv_sqrt2 = 0.70710678118654752440084436210485;
  r.p_decreasing = 0.5 * erfc_fn(-z * inv_sqrt2);  // P(Z <= z)
  r.p_two_sided = erfc_fn(std::abs(z) * inv_sqrt2);
  return r;
}

}  // namespace polykin::stats
