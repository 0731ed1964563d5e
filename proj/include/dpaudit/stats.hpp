//
// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPAUDIT_STATS_HPP_
#define DPAUDIT_STATS_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace dpaudit {

// Standard normal CDF. erfc keeps the left tail accurate down to ~1e-300.
inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double norm_pdf(double x) {
  static const double kInvSqrt2Pi = 0.3989422804014326779399461;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// Standard normal quantile, accurate to full double precision: Acklam's
// rational approximation followed by two Halley refinements against the
// erfc-based CDF.
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("norm_quantile: p must be in (0,1)");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int i = 0; i < 2; ++i) {
    double e = norm_cdf(x) - p;
    double u = e / norm_pdf(x);
    x = x - u / (1.0 + x * u / 2.0);  // Halley step
  }
  return x;
}

namespace internal {

// Continued fraction for the regularized incomplete beta function
// (modified Lentz's method).
inline double beta_cont_frac(double a, double b, double x) {
  const int kMaxIters = 400;
  const double kEps = 3e-16;
  const double kFpMin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIters; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace internal

// Regularized incomplete beta function I_x(a, b).
inline double reg_inc_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) {
    throw std::invalid_argument("reg_inc_beta: a, b must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * internal::beta_cont_frac(a, b, x) / a;
  }
  return 1.0 - front * internal::beta_cont_frac(b, a, 1.0 - x) / b;
}

// Quantile of the Beta(a, b) distribution by bisection on I_x(a, b).
inline double beta_quantile(double p, double a, double b) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("beta_quantile: p must be in [0,1]");
  }
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (reg_inc_beta(a, b, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-16) break;
  }
  return 0.5 * (lo + hi);
}

// One-sided Clopper-Pearson upper bound on a binomial proportion: the
// smallest p with Pr[Binomial(n, p) <= k] <= 1 - level, i.e. the
// Beta(k + 1, n - k) quantile at `level`.
inline double clopper_pearson_upper(std::int64_t k, std::int64_t n,
                                    double level) {
  if (n < 1) throw std::invalid_argument("clopper_pearson_upper: n >= 1");
  if (k < 0 || k > n) {
    throw std::invalid_argument("clopper_pearson_upper: need 0 <= k <= n");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("clopper_pearson_upper: level in (0,1)");
  }
  if (k == n) return 1.0;
  return beta_quantile(level, static_cast<double>(k) + 1.0,
                       static_cast<double>(n - k));
}

}  // namespace dpaudit

#endif  // DPAUDIT_STATS_HPP_
