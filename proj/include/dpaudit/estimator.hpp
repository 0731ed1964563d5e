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

#ifndef DPAUDIT_ESTIMATOR_HPP_
#define DPAUDIT_ESTIMATOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpaudit/stats.hpp"

namespace dpaudit {

enum class Method { kEpsDeltaRegion, kGdpConvert };

inline std::string method_name(Method m) {
  return m == Method::kEpsDeltaRegion ? "eps_delta_region" : "gdp_convert";
}

inline Method method_from_name(const std::string& s) {
  if (s == "eps_delta_region") return Method::kEpsDeltaRegion;
  if (s == "gdp_convert") return Method::kGdpConvert;
  throw std::invalid_argument("unknown method: " + s);
}

// Attack error tallies over the two worlds: fp = predicted 1 when b = 0,
// fn = predicted 0 when b = 1.
struct ErrorCounts {
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t n0 = 0;
  std::int64_t n1 = 0;
};

struct EpsilonEstimate {
  double eps_emp = 0.0;
  std::optional<double> mu_emp;
  double alpha_bar = 1.0;
  double beta_bar = 1.0;
  double tau = 0.0;
  double delta = 0.0;
  double confidence = 0.95;
  double max_auditable_eps = 0.0;
  Method method = Method::kEpsDeltaRegion;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["eps_emp"] = eps_emp;
    if (mu_emp.has_value()) j["mu_emp"] = *mu_emp;
    j["alpha_bar"] = alpha_bar;
    j["beta_bar"] = beta_bar;
    // JSON has no infinities; the sentinel thresholds round-trip as strings.
    if (std::isfinite(tau)) {
      j["tau"] = tau;
    } else {
      j["tau"] = tau > 0 ? "inf" : "-inf";
    }
    j["delta"] = delta;
    j["confidence"] = confidence;
    j["max_auditable_eps"] = max_auditable_eps;
    j["method"] = method_name(method);
    return j;
  }

  static double tau_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
      return j.get<std::string>() == "inf"
                 ? std::numeric_limits<double>::infinity()
                 : -std::numeric_limits<double>::infinity();
    }
    return j.get<double>();
  }
};

// Empirical lower bound on epsilon from upper-bounded error rates, via the
// (eps, delta)-DP privacy region. Terms with a non-positive numerator drop
// out; the result is clamped at zero.
inline double eps_from_rates(double alpha_bar, double beta_bar, double delta) {
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0) ||
      !(beta_bar > 0.0 && beta_bar <= 1.0)) {
    throw std::invalid_argument("eps_from_rates: rates must be in (0,1]");
  }
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw std::invalid_argument("eps_from_rates: delta must be in [0,1)");
  }
  double best = 0.0;
  double num1 = 1.0 - alpha_bar - delta;
  if (num1 > 0.0) best = std::max(best, std::log(num1 / beta_bar));
  double num2 = 1.0 - beta_bar - delta;
  if (num2 > 0.0) best = std::max(best, std::log(num2 / alpha_bar));
  return best;
}

// Empirical lower bound on the GDP parameter mu, clamped below at zero.
inline double mu_from_rates(double alpha_bar, double beta_bar) {
  if (!(alpha_bar > 0.0 && alpha_bar < 1.0) ||
      !(beta_bar > 0.0 && beta_bar < 1.0)) {
    throw std::invalid_argument("mu_from_rates: rates must be in (0,1)");
  }
  double mu = norm_quantile(1.0 - alpha_bar) - norm_quantile(beta_bar);
  return std::max(0.0, mu);
}

// delta(eps) of a mu-GDP mechanism. The e^eps * Phi term is evaluated in
// log space so large eps cannot overflow before the product vanishes.
inline double gdp_delta_of_eps(double mu, double eps) {
  if (mu < 0.0 || eps < 0.0) {
    throw std::invalid_argument("gdp_delta_of_eps: mu, eps must be >= 0");
  }
  if (mu == 0.0) return 0.0;
  double t1 = norm_cdf(-eps / mu + mu / 2.0);
  double p2 = norm_cdf(-eps / mu - mu / 2.0);
  double t2 = p2 > 0.0 ? std::exp(eps + std::log(p2)) : 0.0;
  double delta = t1 - t2;
  if (delta < 0.0) delta = 0.0;
  if (delta >= 1.0) delta = std::nextafter(1.0, 0.0);
  return delta;
}

// Inverse of gdp_delta_of_eps in eps at fixed mu: the unique eps >= 0 with
// delta(eps) == delta, by bisection to 1e-9 absolute.
inline double mu_to_eps(double mu, double delta) {
  if (mu < 0.0) throw std::invalid_argument("mu_to_eps: mu must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("mu_to_eps: delta must be in (0,1)");
  }
  if (mu == 0.0) return 0.0;
  if (gdp_delta_of_eps(mu, 0.0) <= delta) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (gdp_delta_of_eps(mu, hi) > delta) {
    hi *= 2.0;
    if (hi > 1e12) return hi;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    double mid = 0.5 * (lo + hi);
    if (gdp_delta_of_eps(mu, mid) > delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Inverse of gdp_delta_of_eps in mu at fixed eps (delta is increasing in
// mu). Used to size Gaussian noise for a (eps, delta) target.
inline double mu_for_eps_delta(double eps, double delta) {
  if (eps < 0.0) throw std::invalid_argument("mu_for_eps_delta: eps >= 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("mu_for_eps_delta: delta must be in (0,1)");
  }
  double lo = 0.0, hi = 1.0;
  while (gdp_delta_of_eps(hi, eps) < delta) {
    hi *= 2.0;
    if (hi > 1e9) break;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    double mid = 0.5 * (lo + hi);
    if (gdp_delta_of_eps(mid, eps) < delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Rank-based AUC with half credit for ties; s1 holds the b = 1 scores.
inline double auc_from_scores(const std::vector<double>& s0,
                              const std::vector<double>& s1) {
  if (s0.empty() || s1.empty()) {
    throw std::invalid_argument("auc_from_scores: both sides must be present");
  }
  std::vector<double> sorted0 = s0;
  std::sort(sorted0.begin(), sorted0.end());
  double wins = 0.0;
  for (double v : s1) {
    auto lo = std::lower_bound(sorted0.begin(), sorted0.end(), v);
    auto hi = std::upper_bound(sorted0.begin(), sorted0.end(), v);
    wins += static_cast<double>(lo - sorted0.begin()) +
            0.5 * static_cast<double>(hi - lo);
  }
  return wins /
         (static_cast<double>(s0.size()) * static_cast<double>(s1.size()));
}

enum class Split { kShadow, kThreshold, kTest };

inline std::string split_name(Split s) {
  switch (s) {
    case Split::kShadow: return "shadow";
    case Split::kThreshold: return "threshold";
    case Split::kTest: return "test";
  }
  return "?";
}

inline Split split_from_name(const std::string& s) {
  if (s == "shadow") return Split::kShadow;
  if (s == "threshold") return Split::kThreshold;
  if (s == "test") return Split::kTest;
  throw std::invalid_argument("unknown split: " + s);
}

struct ScoreEntry {
  int b = 0;
  double score = 0.0;
  std::uint64_t run_seed = 0;
  Split split = Split::kTest;
};

// Labeled attack scores, tagged by their role in the audit protocol.
struct ScoreSet {
  std::vector<ScoreEntry> entries;

  ScoreSet subset(Split s) const {
    ScoreSet out;
    for (const ScoreEntry& e : entries) {
      if (e.split == s) out.entries.push_back(e);
    }
    return out;
  }
};

inline void save_scores_csv(const ScoreSet& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scores file: " + path);
  out << "b,score,split,run_seed\n";
  char buf[64];
  for (const ScoreEntry& e : s.entries) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.score);
    out << e.b << "," << buf << "," << split_name(e.split) << "," << e.run_seed
        << "\n";
  }
}

inline ScoreSet load_scores_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scores file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("b,score,split,run_seed", 0) != 0) {
    throw std::runtime_error("bad scores CSV header in " + path);
  }
  ScoreSet s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t p1 = line.find(',');
    std::size_t p2 = line.find(',', p1 + 1);
    std::size_t p3 = line.find(',', p2 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos ||
        p3 == std::string::npos) {
      throw std::runtime_error("bad scores CSV row in " + path);
    }
    ScoreEntry e;
    e.b = std::stoi(line.substr(0, p1));
    e.score = std::stod(line.substr(p1 + 1, p2 - p1 - 1));
    e.split = split_from_name(line.substr(p2 + 1, p3 - p2 - 1));
    e.run_seed = std::stoull(line.substr(p3 + 1));
    s.entries.push_back(e);
  }
  return s;
}

namespace internal {

// Per-side cache for Clopper-Pearson bounds; n and level are fixed within
// one audit, k varies with the threshold sweep.
class CpCache {
 public:
  CpCache(std::int64_t n, double level) : n_(n), level_(level) {}
  double upper(std::int64_t k) {
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    double v = clopper_pearson_upper(k, n_, level_);
    cache_.emplace(k, v);
    return v;
  }

 private:
  std::int64_t n_;
  double level_;
  std::map<std::int64_t, double> cache_;
};

inline double estimate_from_bounds(double alpha_bar, double beta_bar,
                                   double delta, Method method,
                                   double* mu_out) {
  if (method == Method::kEpsDeltaRegion) {
    if (mu_out) *mu_out = std::numeric_limits<double>::quiet_NaN();
    return eps_from_rates(alpha_bar, beta_bar, delta);
  }
  double mu = 0.0;
  if (alpha_bar < 1.0 && beta_bar < 1.0) {
    mu = mu_from_rates(alpha_bar, beta_bar);
  }
  if (mu_out) *mu_out = mu;
  return mu_to_eps(mu, delta);
}

}  // namespace internal

// Ceiling on eps_emp at these sample sizes: the estimate a zero-error attack
// would earn, bounded away from infinity by the Clopper-Pearson slack.
inline double max_auditable_eps(std::int64_t n0, std::int64_t n1, double delta,
                                double confidence, Method method) {
  if (n0 < 1 || n1 < 1) {
    throw std::invalid_argument("max_auditable_eps: n0, n1 must be >= 1");
  }
  double level = 1.0 - (1.0 - confidence) / 2.0;
  double a0 = clopper_pearson_upper(0, n0, level);
  double b0 = clopper_pearson_upper(0, n1, level);
  return internal::estimate_from_bounds(a0, b0, delta, method, nullptr);
}

// Decision threshold maximizing the audited eps_emp on the holdout split.
// Candidates are midpoints between consecutive distinct scores plus the two
// infinite sentinels; ties break toward the smallest tau. The decision rule
// everywhere is: predict b = 1 iff score >= tau.
inline double select_threshold(const ScoreSet& holdout, double delta,
                               double confidence, Method method) {
  std::vector<double> s0, s1;
  for (const ScoreEntry& e : holdout.entries) {
    (e.b == 0 ? s0 : s1).push_back(e.score);
  }
  if (s0.empty() || s1.empty()) {
    throw std::invalid_argument(
        "select_threshold: holdout must contain both labels");
  }
  std::sort(s0.begin(), s0.end());
  std::sort(s1.begin(), s1.end());
  std::vector<double> all = s0;
  all.insert(all.end(), s1.begin(), s1.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> candidates;
  candidates.push_back(-inf);
  for (std::size_t i = 1; i < all.size(); ++i) {
    candidates.push_back(0.5 * (all[i - 1] + all[i]));
  }
  candidates.push_back(inf);

  std::int64_t n0 = static_cast<std::int64_t>(s0.size());
  std::int64_t n1 = static_cast<std::int64_t>(s1.size());
  double level = 1.0 - (1.0 - confidence) / 2.0;
  internal::CpCache cp0(n0, level), cp1(n1, level);

  double best_eps = -1.0;
  double best_tau = -inf;
  for (double tau : candidates) {
    // predicted 1 iff score >= tau
    std::int64_t below0 = std::lower_bound(s0.begin(), s0.end(), tau) -
                          s0.begin();
    std::int64_t below1 = std::lower_bound(s1.begin(), s1.end(), tau) -
                          s1.begin();
    std::int64_t fp = n0 - below0;
    std::int64_t fn = below1;
    double eps = internal::estimate_from_bounds(cp0.upper(fp), cp1.upper(fn),
                                                delta, method, nullptr);
    if (eps > best_eps) {
      best_eps = eps;
      best_tau = tau;
    }
  }
  return best_tau;
}

// Audits the test split at a fixed threshold: Clopper-Pearson upper bounds
// at the joint confidence (each side one-sided at 1 - (1-confidence)/2),
// then the conversion selected by `method`. eps_emp is clamped into
// [0, max_auditable_eps].
inline EpsilonEstimate audit(const ScoreSet& test, double tau, double delta,
                             double confidence, Method method) {
  if (test.entries.empty()) {
    throw std::invalid_argument("audit: empty test split");
  }
  ErrorCounts c;
  for (const ScoreEntry& e : test.entries) {
    if (e.b == 0) {
      ++c.n0;
      if (e.score >= tau) ++c.fp;
    } else {
      ++c.n1;
      if (e.score < tau) ++c.fn;
    }
  }
  if (c.n0 == 0 || c.n1 == 0) {
    throw std::invalid_argument("audit: test split must contain both labels");
  }
  double level = 1.0 - (1.0 - confidence) / 2.0;
  EpsilonEstimate est;
  est.alpha_bar = clopper_pearson_upper(c.fp, c.n0, level);
  est.beta_bar = clopper_pearson_upper(c.fn, c.n1, level);
  est.tau = tau;
  est.delta = delta;
  est.confidence = confidence;
  est.method = method;
  double mu = 0.0;
  double eps = internal::estimate_from_bounds(est.alpha_bar, est.beta_bar,
                                              delta, method, &mu);
  est.max_auditable_eps = max_auditable_eps(c.n0, c.n1, delta, confidence,
                                            method);
  est.eps_emp = std::min(eps, est.max_auditable_eps);
  if (method == Method::kGdpConvert) est.mu_emp = mu;
  return est;
}

}  // namespace dpaudit

#endif  // DPAUDIT_ESTIMATOR_HPP_
