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

#ifndef DPAUDIT_CLI_HPP_
#define DPAUDIT_CLI_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpaudit/gamerunner.hpp"

namespace dpaudit {

// Exit codes shared by the audit and sweep commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

enum class Verdict { kNoViolationDetected, kViolationDetected, kInconclusive };

inline std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kNoViolationDetected: return "no_violation_detected";
    case Verdict::kViolationDetected: return "violation_detected";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "?";
}

// Violation iff the estimate stays above the claimed epsilon by more than
// one fold standard deviation. An estimate pinned at the auditing ceiling
// that still cannot clear the claim is inconclusive rather than clean.
inline Verdict decide_verdict(const AuditReport& report,
                              double eps_theoretical) {
  if (report.estimate.eps_emp - report.fold_stddev > eps_theoretical) {
    return Verdict::kViolationDetected;
  }
  if (report.estimate.eps_emp >=
      report.estimate.max_auditable_eps - 1e-9) {
    return Verdict::kInconclusive;
  }
  return Verdict::kNoViolationDetected;
}

struct RunManifest {
  std::string config_path;
  std::string out_dir;
  std::string report_path;
  std::string scores_path;
  Verdict verdict = Verdict::kNoViolationDetected;

  nlohmann::ordered_json to_json() const {
    return nlohmann::ordered_json{{"config_path", config_path},
                                  {"out_dir", out_dir},
                                  {"report_path", report_path},
                                  {"scores_path", scores_path},
                                  {"verdict", verdict_name(verdict)}};
  }
};

namespace internal {

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

inline void write_text_file(const std::string& path, const std::string& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << s;
}

inline std::string base_dir_of(const std::string& path) {
  std::filesystem::path p(path);
  auto parent = p.parent_path();
  return parent.empty() ? std::string(".") : parent.string();
}

}  // namespace internal

// Runs one audit from a JSON config and persists report.json, scores.csv
// and manifest.json under out_dir. The verdict is data, not a failure:
// completion exits 0 either way.
inline int cmd_audit(const std::string& config_path, const std::string& out_dir,
                     std::size_t workers, RunManifest* manifest_out = nullptr,
                     std::ostream& log = std::cerr) {
  AuditConfig cfg;
  try {
    nlohmann::json j = internal::read_json_file(config_path);
    cfg = config_from_json(j, internal::base_dir_of(config_path));
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  try {
    cfg.workers = workers == 0 ? 1 : workers;
    std::filesystem::create_directories(out_dir);
    ScoreSet scores;
    std::vector<VulnerableCandidate> candidates;
    AuditReport report = run_audit(cfg, &scores, &candidates);
    // Mini-MIA provenance, when that selection stage ran.
    if (!candidates.empty()) {
      write_candidates_csv(out_dir + "/candidates.csv", *cfg.schema,
                           candidates);
    }
    RunManifest m;
    m.config_path = config_path;
    m.out_dir = out_dir;
    m.report_path = out_dir + "/report.json";
    m.scores_path = out_dir + "/scores.csv";
    m.verdict = decide_verdict(report, cfg.mechanism.epsilon);
    internal::write_text_file(m.report_path, report.to_json().dump(2) + "\n");
    save_scores_csv(scores, m.scores_path);
    internal::write_text_file(out_dir + "/manifest.json",
                              m.to_json().dump(2) + "\n");
    log << "audit done in " << report.wall_clock_s << "s: eps_emp="
        << report.estimate.eps_emp << " (max auditable "
        << report.estimate.max_auditable_eps << "), fold mean "
        << report.fold_mean << " +/- " << report.fold_stddev << ", verdict "
        << verdict_name(m.verdict) << "\n";
    if (manifest_out) *manifest_out = m;
    return kExitOk;
  } catch (const std::exception& e) {
    log << "runtime error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

// Audits the same configuration at each epsilon in the config's
// "epsilon_list", sharing the crafted pair, and writes a summary CSV of
// (epsilon, eps_emp, stddev, verdict).
inline int cmd_sweep(const std::string& config_path, const std::string& out_dir,
                     std::size_t workers,
                     std::vector<RunManifest>* manifests_out = nullptr,
                     std::ostream& log = std::cerr) {
  nlohmann::json j;
  std::vector<double> eps_list;
  AuditConfig base;
  try {
    j = internal::read_json_file(config_path);
    if (!j.contains("epsilon_list") || !j.at("epsilon_list").is_array() ||
        j.at("epsilon_list").empty()) {
      log << "config error: sweep needs a non-empty epsilon_list\n";
      return kExitConfigError;
    }
    eps_list = j.at("epsilon_list").get<std::vector<double>>();
    j.erase("epsilon_list");
    base = config_from_json(j, internal::base_dir_of(config_path));
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  try {
    base.workers = workers == 0 ? 1 : workers;
    std::filesystem::create_directories(out_dir);
    std::ofstream summary(out_dir + "/summary.csv");
    if (!summary) {
      throw std::runtime_error("cannot write summary CSV in " + out_dir);
    }
    summary << "epsilon,eps_emp,fold_stddev,verdict\n";
    // One crafted pair shared by every point of the sweep; in particular a
    // mini-MIA target selection runs once.
    std::vector<VulnerableCandidate> candidates;
    NeighborPair pair = build_pair(base, &candidates);
    if (!candidates.empty()) {
      write_candidates_csv(out_dir + "/candidates.csv", *base.schema,
                           candidates);
    }
    std::vector<RunManifest> manifests;
    char buf[64];
    for (double eps : eps_list) {
      AuditConfig cfg = base;
      cfg.mechanism.epsilon = eps;
      std::snprintf(buf, sizeof(buf), "%g", eps);
      std::string sub = out_dir + "/eps_" + buf;
      std::filesystem::create_directories(sub);
      ScoreSet scores;
      AuditReport report = run_audit(cfg, &scores, nullptr, &pair);
      RunManifest m;
      m.config_path = config_path;
      m.out_dir = sub;
      m.report_path = sub + "/report.json";
      m.scores_path = sub + "/scores.csv";
      m.verdict = decide_verdict(report, eps);
      internal::write_text_file(m.report_path,
                                report.to_json().dump(2) + "\n");
      save_scores_csv(scores, m.scores_path);
      internal::write_text_file(sub + "/manifest.json",
                                m.to_json().dump(2) + "\n");
      std::snprintf(buf, sizeof(buf), "%.17g", report.estimate.eps_emp);
      summary << eps << "," << buf << ",";
      std::snprintf(buf, sizeof(buf), "%.17g", report.fold_stddev);
      summary << buf << "," << verdict_name(m.verdict) << "\n";
      log << "eps=" << eps << ": eps_emp=" << report.estimate.eps_emp
          << ", verdict " << verdict_name(m.verdict) << "\n";
      manifests.push_back(std::move(m));
    }
    if (manifests_out) *manifests_out = manifests;
    return kExitOk;
  } catch (const std::exception& e) {
    log << "runtime error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

}  // namespace dpaudit

#endif  // DPAUDIT_CLI_HPP_
