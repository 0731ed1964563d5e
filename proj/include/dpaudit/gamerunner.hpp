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

#ifndef DPAUDIT_GAMERUNNER_HPP_
#define DPAUDIT_GAMERUNNER_HPP_

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dpaudit/attacks.hpp"
#include "dpaudit/core.hpp"
#include "dpaudit/estimator.hpp"
#include "dpaudit/mechanism.hpp"
#include "dpaudit/worstcase.hpp"

namespace dpaudit {

struct SplitFractions {
  double shadow = 0.6;
  double threshold = 0.2;
  double test = 0.2;
};

enum class PairSource { kWorstCase, kDatasetFile };
enum class TargetMode { kRowIndex, kRarest, kMiniMia };

struct PairConfig {
  PairSource source = PairSource::kWorstCase;
  NeighborVariant variant = NeighborVariant::kAddRemove;
  WorstCaseKind worstcase;
  std::string dataset_path;
  TargetMode target_mode = TargetMode::kRarest;
  std::size_t target_index = 0;
  std::size_t mini_v = 100;
  std::size_t mini_reps = 64;
  // Edit variant: adversary-chosen y by category name; empty selects the
  // per-attribute modal record of D^-.
  std::vector<std::string> y_values;
};

struct AuditConfig {
  SchemaPtr schema;
  MechanismConfig mechanism;
  AttackKind attack = AttackKind::kDcr;
  std::optional<CanarySpec> canary;  // defaulted for the canary attack
  PairConfig pair;
  std::size_t n_models = 1000;
  SplitFractions split;
  std::size_t synth_size = 100;  // m
  double delta = 0.0;            // audit delta
  double confidence = 0.95;
  Method method = Method::kEpsDeltaRegion;
  MetaKind meta = MetaKind::kBoostedStumps;
  std::size_t folds = 5;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
};

inline void validate_config(const AuditConfig& cfg) {
  if (!cfg.schema) throw std::invalid_argument("config: schema required");
  double total = cfg.split.shadow + cfg.split.threshold + cfg.split.test;
  if (std::fabs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("config: split fractions must sum to 1");
  }
  if (cfg.split.threshold <= 0.0 || cfg.split.test <= 0.0) {
    throw std::invalid_argument(
        "config: threshold and test fractions must be positive");
  }
  if (cfg.n_models < 1) throw std::invalid_argument("config: n_models >= 1");
  if (cfg.folds < 1) throw std::invalid_argument("config: folds >= 1");
  if (cfg.folds > cfg.n_models) {
    throw std::invalid_argument("config: folds cannot exceed n_models");
  }
  if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) {
    throw std::invalid_argument("config: confidence must be in (0,1)");
  }
  if (!attack_applicable(cfg.attack, cfg.mechanism.kind)) {
    throw std::invalid_argument("config: attack '" + attack_name(cfg.attack) +
                                "' does not apply to mechanism '" +
                                mech_name(cfg.mechanism.kind) + "'");
  }
  if (cfg.method == Method::kGdpConvert) {
    if (cfg.mechanism.kind == MechKind::kPrivBayes) {
      // The Laplace-based mechanism is pure-eps DP and has no GDP curve.
      throw std::invalid_argument(
          "config: gdp_convert cannot audit the privbayes mechanism");
    }
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
      throw std::invalid_argument(
          "config: gdp_convert needs audit delta in (0,1)");
    }
  }
  if (!(cfg.delta >= 0.0 && cfg.delta < 1.0)) {
    throw std::invalid_argument("config: delta must be in [0,1)");
  }
  if (cfg.mechanism.bug.has_value() &&
      !bug_applicable(cfg.mechanism.bug->kind, cfg.mechanism.kind)) {
    throw std::invalid_argument("config: bug does not apply to mechanism");
  }
}

// Builds the fixed neighboring pair the whole audit plays against.
inline NeighborPair build_pair(
    const AuditConfig& cfg,
    std::vector<VulnerableCandidate>* candidates_out = nullptr) {
  if (cfg.pair.source == PairSource::kWorstCase) {
    WorstCase wc =
        craft_worstcase(*cfg.schema, cfg.pair.worstcase, cfg.pair.variant,
                        stable_hash(cfg.master_seed, 0xCAFE),
                        cfg.mechanism.min_dminus);
    return make_neighbors(wc.d_minus, wc.x_t, cfg.pair.variant, wc.y);
  }
  Dataset d = load_dataset_csv(cfg.pair.dataset_path, cfg.schema);
  if (d.rows.empty()) {
    throw std::invalid_argument("config: dataset file has no rows");
  }
  Record x_t;
  switch (cfg.pair.target_mode) {
    case TargetMode::kRowIndex:
      if (cfg.pair.target_index >= d.rows.size()) {
        throw std::invalid_argument("config: target index out of range");
      }
      x_t = d.rows[cfg.pair.target_index];
      break;
    case TargetMode::kRarest: {
      std::size_t best = 0;
      double best_r = -1.0;
      for (std::size_t i = 0; i < d.rows.size(); ++i) {
        double r = record_rarity(d, d.rows[i]);
        if (r > best_r) {
          best_r = r;
          best = i;
        }
      }
      x_t = d.rows[best];
      break;
    }
    case TargetMode::kMiniMia:
      x_t = select_vulnerable(d, cfg.mechanism, cfg.attack, cfg.pair.mini_v,
                              cfg.pair.mini_reps,
                              stable_hash(cfg.master_seed, 0xF00D),
                              cfg.synth_size, candidates_out);
      break;
  }
  // D^- drops one occurrence of the target.
  std::vector<Record> rows;
  bool removed = false;
  for (const Record& r : d.rows) {
    if (!removed && r == x_t) {
      removed = true;
      continue;
    }
    rows.push_back(r);
  }
  Dataset d_minus(d.schema, std::move(rows));
  std::optional<Record> y;
  if (cfg.pair.variant == NeighborVariant::kEdit &&
      !cfg.pair.y_values.empty()) {
    if (cfg.pair.y_values.size() != cfg.schema->attr_count()) {
      throw std::invalid_argument("config: pair.y arity mismatch");
    }
    Record yr;
    for (std::size_t a = 0; a < cfg.pair.y_values.size(); ++a) {
      std::int32_t idx = cfg.schema->category_index(a, cfg.pair.y_values[a]);
      if (idx < 0) {
        throw std::invalid_argument("config: pair.y value '" +
                                    cfg.pair.y_values[a] +
                                    "' not in schema");
      }
      yr.values.push_back(idx);
    }
    y = yr;
  } else if (cfg.pair.variant == NeighborVariant::kEdit) {
    // y = per-attribute modal record of D^-, nudged off x_t if they collide.
    Record modal;
    for (std::size_t a = 0; a < cfg.schema->attr_count(); ++a) {
      std::vector<std::size_t> counts(cfg.schema->domain_size(a), 0);
      for (const Record& r : d_minus.rows) {
        ++counts[static_cast<std::size_t>(r.values[a])];
      }
      std::size_t best = 0;
      for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best]) best = c;
      }
      modal.values.push_back(static_cast<std::int32_t>(best));
    }
    if (modal == x_t) {
      std::size_t dom = cfg.schema->domain_size(0);
      modal.values[0] = static_cast<std::int32_t>(
          (static_cast<std::size_t>(modal.values[0]) + 1) % dom);
    }
    y = modal;
  }
  return make_neighbors(d_minus, x_t, cfg.pair.variant, y);
}

namespace internal {

struct GameArtifacts {
  std::vector<int> b;
  std::vector<std::uint64_t> run_seed;
  std::vector<std::vector<double>> artifact;
};

inline AttackContext make_context(const AuditConfig& cfg,
                                  const NeighborPair& pair) {
  AttackContext ctx;
  ctx.attack = cfg.attack;
  ctx.ref_schema = pair.d0.schema;
  ctx.x_t = pair.x_t;
  ctx.synth_size = cfg.synth_size;
  ctx.query_seed = stable_hash(cfg.master_seed, 0x9B);
  if (cfg.attack == AttackKind::kCanary) {
    ctx.canary = cfg.canary.value_or(CanarySpec{
        default_canary_index(*pair.d0.schema, cfg.mechanism.gan),
        cfg.mechanism.gan.grad_bound});
  }
  return ctx;
}

// Runs all n_models game rounds. Parallel workers pull run indices off an
// atomic counter; every run derives its own seed chain from (master_seed,
// index), so results do not depend on scheduling.
inline GameArtifacts compute_artifacts(const AuditConfig& cfg,
                                       const NeighborPair& pair) {
  const std::size_t n = cfg.n_models;
  GameArtifacts out;
  out.b.assign(n, 0);
  out.run_seed.assign(n, 0);
  out.artifact.assign(n, {});
  AttackContext ctx = make_context(cfg, pair);

  auto run_one = [&](std::size_t i) {
    std::uint64_t run_seed = stable_hash(cfg.master_seed, i);
    Rng rng(run_seed);
    int b = rng.bernoulli(0.5) ? 1 : 0;
    std::uint64_t fit_seed = rng.next_u64();
    std::uint64_t sample_seed = rng.next_u64();
    const Dataset& world = b == 1 ? pair.d1 : pair.d0;
    out.b[i] = b;
    out.run_seed[i] = run_seed;
    out.artifact[i] = run_attack_once(cfg.mechanism, ctx, world, pair.d1,
                                      fit_seed, sample_seed);
  };

  std::size_t workers = std::max<std::size_t>(1, cfg.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= n) return;
          try {
            run_one(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  return out;
}

// Split assignment for the canonical run ordering: leading fraction shadow,
// then threshold, then test.
inline std::vector<Split> canonical_assignment(const AuditConfig& cfg) {
  std::size_t n = cfg.n_models;
  std::size_t ns = static_cast<std::size_t>(
      std::floor(cfg.split.shadow * static_cast<double>(n) + 1e-9));
  std::size_t nt = static_cast<std::size_t>(
      std::floor(cfg.split.threshold * static_cast<double>(n) + 1e-9));
  std::vector<Split> splits(n, Split::kTest);
  for (std::size_t i = 0; i < n && i < ns; ++i) splits[i] = Split::kShadow;
  for (std::size_t i = ns; i < n && i < ns + nt; ++i) {
    splits[i] = Split::kThreshold;
  }
  return splits;
}

// Turns raw artifacts plus a split assignment into scores: meta-classifier
// attacks train on the shadow portion and score every run; scalar attacks
// read their artifact directly.
inline ScoreSet score_runs(const AuditConfig& cfg, const GameArtifacts& art,
                           const std::vector<Split>& splits,
                           std::uint64_t meta_seed) {
  ScoreSet out;
  const std::size_t n = art.b.size();
  if (attack_needs_meta(cfg.attack)) {
    std::vector<FeatureVector> f0, f1;
    for (std::size_t i = 0; i < n; ++i) {
      if (splits[i] != Split::kShadow) continue;
      FeatureVector f{art.artifact[i], cfg.attack};
      (art.b[i] == 0 ? f0 : f1).push_back(std::move(f));
    }
    if (f0.empty() || f1.empty()) {
      throw std::invalid_argument(
          "shadow split lacks one of the labels; increase n_models or the "
          "shadow fraction");
    }
    MetaClassifier meta = train_meta(f0, f1, meta_seed, cfg.meta);
    for (std::size_t i = 0; i < n; ++i) {
      out.entries.push_back(ScoreEntry{art.b[i], meta.score(art.artifact[i]),
                                       art.run_seed[i], splits[i]});
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out.entries.push_back(ScoreEntry{art.b[i], art.artifact[i][0],
                                       art.run_seed[i], splits[i]});
    }
  }
  return out;
}

}  // namespace internal

// Plays the distinguishing game n_models times and returns the labeled
// scores under the canonical shadow/threshold/test assignment.
inline ScoreSet run_game(const AuditConfig& cfg) {
  validate_config(cfg);
  NeighborPair pair = build_pair(cfg);
  internal::GameArtifacts art = internal::compute_artifacts(cfg, pair);
  return internal::score_runs(cfg, art, internal::canonical_assignment(cfg),
                              stable_hash(cfg.master_seed, 0x3E7A));
}

struct AuditReport {
  EpsilonEstimate estimate;              // canonical split
  std::vector<EpsilonEstimate> folds;    // cross-validation estimates
  double fold_mean = 0.0;
  double fold_stddev = 0.0;
  double attack_auc = 0.5;  // over the canonical non-shadow scores
  nlohmann::ordered_json config_echo;
  double wall_clock_s = 0.0;  // not serialized; reports must replay bytewise

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["config"] = config_echo;
    j["estimate"] = estimate.to_json();
    nlohmann::ordered_json fj = nlohmann::ordered_json::array();
    for (const EpsilonEstimate& e : folds) fj.push_back(e.to_json());
    j["folds"] = fj;
    j["fold_mean"] = fold_mean;
    j["fold_stddev"] = fold_stddev;
    j["attack_auc"] = attack_auc;
    return j;
  }
};

nlohmann::ordered_json config_to_json(const AuditConfig& cfg);

// Full audit: headline estimate from the canonical split plus k-fold
// cross-validation in which each fold serves as the test split once and the
// remaining runs provide the shadow and threshold populations at the
// configured ratio (meta-classifier and threshold are refit per fold).
inline AuditReport run_audit(
    const AuditConfig& cfg, ScoreSet* scores_out = nullptr,
    std::vector<VulnerableCandidate>* candidates_out = nullptr,
    const NeighborPair* fixed_pair = nullptr) {
  validate_config(cfg);
  auto t0 = std::chrono::steady_clock::now();
  NeighborPair pair =
      fixed_pair ? *fixed_pair : build_pair(cfg, candidates_out);
  internal::GameArtifacts art = internal::compute_artifacts(cfg, pair);

  AuditReport report;
  report.config_echo = config_to_json(cfg);

  // Headline estimate on the canonical assignment.
  std::vector<Split> canonical = internal::canonical_assignment(cfg);
  ScoreSet scores = internal::score_runs(
      cfg, art, canonical, stable_hash(cfg.master_seed, 0x3E7A));
  double tau = select_threshold(scores.subset(Split::kThreshold), cfg.delta,
                                cfg.confidence, cfg.method);
  report.estimate = audit(scores.subset(Split::kTest), tau, cfg.delta,
                          cfg.confidence, cfg.method);
  {
    std::vector<double> s0, s1;
    for (const ScoreEntry& e : scores.entries) {
      if (e.split == Split::kShadow) continue;
      (e.b == 0 ? s0 : s1).push_back(e.score);
    }
    report.attack_auc = auc_from_scores(s0, s1);
  }
  if (scores_out) *scores_out = scores;

  // Cross-validation folds.
  if (cfg.folds == 1) {
    report.folds.push_back(report.estimate);
  } else {
    double ratio =
        cfg.split.shadow / (cfg.split.shadow + cfg.split.threshold);
    for (std::size_t f = 0; f < cfg.folds; ++f) {
      std::vector<std::size_t> rest;
      std::vector<Split> assign(cfg.n_models, Split::kTest);
      for (std::size_t i = 0; i < cfg.n_models; ++i) {
        if (i % cfg.folds != f) rest.push_back(i);
      }
      std::size_t ns = static_cast<std::size_t>(
          std::floor(ratio * static_cast<double>(rest.size()) + 1e-9));
      for (std::size_t k = 0; k < rest.size(); ++k) {
        assign[rest[k]] = k < ns ? Split::kShadow : Split::kThreshold;
      }
      ScoreSet fold_scores = internal::score_runs(
          cfg, art, assign, stable_hash(cfg.master_seed, 0x3E7A + 1 + f));
      double fold_tau =
          select_threshold(fold_scores.subset(Split::kThreshold), cfg.delta,
                           cfg.confidence, cfg.method);
      report.folds.push_back(audit(fold_scores.subset(Split::kTest), fold_tau,
                                   cfg.delta, cfg.confidence, cfg.method));
    }
  }
  double mean = 0.0;
  for (const EpsilonEstimate& e : report.folds) mean += e.eps_emp;
  mean /= static_cast<double>(report.folds.size());
  double var = 0.0;
  for (const EpsilonEstimate& e : report.folds) {
    var += (e.eps_emp - mean) * (e.eps_emp - mean);
  }
  report.fold_mean = mean;
  report.fold_stddev =
      report.folds.size() > 1
          ? std::sqrt(var / static_cast<double>(report.folds.size() - 1))
          : 0.0;
  report.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

// ---------------------------------------------------------------------------
// Config JSON (all seeds explicit; nothing read from system entropy).
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json config_to_json(const AuditConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema"] = cfg.schema->to_json();
  nlohmann::ordered_json mech;
  mech["kind"] = mech_name(cfg.mechanism.kind);
  mech["epsilon"] = cfg.mechanism.epsilon;
  mech["delta"] = cfg.mechanism.delta;
  if (!cfg.mechanism.structure.empty()) {
    nlohmann::ordered_json st = nlohmann::ordered_json::array();
    for (const PbNode& n : cfg.mechanism.structure) {
      st.push_back({{"attr", n.attr}, {"parents", n.parents}});
    }
    mech["structure"] = st;
  }
  if (!cfg.mechanism.cliques.empty()) mech["cliques"] = cfg.mechanism.cliques;
  if (cfg.mechanism.kind == MechKind::kGan) {
    const GanHyper& g = cfg.mechanism.gan;
    mech["gan"] = {{"learning_rate", g.learning_rate},
                   {"weight_clip", g.weight_clip},
                   {"batch", g.batch},
                   {"n_critic", g.n_critic},
                   {"grad_bound", g.grad_bound},
                   {"iters", g.iters},
                   {"hidden", g.hidden},
                   {"latent", g.latent},
                   {"sigma_cap", g.sigma_cap}};
  }
  if (cfg.mechanism.bug.has_value()) {
    mech["bug"] = bug_name(cfg.mechanism.bug->kind);
  }
  mech["min_dminus"] = cfg.mechanism.min_dminus;
  j["mechanism"] = mech;
  j["attack"] = attack_name(cfg.attack);
  if (cfg.canary.has_value()) {
    j["canary"] = {{"index", cfg.canary->index}, {"norm", cfg.canary->norm}};
  }
  nlohmann::ordered_json pair;
  pair["variant"] = cfg.pair.variant == NeighborVariant::kAddRemove
                        ? "add_remove"
                        : "edit";
  if (cfg.pair.source == PairSource::kWorstCase) {
    pair["source"] = "worstcase";
    pair["small"] = cfg.pair.worstcase.small;
    pair["narrow"] = cfg.pair.worstcase.narrow;
    pair["repeat"] = cfg.pair.worstcase.repeat_target;
  } else {
    pair["source"] = "dataset";
    pair["path"] = cfg.pair.dataset_path;
    switch (cfg.pair.target_mode) {
      case TargetMode::kRowIndex:
        pair["target"] = {{"index", cfg.pair.target_index}};
        break;
      case TargetMode::kRarest:
        pair["target"] = "rarest";
        break;
      case TargetMode::kMiniMia:
        pair["target"] = {{"mini_mia", {{"v", cfg.pair.mini_v},
                                        {"reps", cfg.pair.mini_reps}}}};
        break;
    }
    if (!cfg.pair.y_values.empty()) pair["y"] = cfg.pair.y_values;
  }
  j["pair"] = pair;
  j["n_models"] = cfg.n_models;
  j["split"] = {cfg.split.shadow, cfg.split.threshold, cfg.split.test};
  j["synth_size"] = cfg.synth_size;
  j["delta"] = cfg.delta;
  j["confidence"] = cfg.confidence;
  j["method"] = method_name(cfg.method);
  j["meta"] = meta_name(cfg.meta);
  j["folds"] = cfg.folds;
  j["master_seed"] = cfg.master_seed;
  return j;
}

inline AuditConfig config_from_json(const nlohmann::json& j,
                                    const std::string& base_dir = "") {
  AuditConfig cfg;
  const auto& js = j.at("schema");
  if (js.is_object() && js.contains("path")) {
    std::string p = js.at("path").get<std::string>();
    if (!base_dir.empty() && !p.empty() && p[0] != '/') {
      p = base_dir + "/" + p;
    }
    cfg.schema = std::make_shared<const Schema>(load_schema_json(p));
  } else {
    cfg.schema = std::make_shared<const Schema>(Schema::from_json(js));
  }
  const auto& jm = j.at("mechanism");
  cfg.mechanism.kind = mech_from_name(jm.at("kind").get<std::string>());
  cfg.mechanism.epsilon = jm.at("epsilon").get<double>();
  cfg.mechanism.delta = jm.value("delta", 0.0);
  if (jm.contains("structure")) {
    for (const auto& n : jm.at("structure")) {
      cfg.mechanism.structure.push_back(
          PbNode{n.at("attr").get<int>(),
                 n.at("parents").get<std::vector<int>>()});
    }
  }
  if (jm.contains("cliques")) {
    cfg.mechanism.cliques = jm.at("cliques").get<std::vector<Clique>>();
  }
  if (jm.contains("gan")) {
    const auto& g = jm.at("gan");
    cfg.mechanism.gan.learning_rate =
        g.value("learning_rate", cfg.mechanism.gan.learning_rate);
    cfg.mechanism.gan.weight_clip =
        g.value("weight_clip", cfg.mechanism.gan.weight_clip);
    cfg.mechanism.gan.batch = g.value("batch", cfg.mechanism.gan.batch);
    cfg.mechanism.gan.n_critic =
        g.value("n_critic", cfg.mechanism.gan.n_critic);
    cfg.mechanism.gan.grad_bound =
        g.value("grad_bound", cfg.mechanism.gan.grad_bound);
    cfg.mechanism.gan.iters = g.value("iters", cfg.mechanism.gan.iters);
    cfg.mechanism.gan.hidden = g.value("hidden", cfg.mechanism.gan.hidden);
    cfg.mechanism.gan.latent = g.value("latent", cfg.mechanism.gan.latent);
    cfg.mechanism.gan.sigma_cap =
        g.value("sigma_cap", cfg.mechanism.gan.sigma_cap);
  }
  if (jm.contains("bug") && !jm.at("bug").is_null()) {
    cfg.mechanism.bug =
        BugSpec{bug_from_name(jm.at("bug").get<std::string>())};
  }
  cfg.mechanism.min_dminus =
      jm.value("min_dminus",
               cfg.mechanism.kind == MechKind::kGan ? std::size_t{4}
                                                    : std::size_t{2});
  cfg.attack = attack_from_name(j.at("attack").get<std::string>());
  if (j.contains("canary")) {
    cfg.canary = CanarySpec{j.at("canary").at("index").get<std::size_t>(),
                            j.at("canary").at("norm").get<double>()};
  }
  const auto& jp = j.at("pair");
  std::string variant = jp.at("variant").get<std::string>();
  if (variant == "add_remove") {
    cfg.pair.variant = NeighborVariant::kAddRemove;
  } else if (variant == "edit") {
    cfg.pair.variant = NeighborVariant::kEdit;
  } else {
    throw std::invalid_argument("config: unknown variant '" + variant + "'");
  }
  std::string source = jp.at("source").get<std::string>();
  if (source == "worstcase") {
    cfg.pair.source = PairSource::kWorstCase;
    cfg.pair.worstcase.small = jp.value("small", true);
    cfg.pair.worstcase.narrow = jp.value("narrow", false);
    cfg.pair.worstcase.repeat_target = jp.value("repeat", false);
  } else if (source == "dataset") {
    cfg.pair.source = PairSource::kDatasetFile;
    std::string p = jp.at("path").get<std::string>();
    if (!base_dir.empty() && !p.empty() && p[0] != '/') {
      p = base_dir + "/" + p;
    }
    cfg.pair.dataset_path = p;
    const auto& jt = jp.at("target");
    if (jt.is_string() && jt.get<std::string>() == "rarest") {
      cfg.pair.target_mode = TargetMode::kRarest;
    } else if (jt.is_object() && jt.contains("index")) {
      cfg.pair.target_mode = TargetMode::kRowIndex;
      cfg.pair.target_index = jt.at("index").get<std::size_t>();
    } else if (jt.is_object() && jt.contains("mini_mia")) {
      cfg.pair.target_mode = TargetMode::kMiniMia;
      cfg.pair.mini_v = jt.at("mini_mia").value("v", std::size_t{100});
      cfg.pair.mini_reps = jt.at("mini_mia").value("reps", std::size_t{64});
    } else {
      throw std::invalid_argument("config: unrecognized pair.target");
    }
    if (jp.contains("y")) {
      cfg.pair.y_values = jp.at("y").get<std::vector<std::string>>();
    }
  } else {
    throw std::invalid_argument("config: unknown pair.source '" + source +
                                "'");
  }
  cfg.n_models = j.at("n_models").get<std::size_t>();
  if (j.contains("split")) {
    auto v = j.at("split").get<std::vector<double>>();
    if (v.size() != 3) {
      throw std::invalid_argument("config: split must have three fractions");
    }
    cfg.split = SplitFractions{v[0], v[1], v[2]};
  }
  cfg.synth_size = j.value("synth_size", std::size_t{100});
  cfg.delta = j.value("delta", 0.0);
  cfg.confidence = j.value("confidence", 0.95);
  cfg.method = method_from_name(
      j.value("method", std::string("eps_delta_region")));
  cfg.meta = meta_from_name(j.value("meta", std::string("boosted_stumps")));
  cfg.folds = j.value("folds", std::size_t{5});
  cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  validate_config(cfg);
  return cfg;
}

}  // namespace dpaudit

#endif  // DPAUDIT_GAMERUNNER_HPP_
