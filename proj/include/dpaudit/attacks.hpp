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

#ifndef DPAUDIT_ATTACKS_HPP_
#define DPAUDIT_ATTACKS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpaudit/core.hpp"
#include "dpaudit/mechanism.hpp"
#include "dpaudit/rng.hpp"

namespace dpaudit {

enum class AttackKind {
  kDcr,
  kQuerybased,
  kWhiteboxNaive,
  kWhiteboxError,
  kLogan,
  kCanary,
};

inline std::string attack_name(AttackKind k) {
  switch (k) {
    case AttackKind::kDcr: return "dcr";
    case AttackKind::kQuerybased: return "querybased";
    case AttackKind::kWhiteboxNaive: return "whitebox_naive";
    case AttackKind::kWhiteboxError: return "whitebox_error";
    case AttackKind::kLogan: return "logan";
    case AttackKind::kCanary: return "canary";
  }
  return "?";
}

inline AttackKind attack_from_name(const std::string& s) {
  if (s == "dcr") return AttackKind::kDcr;
  if (s == "querybased") return AttackKind::kQuerybased;
  if (s == "whitebox_naive") return AttackKind::kWhiteboxNaive;
  if (s == "whitebox_error") return AttackKind::kWhiteboxError;
  if (s == "logan") return AttackKind::kLogan;
  if (s == "canary") return AttackKind::kCanary;
  throw std::invalid_argument("unknown attack: " + s);
}

inline bool attack_applicable(AttackKind a, MechKind m) {
  switch (a) {
    case AttackKind::kDcr:
    case AttackKind::kQuerybased:
      return true;
    case AttackKind::kWhiteboxNaive:
    case AttackKind::kWhiteboxError:
      return m == MechKind::kPrivBayes || m == MechKind::kMst;
    case AttackKind::kLogan:
    case AttackKind::kCanary:
      return m == MechKind::kGan;
  }
  return false;
}

// Attacks that score through a shadow-trained meta-classifier.
inline bool attack_needs_meta(AttackKind a) {
  return a == AttackKind::kQuerybased || a == AttackKind::kWhiteboxNaive ||
         a == AttackKind::kWhiteboxError;
}

struct FeatureVector {
  std::vector<double> values;
  AttackKind provenance = AttackKind::kDcr;
};

// ---------------------------------------------------------------------------
// Black-box attacks. These functions see the synthetic data only; their
// signatures have no model parameter by construction.
// ---------------------------------------------------------------------------

// Distance to closest record: minus the minimum one-hot Euclidean distance
// between the target and any synthetic row. Records differing in m
// attributes sit at distance sqrt(2m), so the minimum is computed from
// attribute mismatch counts directly.
inline double dcr_score(const Record& x_t, const Dataset& synth) {
  if (synth.rows.empty()) {
    throw std::invalid_argument("dcr_score: empty synthetic dataset");
  }
  if (!record_valid(*synth.schema, x_t)) {
    throw std::invalid_argument("dcr_score: target invalid under schema");
  }
  std::size_t best = x_t.values.size() + 1;
  for (const Record& r : synth.rows) {
    std::size_t mism = 0;
    for (std::size_t a = 0; a < x_t.values.size(); ++a) {
      if (r.values[a] != x_t.values[a]) ++mism;
    }
    best = std::min(best, mism);
    if (best == 0) break;
  }
  return -std::sqrt(2.0 * static_cast<double>(best));
}

// Query answers targeted at x_t: per-attribute match counts, sixteen seeded
// random conjunctions (three attributes where the schema has them), and the
// exact full-record match count.
inline FeatureVector qb_features(const Dataset& synth, const Record& x_t,
                                 const Schema& s, std::uint64_t query_seed) {
  if (!record_valid(s, x_t)) {
    throw std::invalid_argument("qb_features: target invalid under schema");
  }
  const std::size_t attrs = s.attr_count();
  FeatureVector f;
  f.provenance = AttackKind::kQuerybased;
  f.values.assign(attrs + 16 + 1, 0.0);
  // Conjunction attribute sets, fixed by the query seed.
  const std::size_t arity = std::min<std::size_t>(3, attrs);
  Rng rng(query_seed);
  std::vector<std::vector<std::size_t>> conj(16);
  for (auto& q : conj) {
    std::vector<std::size_t> pool(attrs);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < arity; ++i) {
      std::size_t j = i + rng.uniform_index(pool.size() - i);
      std::swap(pool[i], pool[j]);
      q.push_back(pool[i]);
    }
  }
  for (const Record& r : synth.rows) {
    bool full = true;
    for (std::size_t a = 0; a < attrs; ++a) {
      if (r.values[a] == x_t.values[a]) {
        f.values[a] += 1.0;
      } else {
        full = false;
      }
    }
    for (std::size_t qi = 0; qi < conj.size(); ++qi) {
      bool hit = true;
      for (std::size_t a : conj[qi]) {
        if (r.values[a] != x_t.values[a]) {
          hit = false;
          break;
        }
      }
      if (hit) f.values[attrs + qi] += 1.0;
    }
    if (full) f.values[attrs + 16] += 1.0;
  }
  return f;
}

// ---------------------------------------------------------------------------
// White-box features for the tabular mechanisms.
// ---------------------------------------------------------------------------

enum class WbVariant { kNaive, kError };

namespace internal {

// Maps category indices of `from` onto `to` by name, attribute by attribute.
// Categories of `from` must all exist in `to`.
inline std::vector<std::vector<std::int32_t>> category_maps(
    const Schema& from, const Schema& to) {
  if (from.attr_count() != to.attr_count()) {
    throw std::invalid_argument("white-box: attribute count mismatch");
  }
  std::vector<std::vector<std::int32_t>> maps(from.attr_count());
  for (std::size_t a = 0; a < from.attr_count(); ++a) {
    if (from.attributes()[a].name != to.attributes()[a].name) {
      throw std::invalid_argument("white-box: attribute name mismatch");
    }
    for (std::size_t c = 0; c < from.domain_size(a); ++c) {
      std::int32_t idx = to.category_index(
          a, from.category_name(a, static_cast<std::int32_t>(c)));
      if (idx < 0) {
        throw std::invalid_argument(
            "white-box: model category missing from reference schema");
      }
      maps[a].push_back(idx);
    }
  }
  return maps;
}

// Re-expresses the model's node table on the reference schema's grid;
// combinations the model never saw stay zero. Identity when the schemas
// already agree.
inline PbTable align_pb_table(const PbTable& t, const PbNode& n,
                              const Schema& model_schema,
                              const Schema& ref,
                              const std::vector<std::vector<std::int32_t>>&
                                  maps) {
  PbTable out;
  out.rows = 1;
  for (int p : n.parents) out.rows *= ref.domain_size(static_cast<std::size_t>(p));
  out.cols = ref.domain_size(static_cast<std::size_t>(n.attr));
  out.cells.assign(out.rows * out.cols, 0.0);
  std::size_t model_rows = t.rows;
  for (std::size_t row = 0; row < model_rows; ++row) {
    // Decode the model-row into per-parent model indices, then re-encode
    // against the reference domains.
    std::size_t rem = row;
    std::size_t ref_row = 0;
    // first parent is the slowest index
    std::vector<std::size_t> vals(n.parents.size());
    for (std::size_t pi = n.parents.size(); pi-- > 0;) {
      std::size_t dom = model_schema.domain_size(
          static_cast<std::size_t>(n.parents[pi]));
      vals[pi] = rem % dom;
      rem /= dom;
    }
    for (std::size_t pi = 0; pi < n.parents.size(); ++pi) {
      std::size_t a = static_cast<std::size_t>(n.parents[pi]);
      ref_row = ref_row * ref.domain_size(a) +
                static_cast<std::size_t>(maps[a][vals[pi]]);
    }
    for (std::size_t c = 0; c < t.cols; ++c) {
      std::size_t a = static_cast<std::size_t>(n.attr);
      std::size_t ref_c = static_cast<std::size_t>(maps[a][c]);
      out.cells[ref_row * out.cols + ref_c] = t.cells[row * t.cols + c];
    }
  }
  return out;
}

inline std::vector<double> align_mst_marginal(
    const std::vector<double>& t, const Clique& c, const Schema& model_schema,
    const Schema& ref, const std::vector<std::vector<std::int32_t>>& maps) {
  std::size_t ref_cells = 1;
  for (int a : c) ref_cells *= ref.domain_size(static_cast<std::size_t>(a));
  std::vector<double> out(ref_cells, 0.0);
  std::size_t model_cells = t.size();
  for (std::size_t i = 0; i < model_cells; ++i) {
    std::size_t rem = i;
    std::vector<std::size_t> vals(c.size());
    for (std::size_t ci = c.size(); ci-- > 0;) {
      std::size_t dom =
          model_schema.domain_size(static_cast<std::size_t>(c[ci]));
      vals[ci] = rem % dom;
      rem /= dom;
    }
    std::size_t ref_idx = 0;
    for (std::size_t ci = 0; ci < c.size(); ++ci) {
      std::size_t a = static_cast<std::size_t>(c[ci]);
      ref_idx = ref_idx * ref.domain_size(a) +
                static_cast<std::size_t>(maps[a][vals[ci]]);
    }
    out[ref_idx] = t[i];
  }
  return out;
}

}  // namespace internal

// White-box feature extraction. Naive flattens the model's measurement
// tables in canonical order (aligned to d_ref's schema so feature length is
// world-independent even under the metadata bug); Error reduces each table
// to the sum of (noisy value - exact value from d_ref).
inline FeatureVector wb_features(const GenModel& model, WbVariant variant,
                                 const Dataset& d_ref) {
  const Schema& ref = *d_ref.schema;
  FeatureVector f;
  f.provenance = variant == WbVariant::kNaive ? AttackKind::kWhiteboxNaive
                                              : AttackKind::kWhiteboxError;
  if (const PbModel* pb = std::get_if<PbModel>(&model)) {
    auto maps = internal::category_maps(*pb->schema, ref);
    std::vector<PbTable> exact;
    if (variant == WbVariant::kError) {
      exact = pb_exact_tables(d_ref, ref, pb->structure);
    }
    for (std::size_t i = 0; i < pb->tables.size(); ++i) {
      PbTable aligned = internal::align_pb_table(
          pb->tables[i], pb->structure[i], *pb->schema, ref, maps);
      if (variant == WbVariant::kNaive) {
        f.values.insert(f.values.end(), aligned.cells.begin(),
                        aligned.cells.end());
      } else {
        double sum = 0.0;
        for (std::size_t c = 0; c < aligned.cells.size(); ++c) {
          sum += aligned.cells[c] - exact[i].cells[c];
        }
        f.values.push_back(sum);
      }
    }
    return f;
  }
  if (const MstModel* mst = std::get_if<MstModel>(&model)) {
    auto maps = internal::category_maps(*mst->schema, ref);
    std::vector<std::vector<double>> exact;
    if (variant == WbVariant::kError) {
      exact = mst_exact_marginals(d_ref, ref, mst->cliques);
    }
    for (std::size_t i = 0; i < mst->noisy_marginals.size(); ++i) {
      std::vector<double> aligned = internal::align_mst_marginal(
          mst->noisy_marginals[i], mst->cliques[i], *mst->schema, ref, maps);
      if (variant == WbVariant::kNaive) {
        f.values.insert(f.values.end(), aligned.begin(), aligned.end());
      } else {
        double sum = 0.0;
        for (std::size_t c = 0; c < aligned.size(); ++c) {
          sum += aligned[c] - exact[i][c];
        }
        f.values.push_back(sum);
      }
    }
    return f;
  }
  throw std::invalid_argument(
      "wb_features: white-box features need a privbayes or mst model");
}

// ---------------------------------------------------------------------------
// Meta-classifier: an in-repo ensemble of boosted decision stumps, with a
// regularized logistic scorer as the alternative for smooth low-dimensional
// features. No data ordering, hashing, or randomness enters training, so a
// fixed input yields a bit-identical scorer.
// ---------------------------------------------------------------------------

enum class MetaKind { kBoostedStumps, kLogistic };

inline std::string meta_name(MetaKind k) {
  return k == MetaKind::kBoostedStumps ? "boosted_stumps" : "logistic";
}

inline MetaKind meta_from_name(const std::string& s) {
  if (s == "boosted_stumps") return MetaKind::kBoostedStumps;
  if (s == "logistic") return MetaKind::kLogistic;
  throw std::invalid_argument("unknown meta classifier: " + s);
}

class MetaClassifier {
 public:
  double score(const std::vector<double>& x) const {
    if (kind_ == MetaKind::kLogistic) {
      double z = bias_;
      for (std::size_t f = 0; f < weights_.size(); ++f) {
        double v = (x.at(f) - feat_mean_[f]) * feat_scale_[f];
        z += weights_[f] * v;
      }
      return 1.0 / (1.0 + std::exp(-z));
    }
    double margin = bias_;
    for (const Stump& st : stumps_) {
      double h = (x.at(st.feature) >= st.threshold) ? 1.0 : -1.0;
      margin += st.weight * h * st.polarity;
    }
    return 1.0 / (1.0 + std::exp(-2.0 * margin));
  }
  double score(const FeatureVector& f) const { return score(f.values); }

  std::size_t rounds_used() const { return stumps_.size(); }
  std::uint64_t seed() const { return seed_; }

  static MetaClassifier train(const std::vector<FeatureVector>& features_b0,
                              const std::vector<FeatureVector>& features_b1,
                              std::uint64_t seed,
                              MetaKind kind = MetaKind::kBoostedStumps,
                              std::size_t max_rounds = 96);

 private:
  struct Stump {
    std::size_t feature = 0;
    double threshold = 0.0;
    double polarity = 1.0;  // +1: predict b=1 above threshold
    double weight = 0.0;
  };
  MetaKind kind_ = MetaKind::kBoostedStumps;
  std::vector<Stump> stumps_;
  // logistic scorer state (weights act on standardized features)
  std::vector<double> weights_;
  std::vector<double> feat_mean_;
  std::vector<double> feat_scale_;
  double bias_ = 0.0;
  std::uint64_t seed_ = 0;
};

inline MetaClassifier MetaClassifier::train(
    const std::vector<FeatureVector>& features_b0,
    const std::vector<FeatureVector>& features_b1, std::uint64_t seed,
    MetaKind kind, std::size_t max_rounds) {
  if (features_b0.empty() || features_b1.empty()) {
    throw std::invalid_argument("train_meta: both classes must be non-empty");
  }
  const std::size_t dim = features_b0[0].values.size();
  std::vector<const std::vector<double>*> x;
  std::vector<double> y;
  for (const FeatureVector& f : features_b0) {
    if (f.values.size() != dim) {
      throw std::invalid_argument("train_meta: feature length mismatch");
    }
    x.push_back(&f.values);
    y.push_back(-1.0);
  }
  for (const FeatureVector& f : features_b1) {
    if (f.values.size() != dim) {
      throw std::invalid_argument("train_meta: feature length mismatch");
    }
    x.push_back(&f.values);
    y.push_back(1.0);
  }
  const std::size_t n = x.size();

  if (kind == MetaKind::kLogistic) {
    MetaClassifier mc;
    mc.kind_ = MetaKind::kLogistic;
    mc.seed_ = seed;
    mc.feat_mean_.assign(dim, 0.0);
    mc.feat_scale_.assign(dim, 1.0);
    for (std::size_t f = 0; f < dim; ++f) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += (*x[i])[f];
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        var += ((*x[i])[f] - mean) * ((*x[i])[f] - mean);
      }
      var /= static_cast<double>(n);
      mc.feat_mean_[f] = mean;
      mc.feat_scale_[f] = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
    }
    // Full-batch gradient descent on L2-regularized logistic loss.
    const double kLambda = 1e-3;
    const double kRate = 1.0;
    const std::size_t kIters = 400;
    mc.weights_.assign(dim, 0.0);
    mc.bias_ = 0.0;
    std::vector<double> xs(dim);
    for (std::size_t it = 0; it < kIters; ++it) {
      std::vector<double> gw(dim, 0.0);
      double gb = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double z = mc.bias_;
        for (std::size_t f = 0; f < dim; ++f) {
          xs[f] = ((*x[i])[f] - mc.feat_mean_[f]) * mc.feat_scale_[f];
          z += mc.weights_[f] * xs[f];
        }
        double target = y[i] > 0.0 ? 1.0 : 0.0;
        double err = 1.0 / (1.0 + std::exp(-z)) - target;
        for (std::size_t f = 0; f < dim; ++f) gw[f] += err * xs[f];
        gb += err;
      }
      for (std::size_t f = 0; f < dim; ++f) {
        mc.weights_[f] -= kRate * (gw[f] / static_cast<double>(n) +
                                   kLambda * mc.weights_[f]);
      }
      mc.bias_ -= kRate * gb / static_cast<double>(n);
    }
    return mc;
  }

  MetaClassifier mc;
  mc.seed_ = seed;
  mc.bias_ = 0.5 * std::log(static_cast<double>(features_b1.size()) /
                            static_cast<double>(features_b0.size()));

  // Per-feature sort orders, reused every round.
  std::vector<std::vector<std::size_t>> order(dim);
  for (std::size_t f = 0; f < dim; ++f) {
    order[f].resize(n);
    std::iota(order[f].begin(), order[f].end(), 0);
    std::stable_sort(order[f].begin(), order[f].end(),
                     [&](std::size_t a, std::size_t b) {
                       return (*x[a])[f] < (*x[b])[f];
                     });
  }

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  for (std::size_t round = 0; round < max_rounds; ++round) {
    double best_err = 0.5;
    Stump best;
    bool found = false;
    for (std::size_t f = 0; f < dim; ++f) {
      // err(threshold below lowest, polarity +1) = weight of y=-1 samples.
      double err_pos = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (y[i] < 0.0) err_pos += w[i];
      }
      // Sweep thresholds upward; moving a sample below the threshold flips
      // its prediction from +1 to -1 under polarity +1.
      double err = err_pos;
      const auto& ord = order[f];
      for (std::size_t pos = 0; pos < n; ++pos) {
        std::size_t i = ord[pos];
        err += (y[i] > 0.0) ? w[i] : -w[i];
        if (pos + 1 < n && (*x[ord[pos + 1]])[f] == (*x[i])[f]) continue;
        double thr = (pos + 1 < n)
                         ? 0.5 * ((*x[i])[f] + (*x[ord[pos + 1]])[f])
                         : (*x[i])[f] + 1.0;
        // err is for polarity +1; polarity -1 mirrors it.
        if (err < best_err - 1e-15) {
          best_err = err;
          best = Stump{f, thr, 1.0, 0.0};
          found = true;
        }
        if (1.0 - err < best_err - 1e-15) {
          best_err = 1.0 - err;
          best = Stump{f, thr, -1.0, 0.0};
          found = true;
        }
      }
    }
    if (!found) break;
    double err = std::max(best_err, 1e-10);
    best.weight = 0.5 * std::log((1.0 - err) / err);
    mc.stumps_.push_back(best);
    if (best_err <= 1e-9) break;  // perfectly separated
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double h = ((*x[i])[best.feature] >= best.threshold ? 1.0 : -1.0) *
                 best.polarity;
      w[i] *= std::exp(-best.weight * y[i] * h);
      norm += w[i];
    }
    for (double& wi : w) wi /= norm;
  }
  return mc;
}

inline MetaClassifier train_meta(const std::vector<FeatureVector>& features_b0,
                                 const std::vector<FeatureVector>& features_b1,
                                 std::uint64_t seed,
                                 MetaKind kind = MetaKind::kBoostedStumps) {
  return MetaClassifier::train(features_b0, features_b1, seed, kind);
}

// ---------------------------------------------------------------------------
// GAN attacks.
// ---------------------------------------------------------------------------

// Encodes a record given in the reference schema against the model's schema,
// matching categories by name; categories the model never learned encode as
// an all-zero block.
inline std::vector<double> encode_for_model(const Record& r,
                                            const Schema& ref,
                                            const Schema& model_schema) {
  if (model_schema == ref) return encode_one_hot(r, ref);
  if (model_schema.attr_count() != ref.attr_count()) {
    throw std::invalid_argument("encode_for_model: attribute count mismatch");
  }
  std::vector<double> v(model_schema.one_hot_dim(), 0.0);
  std::size_t offset = 0;
  for (std::size_t a = 0; a < ref.attr_count(); ++a) {
    std::int32_t idx =
        model_schema.category_index(a, ref.category_name(a, r.values[a]));
    if (idx >= 0) v[offset + static_cast<std::size_t>(idx)] = 1.0;
    offset += model_schema.domain_size(a);
  }
  return v;
}

// Trained-critic confidence on the target record.
inline double logan_score(const GanModel& m, const Record& x_t,
                          const Schema& ref_schema) {
  return gan_critic_score(m, encode_for_model(x_t, ref_schema, *m.schema));
}

// Dirac canary: a gradient that is zero everywhere except one parameter.
struct CanarySpec {
  std::size_t index = 0;
  double norm = 1.0;  // set to the mechanism's gradient bound c_p
};

// Default canary position: the last critic bias.
inline std::size_t default_canary_index(const Schema& s,
                                        const GanHyper& hyper) {
  return internal::CriticShape{s.one_hot_dim(), hyper.hidden}.dim() - 1;
}

// The active white-box attack. As an observer it rewrites the target
// record's per-example critic gradient to the Dirac canary whenever the
// target lands in a batch, and accumulates <w_after - w_start, g'> across
// critic steps as the run's score.
class CanaryAttack : public TrainObserver {
 public:
  CanaryAttack(CanarySpec spec, Record x_t, SchemaPtr ref_schema)
      : spec_(spec), x_t_(std::move(x_t)), ref_(std::move(ref_schema)) {}

  void real_gradient(const Schema& schema, const Record& row,
                     std::vector<double>& grad) override {
    if (spec_.index >= grad.size()) {
      throw std::out_of_range("canary index outside critic parameters");
    }
    if (!matches(schema, row)) return;
    std::fill(grad.begin(), grad.end(), 0.0);
    grad[spec_.index] = spec_.norm;
  }

  void critic_step(const std::vector<double>& w_start,
                   const std::vector<double>& w_after) override {
    if (spec_.index >= w_start.size()) {
      throw std::out_of_range("canary index outside critic parameters");
    }
    score_ += (w_after[spec_.index] - w_start[spec_.index]) * spec_.norm;
  }

  double score() const { return score_; }

 private:
  bool matches(const Schema& schema, const Record& row) const {
    if (schema == *ref_) return row == x_t_;
    if (row.values.size() != x_t_.values.size()) return false;
    for (std::size_t a = 0; a < row.values.size(); ++a) {
      if (schema.category_name(a, row.values[a]) !=
          ref_->category_name(a, x_t_.values[a])) {
        return false;
      }
    }
    return true;
  }

  CanarySpec spec_;
  Record x_t_;
  SchemaPtr ref_;
  double score_ = 0.0;
};

// ---------------------------------------------------------------------------
// One run of the distinguishing game body.
// ---------------------------------------------------------------------------

// Re-encodes a dataset onto the reference schema by category name. Used on
// synthetic output whose model learned its schema from the data; observed
// categories are always a subset of the reference domains.
inline Dataset remap_to_schema(const Dataset& d, SchemaPtr ref) {
  if (*d.schema == *ref) return Dataset(std::move(ref), d.rows);
  if (d.schema->attr_count() != ref->attr_count()) {
    throw std::invalid_argument("remap_to_schema: attribute count mismatch");
  }
  std::vector<Record> rows;
  rows.reserve(d.rows.size());
  for (const Record& r : d.rows) {
    Record out;
    for (std::size_t a = 0; a < r.values.size(); ++a) {
      std::int32_t idx =
          ref->category_index(a, d.schema->category_name(a, r.values[a]));
      if (idx < 0) {
        throw std::invalid_argument(
            "remap_to_schema: category not in reference schema");
      }
      out.values.push_back(idx);
    }
    rows.push_back(std::move(out));
  }
  return Dataset(std::move(ref), std::move(rows));
}

struct AttackContext {
  AttackKind attack = AttackKind::kDcr;
  SchemaPtr ref_schema;
  Record x_t;
  std::size_t synth_size = 100;
  std::uint64_t query_seed = 0;
  CanarySpec canary;
};

// Fits the mechanism on the world dataset and evaluates the attack with
// exactly the artifacts its threat model allows: black-box attacks see only
// the synthetic data, passive white-box attacks additionally see the fitted
// model, and the canary installs its observer into training. Returns the
// run's score (one element) or its feature vector.
inline std::vector<double> run_attack_once(const MechanismConfig& cfg,
                                           const AttackContext& ctx,
                                           const Dataset& d_world,
                                           const Dataset& d_ref,
                                           std::uint64_t fit_seed,
                                           std::uint64_t sample_seed) {
  if (!attack_applicable(ctx.attack, cfg.kind)) {
    throw std::invalid_argument("attack '" + attack_name(ctx.attack) +
                                "' does not apply to mechanism '" +
                                mech_name(cfg.kind) + "'");
  }
  switch (ctx.attack) {
    case AttackKind::kDcr: {
      GenModel model = fit_model(cfg, d_world, fit_seed);
      Dataset synth = remap_to_schema(
          sample_model(cfg, model, ctx.synth_size, sample_seed),
          ctx.ref_schema);
      return {dcr_score(ctx.x_t, synth)};
    }
    case AttackKind::kQuerybased: {
      GenModel model = fit_model(cfg, d_world, fit_seed);
      Dataset synth = remap_to_schema(
          sample_model(cfg, model, ctx.synth_size, sample_seed),
          ctx.ref_schema);
      return qb_features(synth, ctx.x_t, *ctx.ref_schema, ctx.query_seed)
          .values;
    }
    case AttackKind::kWhiteboxNaive:
    case AttackKind::kWhiteboxError: {
      GenModel model = fit_model(cfg, d_world, fit_seed);
      WbVariant v = ctx.attack == AttackKind::kWhiteboxNaive
                        ? WbVariant::kNaive
                        : WbVariant::kError;
      return wb_features(model, v, d_ref).values;
    }
    case AttackKind::kLogan: {
      GenModel model = fit_model(cfg, d_world, fit_seed);
      return {logan_score(std::get<GanModel>(model), ctx.x_t,
                          *ctx.ref_schema)};
    }
    case AttackKind::kCanary: {
      CanaryAttack canary(ctx.canary, ctx.x_t, ctx.ref_schema);
      fit_model(cfg, d_world, fit_seed, &canary);
      return {canary.score()};
    }
  }
  throw std::logic_error("run_attack_once: unreachable");
}

// Feature matrix export for offline inspection.
inline void write_features_csv(const std::string& path,
                               const std::vector<int>& labels,
                               const std::vector<FeatureVector>& features) {
  if (labels.size() != features.size()) {
    throw std::invalid_argument("write_features_csv: label count mismatch");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write features file: " + path);
  std::size_t dim = features.empty() ? 0 : features[0].values.size();
  out << "b";
  for (std::size_t i = 0; i < dim; ++i) out << ",f" << i;
  out << "\n";
  char buf[64];
  for (std::size_t r = 0; r < features.size(); ++r) {
    out << labels[r];
    for (double v : features[r].values) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace dpaudit

#endif  // DPAUDIT_ATTACKS_HPP_
