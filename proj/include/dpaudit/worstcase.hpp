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

#ifndef DPAUDIT_WORSTCASE_HPP_
#define DPAUDIT_WORSTCASE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpaudit/attacks.hpp"
#include "dpaudit/core.hpp"
#include "dpaudit/estimator.hpp"
#include "dpaudit/mechanism.hpp"
#include "dpaudit/rng.hpp"

namespace dpaudit {

struct WorstCaseKind {
  bool small = true;
  bool narrow = false;
  bool repeat_target = false;
};

struct WorstCase {
  SchemaPtr schema;  // truncated when narrow
  Dataset d_minus;
  Record x_t;
  std::optional<Record> y;  // populated for the edit variant
};

// Size used for the dataset body when `small` is off.
inline constexpr std::size_t kNotSmallRows = 32;

// Crafts the adversarial dataset body and target: narrow truncates the
// schema to its first three attributes; the target takes the last category
// of every attribute while filler rows (and y) take the first, so filler
// and target are maximally distant in one-hot space; repeat plants one copy
// of the target inside D^- so the two worlds differ in its multiplicity.
// Both worlds built from the result share one schema object, which closes
// the metadata channel.
inline WorstCase craft_worstcase(const Schema& s, WorstCaseKind kind,
                                 NeighborVariant variant,
                                 std::uint64_t /*seed*/,
                                 std::size_t dminus_size = 2) {
  if (kind.narrow && s.attr_count() < 3) {
    throw std::invalid_argument(
        "craft_worstcase: narrow needs at least 3 attributes");
  }
  std::vector<Attribute> attrs = s.attributes();
  if (kind.narrow) attrs.resize(3);
  for (const Attribute& a : attrs) {
    if (a.categories.size() < 2) {
      throw std::invalid_argument(
          "craft_worstcase: attributes need at least 2 categories");
    }
  }
  auto schema = std::make_shared<const Schema>(Schema(std::move(attrs)));

  Record x_t, filler;
  for (std::size_t a = 0; a < schema->attr_count(); ++a) {
    x_t.values.push_back(static_cast<std::int32_t>(schema->domain_size(a)) -
                         1);
    filler.values.push_back(0);
  }
  std::size_t size = kind.small ? dminus_size
                                : std::max(dminus_size, kNotSmallRows);
  if (size < 1) throw std::invalid_argument("craft_worstcase: empty D^-");
  std::vector<Record> rows;
  std::size_t fillers = kind.repeat_target ? size - 1 : size;
  for (std::size_t i = 0; i < fillers; ++i) rows.push_back(filler);
  if (kind.repeat_target) rows.push_back(x_t);

  WorstCase wc{schema, Dataset(schema, std::move(rows)), x_t, std::nullopt};
  if (variant == NeighborVariant::kEdit) wc.y = filler;
  return wc;
}

// Rarity proxy: sum over attributes of -log empirical value frequency.
inline double record_rarity(const Dataset& d, const Record& r) {
  double score = 0.0;
  for (std::size_t a = 0; a < r.values.size(); ++a) {
    std::size_t count = 0;
    for (const Record& row : d.rows) {
      if (row.values[a] == r.values[a]) ++count;
    }
    score += -std::log(static_cast<double>(count) /
                       static_cast<double>(d.rows.size()));
  }
  return score;
}

struct VulnerableCandidate {
  Record record;
  double rarity = 0.0;
  double auc = 0.5;
};

// Two-stage worst-case target selection: the rarity proxy ranks candidate
// records, then short "mini" attacks on each candidate's add/remove pair
// measure per-candidate AUC; the best AUC wins. Feature-based attacks train
// their meta-classifier on the first half of the repetitions and score the
// second half.
inline Record select_vulnerable(
    const Dataset& d, const MechanismConfig& mech, AttackKind attack,
    std::size_t v, std::size_t reps, std::uint64_t seed,
    std::size_t synth_size = 100,
    std::vector<VulnerableCandidate>* table_out = nullptr) {
  if (v == 0) throw std::invalid_argument("select_vulnerable: V must be >= 1");
  if (v > d.rows.size()) {
    throw std::invalid_argument("select_vulnerable: V exceeds dataset size");
  }
  if (reps < 2 || reps % 2 != 0) {
    throw std::invalid_argument("select_vulnerable: reps must be even, >= 2");
  }

  // Rank distinct records by rarity; ties keep first-occurrence order.
  std::vector<std::pair<double, std::size_t>> ranked;
  std::map<Record, bool> seen;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    if (seen.emplace(d.rows[i], true).second) {
      ranked.push_back({record_rarity(d, d.rows[i]), i});
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.first > b.first;
                   });
  if (ranked.size() > v) ranked.resize(v);

  std::vector<VulnerableCandidate> table;
  std::size_t best = 0;
  for (std::size_t ci = 0; ci < ranked.size(); ++ci) {
    const Record& x_t = d.rows[ranked[ci].second];
    // D^- = d minus one occurrence of the candidate.
    std::vector<Record> rows;
    bool removed = false;
    for (const Record& r : d.rows) {
      if (!removed && r == x_t) {
        removed = true;
        continue;
      }
      rows.push_back(r);
    }
    NeighborPair pair = make_neighbors(Dataset(d.schema, std::move(rows)),
                                       x_t, NeighborVariant::kAddRemove);
    AttackContext ctx;
    ctx.attack = attack;
    ctx.ref_schema = d.schema;
    ctx.x_t = x_t;
    ctx.synth_size = synth_size;
    ctx.query_seed = stable_hash(seed, 0xA11C);
    ctx.canary.index = 0;
    ctx.canary.norm = mech.gan.grad_bound;
    if (attack == AttackKind::kCanary) {
      ctx.canary.index = default_canary_index(*d.schema, mech.gan);
    }

    std::size_t half = reps / 2;
    std::vector<std::vector<double>> art0, art1;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      int b = rep < half ? 1 : 0;  // first half on D, second on D'
      const Dataset& world = b == 1 ? pair.d1 : pair.d0;
      std::uint64_t run_seed = stable_hash(seed, ci * reps + rep);
      std::vector<double> art =
          run_attack_once(mech, ctx, world, pair.d1, stable_hash(run_seed, 1),
                          stable_hash(run_seed, 2));
      (b == 1 ? art1 : art0).push_back(std::move(art));
    }

    double auc;
    if (attack_needs_meta(attack)) {
      std::size_t tr = half / 2;
      if (tr == 0) {
        throw std::invalid_argument(
            "select_vulnerable: reps too small for a meta-trained attack");
      }
      std::vector<FeatureVector> f0, f1;
      for (std::size_t i = 0; i < tr; ++i) {
        f0.push_back(FeatureVector{art0[i], attack});
        f1.push_back(FeatureVector{art1[i], attack});
      }
      MetaClassifier meta = train_meta(f0, f1, stable_hash(seed, ci));
      std::vector<double> s0, s1;
      for (std::size_t i = tr; i < half; ++i) {
        s0.push_back(meta.score(art0[i]));
        s1.push_back(meta.score(art1[i]));
      }
      auc = auc_from_scores(s0, s1);
    } else {
      std::vector<double> s0, s1;
      for (const auto& a : art0) s0.push_back(a[0]);
      for (const auto& a : art1) s1.push_back(a[0]);
      auc = auc_from_scores(s0, s1);
    }
    table.push_back(VulnerableCandidate{x_t, ranked[ci].first, auc});
    if (auc > table[best].auc) best = ci;
  }
  Record chosen = table[best].record;
  if (table_out) *table_out = std::move(table);
  return chosen;
}

inline void write_candidates_csv(const std::string& path, const Schema& s,
                                 const std::vector<VulnerableCandidate>& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write candidates file: " + path);
  out << "rank,rarity,auc";
  for (const Attribute& a : s.attributes()) out << "," << a.name;
  out << "\n";
  char buf[64];
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << i;
    std::snprintf(buf, sizeof(buf), "%.17g", t[i].rarity);
    out << "," << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", t[i].auc);
    out << "," << buf;
    for (std::size_t a = 0; a < t[i].record.values.size(); ++a) {
      out << "," << s.category_name(a, t[i].record.values[a]);
    }
    out << "\n";
  }
}

}  // namespace dpaudit

#endif  // DPAUDIT_WORSTCASE_HPP_
