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

#include "dpaudit/worstcase.hpp"

#include <algorithm>

#include "gtest/gtest.h"

namespace dpaudit {
namespace {

SchemaPtr WideSchema() {
  return std::make_shared<const Schema>(Schema({
      {"a", {"a0", "a1"}},
      {"b", {"b0", "b1", "b2"}},
      {"c", {"c0", "c1"}},
      {"d", {"d0", "d1"}},
      {"e", {"e0", "e1"}},
  }));
}

std::size_t Multiplicity(const Dataset& d, const Record& r) {
  return static_cast<std::size_t>(
      std::count(d.rows.begin(), d.rows.end(), r));
}

TEST(CraftWorstCase, SmallAddRemoveSizes) {
  auto s = WideSchema();
  WorstCase wc = craft_worstcase(*s, {true, false, false},
                                 NeighborVariant::kAddRemove, 1);
  NeighborPair p =
      make_neighbors(wc.d_minus, wc.x_t, NeighborVariant::kAddRemove);
  EXPECT_EQ(p.d0.size(), 2u);
  EXPECT_EQ(p.d1.size(), 3u);
}

TEST(CraftWorstCase, NarrowTruncatesToThreeAttributes) {
  auto s = WideSchema();
  WorstCase wc = craft_worstcase(*s, {true, true, false},
                                 NeighborVariant::kAddRemove, 1);
  EXPECT_EQ(wc.schema->attr_count(), 3u);
  EXPECT_EQ(wc.x_t.values.size(), 3u);
}

TEST(CraftWorstCase, RepeatPlantsTheTargetOnce) {
  auto s = WideSchema();
  WorstCase wc = craft_worstcase(*s, {true, false, true},
                                 NeighborVariant::kAddRemove, 1);
  NeighborPair p =
      make_neighbors(wc.d_minus, wc.x_t, NeighborVariant::kAddRemove);
  EXPECT_EQ(Multiplicity(p.d0, wc.x_t), 1u);
  EXPECT_EQ(Multiplicity(p.d1, wc.x_t), 2u);
}

TEST(CraftWorstCase, NarrowNeedsThreeAttributes) {
  Schema two({{"a", {"0", "1"}}, {"b", {"0", "1"}}});
  EXPECT_THROW(
      craft_worstcase(two, {true, true, false}, NeighborVariant::kAddRemove,
                      1),
      std::invalid_argument);
}

TEST(CraftWorstCase, WorldsShareOneSchemaObject) {
  auto s = WideSchema();
  for (bool narrow : {false, true}) {
    for (bool repeat : {false, true}) {
      for (auto variant :
           {NeighborVariant::kAddRemove, NeighborVariant::kEdit}) {
        WorstCase wc =
            craft_worstcase(*s, {true, narrow, repeat}, variant, 1);
        NeighborPair p = make_neighbors(wc.d_minus, wc.x_t, variant, wc.y);
        EXPECT_TRUE(p.d0.schema == p.d1.schema);  // pointer equality
        EXPECT_TRUE(*p.d0.schema == *p.d1.schema);
        if (variant == NeighborVariant::kAddRemove) {
          EXPECT_EQ(p.d1.size(), p.d0.size() + 1);
        } else {
          EXPECT_EQ(p.d1.size(), p.d0.size());
        }
      }
    }
  }
}

TEST(CraftWorstCase, EditTargetsDifferEverywhere) {
  auto s = WideSchema();
  WorstCase wc =
      craft_worstcase(*s, {true, false, false}, NeighborVariant::kEdit, 1);
  ASSERT_TRUE(wc.y.has_value());
  for (std::size_t a = 0; a < wc.x_t.values.size(); ++a) {
    EXPECT_NE(wc.x_t.values[a], wc.y->values[a]);
  }
}

TEST(CraftWorstCase, HonorsMechanismMinimumSize) {
  auto s = WideSchema();
  WorstCase wc = craft_worstcase(*s, {true, false, true},
                                 NeighborVariant::kAddRemove, 1, 4);
  EXPECT_EQ(wc.d_minus.size(), 4u);
  EXPECT_EQ(Multiplicity(wc.d_minus, wc.x_t), 1u);
}

TEST(SelectVulnerable, UniqueValueRecordRanksFirst) {
  auto s = std::make_shared<const Schema>(Schema({
      {"a", {"common", "rare"}},
      {"b", {"x", "y"}},
  }));
  std::vector<Record> rows;
  for (int i = 0; i < 19; ++i) rows.push_back(Record{{0, i % 2}});
  rows.push_back(Record{{1, 0}});  // globally unique "rare" value
  Dataset d(s, rows);
  MechanismConfig mech;
  mech.kind = MechKind::kPrivBayes;
  mech.epsilon = 1.0;
  std::vector<VulnerableCandidate> table;
  select_vulnerable(d, mech, AttackKind::kDcr, 3, 8, 7, 20, &table);
  ASSERT_FALSE(table.empty());
  EXPECT_EQ(table[0].record, (Record{{1, 0}}));  // rarity stage puts it first
  for (const auto& c : table) {
    EXPECT_GE(c.auc, 0.0);
    EXPECT_LE(c.auc, 1.0);
  }
}

TEST(SelectVulnerable, DeterministicGivenSeed) {
  auto s = WideSchema();
  Rng rng(9);
  std::vector<Record> rows;
  for (int i = 0; i < 12; ++i) {
    Record r;
    for (std::size_t a = 0; a < s->attr_count(); ++a) {
      r.values.push_back(
          static_cast<std::int32_t>(rng.uniform_index(s->domain_size(a))));
    }
    rows.push_back(r);
  }
  Dataset d(s, rows);
  MechanismConfig mech;
  mech.kind = MechKind::kPrivBayes;
  mech.epsilon = 2.0;
  Record a = select_vulnerable(d, mech, AttackKind::kDcr, 4, 8, 3, 15);
  Record b = select_vulnerable(d, mech, AttackKind::kDcr, 4, 8, 3, 15);
  EXPECT_EQ(a, b);
}

TEST(SelectVulnerable, RejectsBadArguments) {
  auto s = WideSchema();
  Dataset d(s, {Record{{0, 0, 0, 0, 0}}, Record{{1, 1, 1, 1, 1}}});
  MechanismConfig mech;
  mech.kind = MechKind::kPrivBayes;
  mech.epsilon = 1.0;
  EXPECT_THROW(select_vulnerable(d, mech, AttackKind::kDcr, 0, 8, 1),
               std::invalid_argument);
  EXPECT_THROW(select_vulnerable(d, mech, AttackKind::kDcr, 3, 8, 1),
               std::invalid_argument);  // V > |d|
  EXPECT_THROW(select_vulnerable(d, mech, AttackKind::kDcr, 2, 7, 1),
               std::invalid_argument);  // odd reps
}

TEST(SelectVulnerable, NullMechanismGivesChanceAuc) {
  // Noise-swamped mechanism: the model is data-independent, so candidate
  // AUCs concentrate at one half.
  auto s = std::make_shared<const Schema>(Schema({
      {"a", {"0", "1"}},
      {"b", {"0", "1"}},
  }));
  std::vector<Record> rows = {Record{{0, 0}}, Record{{0, 1}}, Record{{1, 0}},
                              Record{{1, 1}}};
  Dataset d(s, rows);
  MechanismConfig mech;
  mech.kind = MechKind::kPrivBayes;
  mech.epsilon = 1e-9;  // Laplace noise dominates every count
  std::vector<VulnerableCandidate> table;
  select_vulnerable(d, mech, AttackKind::kDcr, 2, 1024, 11, 30, &table);
  for (const auto& c : table) {
    EXPECT_NEAR(c.auc, 0.5, 0.05);
  }
}

TEST(CandidatesCsv, WritesProvenanceTable) {
  auto s = std::make_shared<const Schema>(Schema(std::vector<Attribute>{{"a", {"0", "1"}}}));
  std::vector<VulnerableCandidate> table = {
      {Record{{1}}, 1.5, 0.75},
      {Record{{0}}, 0.5, 0.5},
  };
  std::string path =
      (std::filesystem::temp_directory_path() / "dpaudit_cand.csv").string();
  write_candidates_csv(path, *s, table);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "rank,rarity,auc,a");
  std::getline(in, line);
  EXPECT_EQ(line, "0,1.5,0.75,1");
  std::remove(path.c_str());
}

}  // namespace
}  // namespace dpaudit
