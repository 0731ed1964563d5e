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

#ifndef DPAUDIT_PRIVBAYES_HPP_
#define DPAUDIT_PRIVBAYES_HPP_

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dpaudit/core.hpp"
#include "dpaudit/rng.hpp"

namespace dpaudit {

struct PbNode {
  int attr = 0;
  std::vector<int> parents;
};

// Bayesian-network skeleton: one node per attribute, parents restricted to
// earlier nodes. The structure is a fixed input; it is never selected from
// the data.
using PbStructure = std::vector<PbNode>;

inline PbStructure default_chain_structure(const Schema& s) {
  PbStructure st;
  for (std::size_t a = 0; a < s.attr_count(); ++a) {
    PbNode n;
    n.attr = static_cast<int>(a);
    if (a > 0) n.parents.push_back(static_cast<int>(a - 1));
    st.push_back(std::move(n));
  }
  return st;
}

inline void validate_structure(const PbStructure& st, const Schema& s) {
  if (st.empty()) throw std::invalid_argument("privbayes: empty structure");
  std::set<int> seen;
  for (const PbNode& n : st) {
    if (n.attr < 0 || static_cast<std::size_t>(n.attr) >= s.attr_count()) {
      throw std::invalid_argument("privbayes: structure references unknown "
                                  "attribute " + std::to_string(n.attr));
    }
    for (int p : n.parents) {
      if (seen.count(p) == 0) {
        throw std::invalid_argument(
            "privbayes: parent must be an earlier structure node");
      }
    }
    if (!seen.insert(n.attr).second) {
      throw std::invalid_argument("privbayes: attribute repeated in structure");
    }
  }
  if (seen.size() != s.attr_count()) {
    throw std::invalid_argument(
        "privbayes: structure must cover every schema attribute");
  }
}

// Conditional table for one node: parent configurations (first parent
// slowest) by child categories, row-major.
struct PbTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> cells;
};

struct PbModel {
  SchemaPtr schema;
  PbStructure structure;
  std::vector<PbTable> tables;  // rows normalized to distributions
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

namespace internal {

inline std::size_t parent_config_count(const PbNode& n, const Schema& s) {
  std::size_t rows = 1;
  for (int p : n.parents) rows *= s.domain_size(static_cast<std::size_t>(p));
  return rows;
}

inline std::size_t parent_config_index(const PbNode& n, const Schema& s,
                                       const Record& r) {
  std::size_t idx = 0;
  for (int p : n.parents) {
    idx = idx * s.domain_size(static_cast<std::size_t>(p)) +
          static_cast<std::size_t>(r.values[static_cast<std::size_t>(p)]);
  }
  return idx;
}

// Clamp negatives, renormalize each row; rows with no mass fall back to
// uniform. Clamping is post-processing and leaves the DP budget untouched.
inline void project_rows_to_distributions(PbTable& t) {
  for (std::size_t row = 0; row < t.rows; ++row) {
    double sum = 0.0;
    for (std::size_t c = 0; c < t.cols; ++c) {
      double& v = t.cells[row * t.cols + c];
      if (v < 0.0) v = 0.0;
      sum += v;
    }
    if (sum > 0.0) {
      for (std::size_t c = 0; c < t.cols; ++c) t.cells[row * t.cols + c] /= sum;
    } else {
      for (std::size_t c = 0; c < t.cols; ++c) {
        t.cells[row * t.cols + c] = 1.0 / static_cast<double>(t.cols);
      }
    }
  }
}

}  // namespace internal

// Exact (noise-free) conditional counts for each structure node.
inline std::vector<PbTable> pb_exact_counts(const Dataset& d, const Schema& s,
                                            const PbStructure& st) {
  std::vector<PbTable> tables;
  for (const PbNode& n : st) {
    PbTable t;
    t.rows = internal::parent_config_count(n, s);
    t.cols = s.domain_size(static_cast<std::size_t>(n.attr));
    t.cells.assign(t.rows * t.cols, 0.0);
    for (const Record& r : d.rows) {
      std::size_t row = internal::parent_config_index(n, s, r);
      std::size_t col =
          static_cast<std::size_t>(r.values[static_cast<std::size_t>(n.attr)]);
      t.cells[row * t.cols + col] += 1.0;
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

// Exact conditional distributions (counts projected row-wise), the
// reference point for white-box error features and test oracles.
inline std::vector<PbTable> pb_exact_tables(const Dataset& d, const Schema& s,
                                            const PbStructure& st) {
  std::vector<PbTable> tables = pb_exact_counts(d, s, st);
  for (PbTable& t : tables) internal::project_rows_to_distributions(t);
  return tables;
}

// Measurement stage: exact counts plus i.i.d. Laplace(2k/eps * noise_scale)
// per cell, in canonical cell order. Edit-DP sensitivity is 2 per table and
// the budget splits evenly across the k tables. noise_scale is 1 except
// under the halved-noise bug.
inline std::vector<PbTable> pb_noisy_counts(const Dataset& d, const Schema& s,
                                            const PbStructure& st, double eps,
                                            Rng& rng,
                                            double noise_scale = 1.0) {
  std::vector<PbTable> tables = pb_exact_counts(d, s, st);
  double k = static_cast<double>(st.size());
  double scale = (2.0 * k / eps) * noise_scale;
  for (PbTable& t : tables) {
    for (double& cell : t.cells) cell += rng.laplace(scale);
  }
  return tables;
}

inline PbModel pb_fit(const Dataset& d, SchemaPtr s, double eps,
                      const PbStructure& structure, std::uint64_t seed,
                      double noise_scale = 1.0) {
  if (!(eps > 0.0)) throw std::invalid_argument("pb_fit: eps must be > 0");
  validate_structure(structure, *s);
  Rng rng(seed);
  PbModel m;
  m.schema = std::move(s);
  m.structure = structure;
  m.tables = pb_noisy_counts(d, *m.schema, structure, eps, rng, noise_scale);
  for (PbTable& t : m.tables) internal::project_rows_to_distributions(t);
  m.epsilon = eps;
  m.seed = seed;
  return m;
}

inline Dataset pb_sample(const PbModel& m, std::size_t n_out,
                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Record> rows;
  rows.reserve(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    Record r;
    r.values.assign(m.schema->attr_count(), 0);
    for (std::size_t node = 0; node < m.structure.size(); ++node) {
      const PbNode& n = m.structure[node];
      const PbTable& t = m.tables[node];
      std::size_t row = internal::parent_config_index(n, *m.schema, r);
      double u = rng.uniform();
      double acc = 0.0;
      std::int32_t pick = static_cast<std::int32_t>(t.cols) - 1;
      for (std::size_t c = 0; c < t.cols; ++c) {
        acc += t.cells[row * t.cols + c];
        if (u < acc) {
          pick = static_cast<std::int32_t>(c);
          break;
        }
      }
      r.values[static_cast<std::size_t>(n.attr)] = pick;
    }
    rows.push_back(std::move(r));
  }
  return Dataset(m.schema, std::move(rows));
}

inline nlohmann::ordered_json pb_to_json(const PbModel& m) {
  nlohmann::ordered_json j;
  j["kind"] = "privbayes";
  j["epsilon"] = m.epsilon;
  j["seed"] = m.seed;
  j["schema"] = m.schema->to_json();
  nlohmann::ordered_json st = nlohmann::ordered_json::array();
  for (const PbNode& n : m.structure) {
    st.push_back({{"attr", n.attr}, {"parents", n.parents}});
  }
  j["structure"] = st;
  nlohmann::ordered_json tables = nlohmann::ordered_json::array();
  for (const PbTable& t : m.tables) {
    tables.push_back({{"rows", t.rows}, {"cols", t.cols}, {"cells", t.cells}});
  }
  j["tables"] = tables;
  return j;
}

inline PbModel pb_from_json(const nlohmann::json& j) {
  PbModel m;
  m.epsilon = j.at("epsilon").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.schema = std::make_shared<const Schema>(Schema::from_json(j.at("schema")));
  for (const auto& n : j.at("structure")) {
    m.structure.push_back(PbNode{n.at("attr").get<int>(),
                                 n.at("parents").get<std::vector<int>>()});
  }
  for (const auto& t : j.at("tables")) {
    PbTable table;
    table.rows = t.at("rows").get<std::size_t>();
    table.cols = t.at("cols").get<std::size_t>();
    table.cells = t.at("cells").get<std::vector<double>>();
    if (table.cells.size() != table.rows * table.cols) {
      throw std::invalid_argument("privbayes model: table shape mismatch");
    }
    m.tables.push_back(std::move(table));
  }
  return m;
}

}  // namespace dpaudit

#endif  // DPAUDIT_PRIVBAYES_HPP_
