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

#ifndef DPAUDIT_MST_HPP_
#define DPAUDIT_MST_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dpaudit/core.hpp"
#include "dpaudit/estimator.hpp"
#include "dpaudit/rng.hpp"

namespace dpaudit {

// A measured marginal: one attribute (singleton) or an attribute pair.
using Clique = std::vector<int>;

inline std::vector<Clique> default_chain_cliques(const Schema& s) {
  std::vector<Clique> cliques;
  cliques.push_back(Clique{0});
  for (std::size_t a = 1; a < s.attr_count(); ++a) {
    cliques.push_back(Clique{static_cast<int>(a - 1), static_cast<int>(a)});
  }
  return cliques;
}

// Marginal-based model. Noisy measurements are kept raw (negatives and all);
// projection to distributions happens only at sampling time.
struct MstModel {
  SchemaPtr schema;
  std::vector<Clique> cliques;
  std::vector<std::vector<double>> noisy_marginals;
  double sigma = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

namespace internal {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      x = parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    }
    return x;
  }
  // Returns false when x and y were already connected.
  bool unite(int x, int y) {
    int rx = find(x), ry = find(y);
    if (rx == ry) return false;
    parent[static_cast<std::size_t>(rx)] = ry;
    return true;
  }
};

}  // namespace internal

inline void validate_cliques(const std::vector<Clique>& cliques,
                             const Schema& s) {
  if (cliques.empty()) throw std::invalid_argument("mst: no cliques given");
  std::set<int> used;
  internal::UnionFind uf(s.attr_count());
  for (const Clique& c : cliques) {
    if (c.empty() || c.size() > 2) {
      throw std::invalid_argument("mst: cliques must be singletons or pairs");
    }
    for (int a : c) {
      if (a < 0 || static_cast<std::size_t>(a) >= s.attr_count()) {
        throw std::invalid_argument("mst: clique references unknown attribute");
      }
      used.insert(a);
    }
    if (c.size() == 2) {
      if (c[0] == c[1]) {
        throw std::invalid_argument("mst: degenerate pair clique");
      }
      if (!uf.unite(c[0], c[1])) {
        throw std::invalid_argument("mst: cyclic cliques");
      }
    }
  }
  if (used.size() != s.attr_count()) {
    throw std::invalid_argument("mst: cliques must cover every attribute");
  }
  int root = uf.find(*used.begin());
  for (int a : used) {
    if (uf.find(a) != root) {
      throw std::invalid_argument("mst: clique tree is disconnected");
    }
  }
}

// Exact clique marginals as flat count tables (first attribute slowest).
inline std::vector<std::vector<double>> mst_exact_marginals(
    const Dataset& d, const Schema& s, const std::vector<Clique>& cliques) {
  std::vector<std::vector<double>> out;
  for (const Clique& c : cliques) {
    std::size_t cells = 1;
    for (int a : c) cells *= s.domain_size(static_cast<std::size_t>(a));
    std::vector<double> table(cells, 0.0);
    for (const Record& r : d.rows) {
      std::size_t idx = 0;
      for (int a : c) {
        idx = idx * s.domain_size(static_cast<std::size_t>(a)) +
              static_cast<std::size_t>(r.values[static_cast<std::size_t>(a)]);
      }
      table[idx] += 1.0;
    }
    out.push_back(std::move(table));
  }
  return out;
}

// Gaussian measurement of each clique marginal. The budget target mu solves
// gdp_delta_of_eps(mu, eps) = delta; with k orthogonal measurements at
// add/remove L2 sensitivity 1 each, per-clique noise is sigma = sqrt(k)/mu.
inline MstModel mst_fit(const Dataset& d, SchemaPtr s, double eps,
                        double delta, const std::vector<Clique>& cliques,
                        std::uint64_t seed, double noise_scale = 1.0) {
  if (!(eps > 0.0)) throw std::invalid_argument("mst_fit: eps must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("mst_fit: delta must be in (0,1)");
  }
  validate_cliques(cliques, *s);
  double mu = mu_for_eps_delta(eps, delta);
  double sigma = std::sqrt(static_cast<double>(cliques.size())) / mu;
  sigma *= noise_scale;
  Rng rng(seed);
  MstModel m;
  m.schema = std::move(s);
  m.cliques = cliques;
  m.noisy_marginals = mst_exact_marginals(d, *m.schema, cliques);
  for (auto& table : m.noisy_marginals) {
    for (double& cell : table) cell += rng.gaussian(0.0, sigma);
  }
  m.sigma = sigma;
  m.epsilon = eps;
  m.delta = delta;
  m.seed = seed;
  return m;
}

namespace internal {

inline std::vector<double> project_to_distribution(std::vector<double> t) {
  double sum = 0.0;
  for (double& v : t) {
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (sum > 0.0) {
    for (double& v : t) v /= sum;
  } else {
    for (double& v : t) v = 1.0 / static_cast<double>(t.size());
  }
  return t;
}

inline std::int32_t sample_categorical(const std::vector<double>& probs,
                                       Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<std::int32_t>(i);
  }
  return static_cast<std::int32_t>(probs.size()) - 1;
}

}  // namespace internal

// Ancestral sampling over the clique tree: the root attribute comes from its
// singleton marginal (or a projected pair marginal when no singleton names
// it), children from per-edge conditionals.
inline Dataset mst_sample(const MstModel& m, std::size_t n_out,
                          std::uint64_t seed) {
  const Schema& s = *m.schema;
  // Projected sampling tables.
  std::vector<std::vector<double>> dist;
  for (const auto& t : m.noisy_marginals) {
    dist.push_back(internal::project_to_distribution(t));
  }
  // Root selection: first singleton clique if any, else first attribute of
  // the first clique with its marginal summed out of that pair table.
  int root = -1;
  std::vector<double> root_marginal;
  for (std::size_t i = 0; i < m.cliques.size(); ++i) {
    if (m.cliques[i].size() == 1) {
      root = m.cliques[i][0];
      root_marginal = dist[i];
      break;
    }
  }
  if (root < 0) {
    const Clique& c = m.cliques[0];
    root = c[0];
    std::size_t da = s.domain_size(static_cast<std::size_t>(c[0]));
    std::size_t db = s.domain_size(static_cast<std::size_t>(c[1]));
    root_marginal.assign(da, 0.0);
    for (std::size_t i = 0; i < da; ++i) {
      for (std::size_t j = 0; j < db; ++j) {
        root_marginal[i] += dist[0][i * db + j];
      }
    }
  }
  // Edge adjacency: attr -> (neighbor attr, clique index).
  std::vector<std::vector<std::pair<int, std::size_t>>> adj(s.attr_count());
  for (std::size_t i = 0; i < m.cliques.size(); ++i) {
    if (m.cliques[i].size() == 2) {
      adj[static_cast<std::size_t>(m.cliques[i][0])].push_back(
          {m.cliques[i][1], i});
      adj[static_cast<std::size_t>(m.cliques[i][1])].push_back(
          {m.cliques[i][0], i});
    }
  }
  // BFS order from the root.
  struct Step {
    int attr;
    int parent;           // -1 for root
    std::size_t clique;   // edge table joining attr and parent
  };
  std::vector<Step> order;
  std::vector<bool> visited(s.attr_count(), false);
  std::queue<int> q;
  q.push(root);
  visited[static_cast<std::size_t>(root)] = true;
  order.push_back(Step{root, -1, 0});
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (auto [v, ci] : adj[static_cast<std::size_t>(u)]) {
      if (visited[static_cast<std::size_t>(v)]) continue;
      visited[static_cast<std::size_t>(v)] = true;
      order.push_back(Step{v, u, ci});
      q.push(v);
    }
  }

  Rng rng(seed);
  std::vector<Record> rows;
  rows.reserve(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    Record r;
    r.values.assign(s.attr_count(), 0);
    for (const Step& step : order) {
      if (step.parent < 0) {
        r.values[static_cast<std::size_t>(step.attr)] =
            internal::sample_categorical(root_marginal, rng);
        continue;
      }
      const Clique& c = m.cliques[step.clique];
      std::size_t d0 = s.domain_size(static_cast<std::size_t>(c[0]));
      std::size_t d1 = s.domain_size(static_cast<std::size_t>(c[1]));
      std::size_t parent_val = static_cast<std::size_t>(
          r.values[static_cast<std::size_t>(step.parent)]);
      bool parent_first = (c[0] == step.parent);
      std::size_t child_dom = parent_first ? d1 : d0;
      std::vector<double> cond(child_dom, 0.0);
      for (std::size_t v = 0; v < child_dom; ++v) {
        std::size_t idx = parent_first ? parent_val * d1 + v : v * d1 +
                                                                   parent_val;
        cond[v] = dist[step.clique][idx];
      }
      cond = internal::project_to_distribution(std::move(cond));
      r.values[static_cast<std::size_t>(step.attr)] =
          internal::sample_categorical(cond, rng);
    }
    rows.push_back(std::move(r));
  }
  return Dataset(m.schema, std::move(rows));
}

inline nlohmann::ordered_json mst_to_json(const MstModel& m) {
  nlohmann::ordered_json j;
  j["kind"] = "mst";
  j["epsilon"] = m.epsilon;
  j["delta"] = m.delta;
  j["sigma"] = m.sigma;
  j["seed"] = m.seed;
  j["schema"] = m.schema->to_json();
  j["cliques"] = m.cliques;
  nlohmann::ordered_json marginals = nlohmann::ordered_json::array();
  for (const auto& t : m.noisy_marginals) {
    marginals.push_back({{"cells", t}});
  }
  j["marginals"] = marginals;
  return j;
}

inline MstModel mst_from_json(const nlohmann::json& j) {
  MstModel m;
  m.epsilon = j.at("epsilon").get<double>();
  m.delta = j.at("delta").get<double>();
  m.sigma = j.at("sigma").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.schema = std::make_shared<const Schema>(Schema::from_json(j.at("schema")));
  m.cliques = j.at("cliques").get<std::vector<Clique>>();
  for (const auto& t : j.at("marginals")) {
    m.noisy_marginals.push_back(t.at("cells").get<std::vector<double>>());
  }
  return m;
}

}  // namespace dpaudit

#endif  // DPAUDIT_MST_HPP_
