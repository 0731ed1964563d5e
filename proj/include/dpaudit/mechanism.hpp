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

#ifndef DPAUDIT_MECHANISM_HPP_
#define DPAUDIT_MECHANISM_HPP_

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dpaudit/core.hpp"
#include "dpaudit/gan.hpp"
#include "dpaudit/mst.hpp"
#include "dpaudit/privbayes.hpp"

namespace dpaudit {

enum class MechKind { kPrivBayes, kMst, kGan };

inline std::string mech_name(MechKind k) {
  switch (k) {
    case MechKind::kPrivBayes: return "privbayes";
    case MechKind::kMst: return "mst";
    case MechKind::kGan: return "gan";
  }
  return "?";
}

inline MechKind mech_from_name(const std::string& s) {
  if (s == "privbayes") return MechKind::kPrivBayes;
  if (s == "mst") return MechKind::kMst;
  if (s == "gan") return MechKind::kGan;
  throw std::invalid_argument("unknown mechanism: " + s);
}

enum class BugKind {
  kMetadataInference,
  kPrngReuse,
  kNoiseScaleHalved,
  kEarlyStopDataDependent,
};

inline std::string bug_name(BugKind k) {
  switch (k) {
    case BugKind::kMetadataInference: return "metadata_inference";
    case BugKind::kPrngReuse: return "prng_reuse";
    case BugKind::kNoiseScaleHalved: return "noise_scale_halved";
    case BugKind::kEarlyStopDataDependent: return "early_stop_data_dependent";
  }
  return "?";
}

inline BugKind bug_from_name(const std::string& s) {
  if (s == "metadata_inference") return BugKind::kMetadataInference;
  if (s == "prng_reuse") return BugKind::kPrngReuse;
  if (s == "noise_scale_halved") return BugKind::kNoiseScaleHalved;
  if (s == "early_stop_data_dependent") return BugKind::kEarlyStopDataDependent;
  throw std::invalid_argument("unknown bug kind: " + s);
}

struct BugSpec {
  BugKind kind;
};

// The constant every random stream collapses to under the PRNG-reuse bug.
inline constexpr std::uint64_t kReusedSeed = 0x5eed5eed5eed5eedULL;

struct MechanismConfig {
  MechKind kind = MechKind::kPrivBayes;
  double epsilon = 1.0;
  double delta = 0.0;                // mst/gan only
  PbStructure structure;             // privbayes; empty selects the chain
  std::vector<Clique> cliques;       // mst; empty selects the chain
  GanHyper gan;
  std::optional<BugSpec> bug;
  std::size_t min_dminus = 2;        // worst-case |D^-| floor
};

inline bool bug_applicable(BugKind bug, MechKind mech) {
  if (bug == BugKind::kEarlyStopDataDependent) return mech == MechKind::kGan;
  return true;
}

inline MechanismConfig inject_bug(const MechanismConfig& cfg,
                                  const BugSpec& bug) {
  if (!bug_applicable(bug.kind, cfg.kind)) {
    throw std::invalid_argument("bug '" + bug_name(bug.kind) +
                                "' does not apply to mechanism '" +
                                mech_name(cfg.kind) + "'");
  }
  MechanismConfig out = cfg;
  out.bug = bug;
  return out;
}

using GenModel = std::variant<PbModel, MstModel, GanModel>;

inline const Schema& model_schema(const GenModel& m) {
  return *std::visit([](const auto& v) { return v.schema; }, m);
}

inline MechKind model_kind(const GenModel& m) {
  if (std::holds_alternative<PbModel>(m)) return MechKind::kPrivBayes;
  if (std::holds_alternative<MstModel>(m)) return MechKind::kMst;
  return MechKind::kGan;
}

namespace internal {

inline bool has_bug(const MechanismConfig& cfg, BugKind k) {
  return cfg.bug.has_value() && cfg.bug->kind == k;
}

}  // namespace internal

// Fits one generative model on d, applying whatever violation the config
// plants: metadata inference swaps the schema for one read off the data,
// PRNG reuse pins every seed to a constant, the noise bug halves the
// mechanism's noise scale, and the early-stopping bug makes the GAN's
// iteration count a function of |d|.
inline GenModel fit_model(const MechanismConfig& cfg, const Dataset& d,
                          std::uint64_t seed,
                          TrainObserver* observer = nullptr) {
  std::uint64_t fit_seed =
      internal::has_bug(cfg, BugKind::kPrngReuse) ? kReusedSeed : seed;
  double noise_scale =
      internal::has_bug(cfg, BugKind::kNoiseScaleHalved) ? 0.5 : 1.0;

  SchemaPtr schema = d.schema;
  const Dataset* data = &d;
  std::optional<Dataset> reencoded;
  if (internal::has_bug(cfg, BugKind::kMetadataInference)) {
    auto inferred =
        std::make_shared<const Schema>(infer_metadata(to_raw_table(d)));
    reencoded = dataset_from_raw_table(to_raw_table(d), inferred);
    schema = inferred;
    data = &*reencoded;
  }

  switch (cfg.kind) {
    case MechKind::kPrivBayes: {
      PbStructure st =
          cfg.structure.empty() ? default_chain_structure(*schema)
                                : cfg.structure;
      return pb_fit(*data, schema, cfg.epsilon, st, fit_seed, noise_scale);
    }
    case MechKind::kMst: {
      std::vector<Clique> cl =
          cfg.cliques.empty() ? default_chain_cliques(*schema) : cfg.cliques;
      return mst_fit(*data, schema, cfg.epsilon, cfg.delta, cl, fit_seed,
                     noise_scale);
    }
    case MechKind::kGan: {
      GanHyper hyper = cfg.gan;
      if (internal::has_bug(cfg, BugKind::kEarlyStopDataDependent)) {
        hyper.iters = std::min<std::size_t>(hyper.iters,
                                            std::max<std::size_t>(
                                                1, data->rows.size()));
      }
      return gan_fit(*data, schema, cfg.epsilon, cfg.delta, hyper, fit_seed,
                     observer, noise_scale);
    }
  }
  throw std::logic_error("fit_model: unreachable");
}

// Samples a synthetic dataset under the model's own schema.
inline Dataset sample_model(const MechanismConfig& cfg, const GenModel& m,
                            std::size_t n_out, std::uint64_t seed) {
  std::uint64_t sample_seed =
      internal::has_bug(cfg, BugKind::kPrngReuse) ? kReusedSeed : seed;
  return std::visit(
      [&](const auto& model) -> Dataset {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, PbModel>) {
          return pb_sample(model, n_out, sample_seed);
        } else if constexpr (std::is_same_v<T, MstModel>) {
          return mst_sample(model, n_out, sample_seed);
        } else {
          return gan_sample(model, n_out, sample_seed);
        }
      },
      m);
}

inline nlohmann::ordered_json model_to_json(const GenModel& m) {
  return std::visit(
      [](const auto& model) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, PbModel>) {
          return pb_to_json(model);
        } else if constexpr (std::is_same_v<T, MstModel>) {
          return mst_to_json(model);
        } else {
          return gan_to_json(model);
        }
      },
      m);
}

inline GenModel model_from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "privbayes") return pb_from_json(j);
  if (kind == "mst") return mst_from_json(j);
  if (kind == "gan") return gan_from_json(j);
  throw std::invalid_argument("unknown model kind: " + kind);
}

inline void save_model_json(const GenModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json(m).dump() << "\n";
}

inline GenModel load_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace dpaudit

#endif  // DPAUDIT_MECHANISM_HPP_
