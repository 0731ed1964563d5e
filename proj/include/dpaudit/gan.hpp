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

#ifndef DPAUDIT_GAN_HPP_
#define DPAUDIT_GAN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dpaudit/core.hpp"
#include "dpaudit/estimator.hpp"
#include "dpaudit/rng.hpp"

namespace dpaudit {

struct GanHyper {
  double learning_rate = 0.02;  // alpha
  double weight_clip = 0.25;    // c, elementwise critic clamp after each step
  std::size_t batch = 4;        // L, examples per critic step (drawn i.i.d.)
  std::size_t n_critic = 5;     // critic steps per generator step
  double sigma = 0.0;           // only read in plain-SGD test mode
  double grad_bound = 1.0;      // c_p, per-example gradient norm bound
  std::size_t iters = 10;       // T, generator iterations
  std::size_t hidden = 16;
  std::size_t latent = 8;
  double sigma_cap = 1e6;
  // Test fixture mode: RMSProp bypassed (plain SGD), sigma taken verbatim
  // (zero allowed), generator-sample gradients zeroed. Never used in
  // audited runs; it exists to make the canary arithmetic exactly checkable.
  bool plain_sgd_test_mode = false;
};

struct GanStep {
  std::vector<double> w_start;
  std::vector<double> w_after;
};

struct GanModel {
  SchemaPtr schema;
  GanHyper hyper;
  std::vector<double> gen_params;
  std::vector<double> critic_params;
  std::vector<GanStep> transcript;  // one entry per critic step
  double accountant_mu = 0.0;       // sqrt(total critic steps) / sigma
  double sigma = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

// Receives the per-example critic gradients before clipping (and may rewrite
// them) plus the critic parameters around every critic step. This hook is
// the active-adversary surface: a canary attack is an observer.
class TrainObserver {
 public:
  virtual ~TrainObserver() = default;
  virtual void real_gradient(const Schema& /*schema*/, const Record& /*row*/,
                             std::vector<double>& /*grad*/) {}
  virtual void critic_step(const std::vector<double>& /*w_start*/,
                           const std::vector<double>& /*w_after*/) {}
};

namespace internal {

// Critic: scalar f(x) = V2 . tanh(V1^T x + c1) + c2.
// Parameter layout: [V1 (X*H), c1 (H), V2 (H), c2 (1)].
struct CriticShape {
  std::size_t in = 0;
  std::size_t hidden = 0;
  std::size_t dim() const { return in * hidden + hidden + hidden + 1; }
  std::size_t v1(std::size_t a, std::size_t j) const { return a * hidden + j; }
  std::size_t c1(std::size_t j) const { return in * hidden + j; }
  std::size_t v2(std::size_t j) const { return in * hidden + hidden + j; }
  std::size_t c2() const { return in * hidden + 2 * hidden; }
};

// Generator: o = W2^T tanh(W1^T z + b1) + b2.
// Parameter layout: [W1 (Z*H), b1 (H), W2 (H*X), b2 (X)].
struct GenShape {
  std::size_t latent = 0;
  std::size_t hidden = 0;
  std::size_t out = 0;
  std::size_t dim() const {
    return latent * hidden + hidden + hidden * out + out;
  }
  std::size_t w1(std::size_t z, std::size_t j) const { return z * hidden + j; }
  std::size_t b1(std::size_t j) const { return latent * hidden + j; }
  std::size_t w2(std::size_t j, std::size_t x) const {
    return latent * hidden + hidden + j * out + x;
  }
  std::size_t b2(std::size_t x) const {
    return latent * hidden + hidden + hidden * out + x;
  }
};

inline double critic_forward(const std::vector<double>& w,
                             const CriticShape& cs,
                             const std::vector<double>& x,
                             std::vector<double>* hidden_out = nullptr) {
  std::vector<double> h(cs.hidden);
  for (std::size_t j = 0; j < cs.hidden; ++j) {
    double pre = w[cs.c1(j)];
    for (std::size_t a = 0; a < cs.in; ++a) {
      if (x[a] != 0.0) pre += x[a] * w[cs.v1(a, j)];
    }
    h[j] = std::tanh(pre);
  }
  double f = w[cs.c2()];
  for (std::size_t j = 0; j < cs.hidden; ++j) f += w[cs.v2(j)] * h[j];
  if (hidden_out) *hidden_out = std::move(h);
  return f;
}

// Gradient of the critic output with respect to the critic parameters.
inline std::vector<double> critic_grad(const std::vector<double>& w,
                                       const CriticShape& cs,
                                       const std::vector<double>& x) {
  std::vector<double> h;
  critic_forward(w, cs, x, &h);
  std::vector<double> g(cs.dim(), 0.0);
  for (std::size_t j = 0; j < cs.hidden; ++j) {
    double dpre = w[cs.v2(j)] * (1.0 - h[j] * h[j]);
    g[cs.c1(j)] = dpre;
    g[cs.v2(j)] = h[j];
    for (std::size_t a = 0; a < cs.in; ++a) {
      if (x[a] != 0.0) g[cs.v1(a, j)] = x[a] * dpre;
    }
  }
  g[cs.c2()] = 1.0;
  return g;
}

// Gradient of the critic output with respect to the critic input.
inline std::vector<double> critic_input_grad(const std::vector<double>& w,
                                             const CriticShape& cs,
                                             const std::vector<double>& x) {
  std::vector<double> h;
  critic_forward(w, cs, x, &h);
  std::vector<double> g(cs.in, 0.0);
  for (std::size_t j = 0; j < cs.hidden; ++j) {
    double dpre = w[cs.v2(j)] * (1.0 - h[j] * h[j]);
    for (std::size_t a = 0; a < cs.in; ++a) g[a] += w[cs.v1(a, j)] * dpre;
  }
  return g;
}

inline std::vector<double> gen_forward(const std::vector<double>& theta,
                                       const GenShape& gs,
                                       const std::vector<double>& z,
                                       std::vector<double>* hidden_out =
                                           nullptr) {
  std::vector<double> h(gs.hidden);
  for (std::size_t j = 0; j < gs.hidden; ++j) {
    double pre = theta[gs.b1(j)];
    for (std::size_t k = 0; k < gs.latent; ++k) {
      pre += z[k] * theta[gs.w1(k, j)];
    }
    h[j] = std::tanh(pre);
  }
  std::vector<double> o(gs.out);
  for (std::size_t x = 0; x < gs.out; ++x) {
    double v = theta[gs.b2(x)];
    for (std::size_t j = 0; j < gs.hidden; ++j) v += h[j] * theta[gs.w2(j, x)];
    o[x] = v;
  }
  if (hidden_out) *hidden_out = std::move(h);
  return o;
}

// Accumulates d f_w(G(z)) / d theta into g_theta.
inline void accumulate_gen_grad(const std::vector<double>& theta,
                                const GenShape& gs,
                                const std::vector<double>& z,
                                const std::vector<double>& df_dout,
                                std::vector<double>& g_theta) {
  std::vector<double> h;
  gen_forward(theta, gs, z, &h);
  std::vector<double> dh(gs.hidden, 0.0);
  for (std::size_t x = 0; x < gs.out; ++x) {
    double d = df_dout[x];
    if (d == 0.0) continue;
    g_theta[gs.b2(x)] += d;
    for (std::size_t j = 0; j < gs.hidden; ++j) {
      g_theta[gs.w2(j, x)] += d * h[j];
      dh[j] += d * theta[gs.w2(j, x)];
    }
  }
  for (std::size_t j = 0; j < gs.hidden; ++j) {
    double dpre = dh[j] * (1.0 - h[j] * h[j]);
    g_theta[gs.b1(j)] += dpre;
    for (std::size_t k = 0; k < gs.latent; ++k) {
      g_theta[gs.w1(k, j)] += dpre * z[k];
    }
  }
}

inline void clip_to_norm(std::vector<double>& g, double bound) {
  double sq = 0.0;
  for (double v : g) sq += v * v;
  double norm = std::sqrt(sq);
  if (norm > bound) {
    double scale = bound / norm;
    for (double& v : g) v *= scale;
  }
}

// RMSProp with running average decay 0.9; returns the normalized gradient.
inline void rmsprop_apply(std::vector<double>& state,
                          const std::vector<double>& g,
                          std::vector<double>& out) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    state[i] = 0.9 * state[i] + 0.1 * g[i] * g[i];
    out[i] = g[i] / (std::sqrt(state[i]) + 1e-8);
  }
}

inline std::vector<double> init_params(std::size_t dim, double scale,
                                       Rng& rng) {
  std::vector<double> p(dim);
  for (double& v : p) v = rng.uniform(-scale, scale);
  return p;
}

}  // namespace internal

// Wasserstein-style critic/generator training with per-example gradient
// clipping, Gaussian noise on the real-gradient sum, RMSProp updates, and
// elementwise critic weight clipping. Noise only touches the real-data term;
// generator-sample gradients are clipped but released unnoised.
inline GanModel gan_fit(const Dataset& d, SchemaPtr s, double eps,
                        double delta, const GanHyper& hyper,
                        std::uint64_t seed, TrainObserver* observer = nullptr,
                        double noise_scale = 1.0) {
  if (d.rows.empty()) throw std::invalid_argument("gan_fit: empty dataset");
  if (hyper.batch == 0 || hyper.batch > d.rows.size()) {
    throw std::invalid_argument("gan_fit: batch must be in [1, |d|]");
  }
  if (hyper.iters == 0 || hyper.n_critic == 0) {
    throw std::invalid_argument("gan_fit: iters and n_critic must be >= 1");
  }
  const std::size_t total_steps = hyper.iters * hyper.n_critic;
  double sigma;
  if (hyper.plain_sgd_test_mode) {
    sigma = hyper.sigma;
  } else {
    if (!(eps > 0.0)) throw std::invalid_argument("gan_fit: eps must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) {
      throw std::invalid_argument("gan_fit: delta must be in (0,1)");
    }
    double mu_target = mu_for_eps_delta(eps, delta);
    sigma = std::sqrt(static_cast<double>(total_steps)) / mu_target;
    if (sigma > hyper.sigma_cap) {
      throw std::invalid_argument(
          "gan_fit: budget unsatisfiable, required sigma exceeds cap");
    }
  }
  sigma *= noise_scale;

  const internal::CriticShape cs{s->one_hot_dim(), hyper.hidden};
  const internal::GenShape gs{hyper.latent, hyper.hidden, s->one_hot_dim()};

  Rng rng(seed);
  GanModel m;
  m.schema = s;
  m.hyper = hyper;
  m.sigma = sigma;
  m.epsilon = eps;
  m.delta = delta;
  m.seed = seed;
  m.critic_params = internal::init_params(
      cs.dim(), 0.5 / std::sqrt(static_cast<double>(cs.in)), rng);
  m.gen_params = internal::init_params(
      gs.dim(), 0.5 / std::sqrt(static_cast<double>(gs.latent)), rng);

  std::vector<std::vector<double>> onehot;
  onehot.reserve(d.rows.size());
  for (const Record& r : d.rows) onehot.push_back(encode_one_hot(r, *s));

  std::vector<double> r_critic(cs.dim(), 0.0), r_gen(gs.dim(), 0.0);
  std::vector<double> update(cs.dim());
  const double cp = hyper.grad_bound;
  const double alpha = hyper.learning_rate;

  for (std::size_t t = 0; t < hyper.iters; ++t) {
    for (std::size_t i = 0; i < hyper.n_critic; ++i) {
      std::vector<double> w_start = m.critic_params;
      // Real batch, i.i.d. with replacement.
      std::vector<std::size_t> batch(hyper.batch);
      for (std::size_t& idx : batch) idx = rng.uniform_index(d.rows.size());
      std::vector<double> real_sum(cs.dim(), 0.0);
      for (std::size_t idx : batch) {
        std::vector<double> g =
            internal::critic_grad(m.critic_params, cs, onehot[idx]);
        if (observer) observer->real_gradient(*s, d.rows[idx], g);
        internal::clip_to_norm(g, cp);
        for (std::size_t p = 0; p < g.size(); ++p) real_sum[p] += g[p];
      }
      // Generator-sample gradients.
      std::vector<double> fake_sum(cs.dim(), 0.0);
      for (std::size_t j = 0; j < hyper.batch; ++j) {
        std::vector<double> z(gs.latent);
        for (double& v : z) v = rng.gaussian();
        if (hyper.plain_sgd_test_mode) continue;
        std::vector<double> o = internal::gen_forward(m.gen_params, gs, z);
        std::vector<double> g = internal::critic_grad(m.critic_params, cs, o);
        internal::clip_to_norm(g, cp);
        for (std::size_t p = 0; p < g.size(); ++p) fake_sum[p] += g[p];
      }
      // Noise the real-gradient sum, form the step.
      double inv_l = 1.0 / static_cast<double>(hyper.batch);
      std::vector<double> g_tilde(cs.dim());
      for (std::size_t p = 0; p < cs.dim(); ++p) {
        double noise = sigma > 0.0 ? rng.gaussian(0.0, sigma * cp) : 0.0;
        g_tilde[p] = inv_l * (real_sum[p] + noise) - inv_l * fake_sum[p];
      }
      if (hyper.plain_sgd_test_mode) {
        for (std::size_t p = 0; p < cs.dim(); ++p) {
          m.critic_params[p] += alpha * g_tilde[p];
        }
      } else {
        internal::rmsprop_apply(r_critic, g_tilde, update);
        for (std::size_t p = 0; p < cs.dim(); ++p) {
          m.critic_params[p] += alpha * update[p];
        }
      }
      for (double& w : m.critic_params) {
        w = std::clamp(w, -hyper.weight_clip, hyper.weight_clip);
      }
      m.transcript.push_back(GanStep{std::move(w_start), m.critic_params});
      if (observer) {
        observer->critic_step(m.transcript.back().w_start,
                              m.transcript.back().w_after);
      }
    }
    // Generator step.
    std::vector<double> g_theta(gs.dim(), 0.0);
    for (std::size_t j = 0; j < hyper.batch; ++j) {
      std::vector<double> z(gs.latent);
      for (double& v : z) v = rng.gaussian();
      std::vector<double> o = internal::gen_forward(m.gen_params, gs, z);
      std::vector<double> dfo =
          internal::critic_input_grad(m.critic_params, cs, o);
      internal::accumulate_gen_grad(m.gen_params, gs, z, dfo, g_theta);
    }
    double neg_inv_l = -1.0 / static_cast<double>(hyper.batch);
    for (double& v : g_theta) v *= neg_inv_l;
    if (hyper.plain_sgd_test_mode) {
      for (std::size_t p = 0; p < gs.dim(); ++p) {
        m.gen_params[p] -= alpha * g_theta[p];
      }
    } else {
      std::vector<double> gen_update(gs.dim());
      internal::rmsprop_apply(r_gen, g_theta, gen_update);
      for (std::size_t p = 0; p < gs.dim(); ++p) {
        m.gen_params[p] -= alpha * gen_update[p];
      }
    }
  }
  m.accountant_mu =
      sigma > 0.0
          ? std::sqrt(static_cast<double>(m.transcript.size())) / sigma
          : std::numeric_limits<double>::infinity();
  return m;
}

// Critic forward pass on a one-hot encoded record.
inline double gan_critic_score(const GanModel& m,
                               const std::vector<double>& onehot) {
  internal::CriticShape cs{m.schema->one_hot_dim(), m.hyper.hidden};
  return internal::critic_forward(m.critic_params, cs, onehot);
}

// Latent noise through the generator; each attribute block argmaxes to a
// category (ties to the lowest index).
inline Dataset gan_sample(const GanModel& m, std::size_t n_out,
                          std::uint64_t seed) {
  const Schema& s = *m.schema;
  internal::GenShape gs{m.hyper.latent, m.hyper.hidden, s.one_hot_dim()};
  Rng rng(seed);
  std::vector<Record> rows;
  rows.reserve(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    std::vector<double> z(gs.latent);
    for (double& v : z) v = rng.gaussian();
    std::vector<double> o = internal::gen_forward(m.gen_params, gs, z);
    Record r;
    std::size_t offset = 0;
    for (std::size_t a = 0; a < s.attr_count(); ++a) {
      std::size_t dom = s.domain_size(a);
      std::size_t best = 0;
      for (std::size_t c = 1; c < dom; ++c) {
        if (o[offset + c] > o[offset + best]) best = c;
      }
      r.values.push_back(static_cast<std::int32_t>(best));
      offset += dom;
    }
    rows.push_back(std::move(r));
  }
  return Dataset(m.schema, std::move(rows));
}

inline nlohmann::ordered_json gan_to_json(const GanModel& m) {
  nlohmann::ordered_json j;
  j["kind"] = "gan";
  j["epsilon"] = m.epsilon;
  j["delta"] = m.delta;
  j["sigma"] = m.sigma;
  j["accountant_mu"] = m.accountant_mu;
  j["seed"] = m.seed;
  j["schema"] = m.schema->to_json();
  j["hyper"] = {{"learning_rate", m.hyper.learning_rate},
                {"weight_clip", m.hyper.weight_clip},
                {"batch", m.hyper.batch},
                {"n_critic", m.hyper.n_critic},
                {"sigma", m.hyper.sigma},
                {"grad_bound", m.hyper.grad_bound},
                {"iters", m.hyper.iters},
                {"hidden", m.hyper.hidden},
                {"latent", m.hyper.latent},
                {"sigma_cap", m.hyper.sigma_cap},
                {"plain_sgd_test_mode", m.hyper.plain_sgd_test_mode}};
  j["gen_params"] = m.gen_params;
  j["critic_params"] = m.critic_params;
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const GanStep& st : m.transcript) {
    steps.push_back({{"w_start", st.w_start}, {"w_after", st.w_after}});
  }
  j["transcript"] = steps;
  return j;
}

inline GanModel gan_from_json(const nlohmann::json& j) {
  GanModel m;
  m.epsilon = j.at("epsilon").get<double>();
  m.delta = j.at("delta").get<double>();
  m.sigma = j.at("sigma").get<double>();
  m.accountant_mu = j.at("accountant_mu").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.schema = std::make_shared<const Schema>(Schema::from_json(j.at("schema")));
  const auto& h = j.at("hyper");
  m.hyper.learning_rate = h.at("learning_rate").get<double>();
  m.hyper.weight_clip = h.at("weight_clip").get<double>();
  m.hyper.batch = h.at("batch").get<std::size_t>();
  m.hyper.n_critic = h.at("n_critic").get<std::size_t>();
  m.hyper.sigma = h.at("sigma").get<double>();
  m.hyper.grad_bound = h.at("grad_bound").get<double>();
  m.hyper.iters = h.at("iters").get<std::size_t>();
  m.hyper.hidden = h.at("hidden").get<std::size_t>();
  m.hyper.latent = h.at("latent").get<std::size_t>();
  m.hyper.sigma_cap = h.at("sigma_cap").get<double>();
  m.hyper.plain_sgd_test_mode = h.at("plain_sgd_test_mode").get<bool>();
  m.gen_params = j.at("gen_params").get<std::vector<double>>();
  m.critic_params = j.at("critic_params").get<std::vector<double>>();
  for (const auto& st : j.at("transcript")) {
    m.transcript.push_back(
        GanStep{st.at("w_start").get<std::vector<double>>(),
                st.at("w_after").get<std::vector<double>>()});
  }
  return m;
}

}  // namespace dpaudit

#endif  // DPAUDIT_GAN_HPP_
