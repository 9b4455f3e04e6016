// Copyright 2026 The kacrelax Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// McKean representation of the solution: V_t = sum_j beta_{j,t} X_j over the
// leaves of a random binary tree with nu_t leaves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "kacrelax/constants.hpp"
#include "kacrelax/errors.hpp"
#include "kacrelax/initial_data.hpp"
#include "kacrelax/kernel.hpp"
#include "kacrelax/parallel.hpp"
#include "kacrelax/quadrature.hpp"
#include "kacrelax/rng.hpp"

namespace kacrelax {

inline constexpr std::uint64_t kDefaultNuCap = 10'000'000;

/// nu_t: geometric on {1, 2, ...} with success probability e^(-t).
inline std::uint64_t sample_nu(double t, Rng& rng) {
  detail::require(t >= 0.0 && std::isfinite(t), "sample_nu: t must be >= 0");
  if (t == 0.0) return 1;
  const double log_fail = std::log1p(-std::exp(-t));
  const double k = std::floor(std::log(rng.uniform_open()) / log_fail);
  if (!(k < 9.0e18)) return std::numeric_limits<std::uint64_t>::max();
  return 1 + static_cast<std::uint64_t>(k);
}

/// Binary tree stored in preorder: 1 marks an internal node, 0 a leaf.
struct TreeShape {
  std::vector<std::uint8_t> preorder{0};

  std::size_t internal_nodes() const {
    return static_cast<std::size_t>(std::count(preorder.begin(), preorder.end(), 1));
  }
  std::size_t leaves() const { return preorder.size() - internal_nodes(); }

  /// Every node has zero or two children and the encoding is complete.
  bool valid() const {
    std::size_t open = 1;
    for (std::uint8_t v : preorder) {
      if (open == 0) return false;
      open += v ? 1 : -1;
    }
    return open == 0;
  }
};

/// Shape drawn by the uniform-split recursion: a node with n leaves picks j
/// uniformly in {1, ..., n-1}; the left subtree gets n - j leaves, the right j.
inline TreeShape sample_tree(std::uint64_t n, Rng& rng) {
  detail::require(n >= 1, "sample_tree: n must be >= 1");
  TreeShape shape;
  shape.preorder.clear();
  shape.preorder.reserve(2 * n - 1);
  std::vector<std::uint64_t> stack{n};
  while (!stack.empty()) {
    const std::uint64_t m = stack.back();
    stack.pop_back();
    if (m == 1) {
      shape.preorder.push_back(0);
      continue;
    }
    shape.preorder.push_back(1);
    const std::uint64_t j = rng.uniform_int(1, m - 1);
    stack.push_back(j);
    stack.push_back(m - j);
  }
  return shape;
}

/// Leaf weights in left-to-right order; thetas[k] belongs to the k-th internal
/// node in preorder. Left children take c(theta), right children s(theta).
inline std::vector<double> compute_betas(const TreeShape& shape, std::span<const double> thetas,
                                         double p) {
  if (!shape.valid()) throw structural_error("compute_betas: malformed tree");
  if (thetas.size() != shape.internal_nodes())
    throw structural_error("compute_betas: need one angle per internal node");
  std::vector<double> betas;
  betas.reserve(shape.leaves());
  std::vector<double> pending{1.0};  // weights of nodes not yet visited
  std::size_t k = 0;
  for (std::uint8_t v : shape.preorder) {
    const double w = pending.back();
    pending.pop_back();
    if (v) {
      const double th = thetas[k++];
      pending.push_back(w * kernel_s(th, p));
      pending.push_back(w * kernel_c(th, p));
    } else {
      betas.push_back(w);
    }
  }
  return betas;
}

/// Depth of each leaf, left to right.
inline std::vector<int> leaf_depths(const TreeShape& shape) {
  if (!shape.valid()) throw structural_error("leaf_depths: malformed tree");
  std::vector<int> depths, pending{0};
  for (std::uint8_t v : shape.preorder) {
    const int d = pending.back();
    pending.pop_back();
    if (v) {
      pending.push_back(d + 1);
      pending.push_back(d + 1);
    } else {
      depths.push_back(d);
    }
  }
  return depths;
}

/// A fully materialized tree with its angles and leaf weights.
struct TreeSample {
  std::uint64_t n = 1;
  TreeShape shape;
  std::vector<double> thetas, betas;
  std::vector<int> depths;
  double beta_max = 1.0;
};

inline TreeSample sample_tree_sample(std::uint64_t n, double p, Rng& rng) {
  TreeSample s;
  s.n = n;
  s.shape = sample_tree(n, rng);
  s.thetas.resize(s.shape.internal_nodes());
  for (double& th : s.thetas) th = rng.uniform(0.0, 2.0 * std::numbers::pi);
  s.betas = compute_betas(s.shape, s.thetas, p);
  s.depths = leaf_depths(s.shape);
  s.beta_max = 0.0;
  for (double b : s.betas) s.beta_max = std::max(s.beta_max, std::abs(b));
  return s;
}

/// Streams the leaf weights of a random n-leaf tree in left-to-right order
/// without storing the shape. Memory is proportional to the depth.
template <class Visit>
void for_each_leaf_weight(std::uint64_t n, double p, Rng& rng, Visit&& visit) {
  struct Node {
    std::uint64_t leaves;
    double weight;
  };
  std::vector<Node> stack{{n, 1.0}};
  while (!stack.empty()) {
    const Node nd = stack.back();
    stack.pop_back();
    if (nd.leaves == 1) {
      visit(nd.weight);
      continue;
    }
    const std::uint64_t j = rng.uniform_int(1, nd.leaves - 1);
    const double th = rng.uniform(0.0, 2.0 * std::numbers::pi);
    stack.push_back({j, nd.weight * kernel_s(th, p)});
    stack.push_back({nd.leaves - j, nd.weight * kernel_c(th, p)});
  }
}

/// Per-replicate record of one McKean draw.
struct Replicate {
  std::uint64_t nu = 1;
  bool truncated = false;
  double beta_max = 1.0;
  double value = 0.0;              ///< V_t (0 when no datum was given)
  double identity_error = 0.0;     ///< |sum |beta|^alpha - 1|
  std::vector<double> moments;     ///< sum |beta|^m for the requested m
};

/// One replicate: nu_t, the tree, the angles and, when a datum is given, the
/// leaf draws X_j. Stream layout: nu, then per internal node (split, angle)
/// interleaved with the leaf draws in left-to-right order.
inline Replicate sample_replicate(double t, double p, const InitialDatum* datum,
                                  std::span<const double> moment_orders, Rng& rng,
                                  std::uint64_t nu_cap = kDefaultNuCap) {
  Replicate r;
  r.nu = sample_nu(t, rng);
  if (r.nu > nu_cap) {
    r.nu = nu_cap;
    r.truncated = true;
  }
  const double alpha = 2.0 / (1.0 + p);
  quad::CompensatedSum value, ident;
  std::vector<quad::CompensatedSum> mom(moment_orders.size());
  r.beta_max = 0.0;
  for_each_leaf_weight(r.nu, p, rng, [&](double beta) {
    const double ab = std::abs(beta);
    r.beta_max = std::max(r.beta_max, ab);
    ident.add(std::pow(ab, alpha));
    for (std::size_t i = 0; i < moment_orders.size(); ++i)
      mom[i].add(moment_orders[i] == 0.0 ? 1.0 : std::pow(ab, moment_orders[i]));
    if (datum) value.add(beta * datum->sample(rng));
  });
  r.value = value.value();
  r.identity_error = std::abs(ident.value() - 1.0);
  r.moments.resize(moment_orders.size());
  for (std::size_t i = 0; i < mom.size(); ++i) r.moments[i] = mom[i].value();
  return r;
}

struct BatchConfig {
  double t = 0.0;
  double p = 1.0;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  std::vector<double> moment_orders;
  std::uint64_t nu_cap = kDefaultNuCap;
  unsigned threads = 0;
};

/// Replicates of the McKean draw. Replicate i uses the stream
/// stream_seed(seed, i), so results do not depend on the worker count.
struct SimulationBatch {
  BatchConfig config;
  std::string datum;
  std::vector<Replicate> replicates;
  std::size_t truncated = 0;

  std::vector<double> values() const {
    std::vector<double> v(replicates.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = replicates[i].value;
    return v;
  }
};

inline SimulationBatch run_batch(const BatchConfig& cfg, const InitialDatum* datum) {
  detail::require(cfg.t >= 0.0, "run_batch: t must be >= 0");
  detail::require(cfg.p > 0.0, "run_batch: p must be > 0");
  if (datum)
    detail::require(std::abs(datum->alpha() - 2.0 / (1.0 + cfg.p)) < 1e-12,
                    "run_batch: datum exponent does not match p");
  SimulationBatch b;
  b.config = cfg;
  b.datum = datum ? datum->name() : "";
  b.replicates.resize(cfg.replicates);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t i) {
    Rng rng = Rng::for_stream(cfg.seed, i);
    b.replicates[i] = sample_replicate(cfg.t, cfg.p, datum, cfg.moment_orders, rng, cfg.nu_cap);
  });
  for (const auto& r : b.replicates) b.truncated += r.truncated;
  return b;
}

inline double sample_Vt(double t, const InitialDatum& datum, Rng& rng) {
  const double p = 2.0 / datum.alpha() - 1.0;
  return sample_replicate(t, p, &datum, {}, rng).value;
}

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanEstimate mean_and_stderr(std::span<const double> xs) {
  quad::CompensatedSum s, s2;
  for (double x : xs) s.add(x);
  const double n = static_cast<double>(xs.size());
  const double m = s.value() / n;
  for (double x : xs) s2.add((x - m) * (x - m));
  const double var = xs.size() > 1 ? s2.value() / (n - 1.0) : 0.0;
  return {m, std::sqrt(var / n)};
}

/// exp(-t (1 - 2 A_{m(1+p)})): the mean of sum_j |beta_j|^m.
inline double weight_moment_exact(double t, double p, double m) {
  return std::exp(-t * rate(m * (1.0 + p)));
}

/// Monte Carlo mean of sum_j |beta_j|^m with its standard error.
inline MeanEstimate weight_moment_estimate(double t, double p, double m, std::size_t replicates,
                                           std::uint64_t seed, unsigned threads = 0) {
  detail::require(m >= 0.0, "weight_moment_estimate: m must be >= 0");
  const auto b = run_batch({t, p, replicates, seed, {m}, kDefaultNuCap, threads}, nullptr);
  std::vector<double> xs(replicates);
  for (std::size_t i = 0; i < replicates; ++i) xs[i] = b.replicates[i].moments[0];
  return mean_and_stderr(xs);
}

/// x^(-q/(1+p)) e^(-t (1 - 2 A_q)) bounding P(beta_max > x).
inline double beta_max_tail_bound(double t, double p, double x, double q) {
  detail::require(x > 0.0 && x < 1.0 && q > 0.0, "beta_max_tail_bound: need 0 < x < 1, q > 0");
  return std::pow(x, -q / (1.0 + p)) * std::exp(-t * rate(q));
}

/// e^(-sigma m t) + e^(-t (1 - q sigma alpha / 2 - 2 A_q)) bounding E beta_max^m.
inline double beta_max_moment_bound(double t, double p, double m, double sigma, double q) {
  const double alpha = 2.0 / (1.0 + p);
  return std::exp(-sigma * m * t) + std::exp(-t * (rate(q) - q * sigma * alpha / 2.0));
}

struct TailCheck {
  double empirical = 0.0;
  double se = 0.0;
  double bound = 0.0;
  bool vacuous = false;  ///< bound >= 1
};

inline TailCheck beta_max_tail(const SimulationBatch& b, double x, double q) {
  TailCheck c;
  std::size_t hits = 0;
  for (const auto& r : b.replicates) hits += r.beta_max > x;
  const double n = static_cast<double>(b.replicates.size());
  c.empirical = hits / n;
  c.se = std::sqrt(c.empirical * (1.0 - c.empirical) / n);
  c.bound = beta_max_tail_bound(b.config.t, b.config.p, x, q);
  c.vacuous = c.bound >= 1.0;
  return c;
}

}  // namespace kacrelax
