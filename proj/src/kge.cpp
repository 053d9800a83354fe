/*
 * Copyright 2026 The enzkg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "enzkg/kge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

namespace enzkg {

using diff::Parameter;
using diff::Shape;
using diff::Tensor;
using diff::Var;

Scorer parse_scorer(std::string_view s) {
  if (s == "pairre") return Scorer::kPairRE;
  if (s == "transe") return Scorer::kTransE;
  throw ConfigError("unknown scorer '" + std::string(s) + "'");
}

Corruption parse_corruption(std::string_view s) {
  if (s == "relation") return Corruption::kRelation;
  if (s == "entity") return Corruption::kEntity;
  throw ConfigError("unknown corruption mode '" + std::string(s) + "'");
}

AdversarialDirection parse_direction(std::string_view s) {
  if (s == "harder") return AdversarialDirection::kHarder;
  if (s == "easier") return AdversarialDirection::kEasier;
  throw ConfigError("unknown adversarial direction '" + std::string(s) + "'");
}

const char* to_string(Scorer s) { return s == Scorer::kPairRE ? "pairre" : "transe"; }
const char* to_string(Corruption c) { return c == Corruption::kRelation ? "relation" : "entity"; }
const char* to_string(AdversarialDirection d) {
  return d == AdversarialDirection::kHarder ? "harder" : "easier";
}

std::vector<Parameter*> RelationParams::parameters() {
  if (scorer == Scorer::kTransE) return {&head};
  return {&head, &tail};
}

RelationParams init_relation_params(Scorer scorer, std::size_t num_enzymes, std::size_t dim,
                                    Rng& rng) {
  if (num_enzymes == 0 || dim == 0) throw ConfigError("relation table needs enzymes and dim > 0");
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto table = [&](const char* name) {
    Tensor t(Shape{num_enzymes, dim}, 0.0);
    for (double& x : t.data()) x = dist(rng);
    return Parameter(name, std::move(t));
  };
  RelationParams rel;
  rel.scorer = scorer;
  rel.head = table("relation_head");
  if (scorer == Scorer::kPairRE) {
    rel.tail = table("relation_tail");
  }
  return rel;
}

namespace {

void check_dims(const char* op, std::initializer_list<std::size_t> sizes) {
  const std::size_t n = *sizes.begin();
  for (std::size_t s : sizes) {
    if (s != n) throw ShapeError(std::string(op) + ": embedding dimensions disagree");
  }
}

}  // namespace

double pairre_score(std::span<const double> educt, std::span<const double> product,
                    std::span<const double> head, std::span<const double> tail) {
  check_dims("pairre_score", {educt.size(), product.size(), head.size(), tail.size()});
  double d = 0.0;
  for (std::size_t i = 0; i < educt.size(); ++i) {
    d += std::abs(educt[i] * head[i] - product[i] * tail[i]);
  }
  return d;
}

double transe_score(std::span<const double> educt, std::span<const double> product,
                    std::span<const double> relation) {
  check_dims("transe_score", {educt.size(), product.size(), relation.size()});
  double d = 0.0;
  for (std::size_t i = 0; i < educt.size(); ++i) d += std::abs(educt[i] + relation[i] - product[i]);
  return d;
}

std::vector<double> relation_distances(const RelationParams& rel, std::span<const double> educt,
                                       std::span<const double> product) {
  const std::size_t m = rel.num_relations();
  std::vector<double> out(m);
  for (std::size_t r = 0; r < m; ++r) {
    out[r] = rel.scorer == Scorer::kPairRE
                 ? pairre_score(educt, product, rel.head.value().row(r), rel.tail.value().row(r))
                 : transe_score(educt, product, rel.head.value().row(r));
  }
  return out;
}

namespace {

Var broadcast_mul(Var a, Var b) {
  if (a.shape().rank() == 1 && b.shape().rank() == 2) return diff::hadamard(b, a);
  return diff::hadamard(a, b);
}

Var broadcast_add(Var a, Var b) {
  if (a.shape().rank() == 1 && b.shape().rank() == 2) return diff::add(b, a);
  return diff::add(a, b);
}

Var broadcast_sub(Var a, Var b) {
  if (a.shape() == b.shape()) return diff::subtract(a, b);
  return broadcast_add(a, diff::scale(b, -1.0));
}

}  // namespace

Var score(Scorer scorer, Var educt, Var product, Var head, Var tail) {
  if (scorer == Scorer::kPairRE) {
    return diff::l1_norm(broadcast_sub(broadcast_mul(educt, head), broadcast_mul(product, tail)));
  }
  return diff::l1_norm(broadcast_sub(broadcast_add(educt, head), product));
}

NegativePools NegativePools::from(const EquationKG& kg) {
  NegativePools pools;
  const auto& keys = kg.hyperedges().keys();
  for (std::size_t e = 0; e < keys.size(); ++e) {
    HyperedgeId id(static_cast<std::uint32_t>(e));
    (keys[e].role == Role::kEduct ? pools.educts : pools.products).push_back(id);
  }
  pools.num_enzymes = kg.enzymes().size();
  return pools;
}

namespace {

constexpr int kRandomAttempts = 16;

// Uniform draw from candidates(i) for i in [0, count) that pass accept;
// tries random picks first, then enumerates.
template <typename Pick, typename Accept>
std::optional<std::size_t> draw_valid(std::size_t count, Pick pick, Accept accept, Rng& rng) {
  if (count == 0) return std::nullopt;
  std::uniform_int_distribution<std::size_t> dist(0, count - 1);
  for (int a = 0; a < kRandomAttempts; ++a) {
    std::size_t i = dist(rng);
    if (accept(pick(i))) return i;
  }
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < count; ++i) {
    if (accept(pick(i))) valid.push_back(i);
  }
  if (valid.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick_valid(0, valid.size() - 1);
  return valid[pick_valid(rng)];
}

}  // namespace

std::vector<NegativeTriple> sample_negatives(const TripleKey& positive, const NegativePools& pools,
                                             const TrueTripleSet& known, const LossConfig& cfg,
                                             Rng& rng) {
  std::vector<NegativeTriple> out;
  out.reserve(cfg.negatives);
  if (cfg.corruption == Corruption::kRelation) {
    if (pools.num_enzymes < 2) return out;
    // Other enzymes, indexed so that index >= m maps to index + 1.
    const auto pick = [&](std::size_t i) {
      const std::size_t m = positive.relation.index();
      return EnzymeId(static_cast<std::uint32_t>(i >= m ? i + 1 : i));
    };
    const auto accept = [&](EnzymeId r) {
      return !known.contains({positive.head, r, positive.tail});
    };
    for (std::size_t k = 0; k < cfg.negatives; ++k) {
      auto i = draw_valid(pools.num_enzymes - 1, pick, accept, rng);
      if (!i) break;
      out.push_back({positive.head, pick(*i), positive.tail});
    }
    return out;
  }

  std::bernoulli_distribution coin(0.5);
  for (std::size_t k = 0; k < cfg.negatives; ++k) {
    const bool head_first = coin(rng);
    bool placed = false;
    for (bool corrupt_head : {head_first, !head_first}) {
      const auto& pool = corrupt_head ? pools.educts : pools.products;
      const auto pick = [&](std::size_t i) { return pool[i]; };
      const auto accept = [&](HyperedgeId e) {
        TripleKey key = positive;
        if (corrupt_head) {
          if (e == positive.head) return false;
          key.head = e;
        } else {
          if (e == positive.tail) return false;
          key.tail = e;
        }
        return !known.contains(key);
      };
      auto i = draw_valid(pool.size(), pick, accept, rng);
      if (!i) continue;
      NegativeTriple neg{positive.head, positive.relation, positive.tail};
      (corrupt_head ? neg.head : neg.tail) = pool[*i];
      out.push_back(neg);
      placed = true;
      break;
    }
    if (!placed) break;
  }
  return out;
}

std::vector<double> adversarial_weights(std::span<const double> negative_scores,
                                        const LossConfig& cfg) {
  if (negative_scores.empty()) throw Error("self-adversarial loss needs at least one negative");
  const double sign = cfg.direction == AdversarialDirection::kHarder ? -1.0 : 1.0;
  std::vector<double> w(negative_scores.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = sign * cfg.temperature * negative_scores[i];
    mx = std::max(mx, w[i]);
  }
  double z = 0.0;
  for (double& x : w) z += (x = std::exp(x - mx));
  for (double& x : w) x /= z;
  return w;
}

namespace {

double log_sigmoid(double x) { return std::min(x, 0.0) - std::log1p(std::exp(-std::abs(x))); }

}  // namespace

double self_adversarial_loss(double positive_score, std::span<const double> negative_scores,
                             const LossConfig& cfg) {
  const auto p = adversarial_weights(negative_scores, cfg);
  double loss = -log_sigmoid(cfg.margin - positive_score);
  for (std::size_t i = 0; i < p.size(); ++i) {
    loss -= p[i] * log_sigmoid(negative_scores[i] - cfg.margin);
  }
  return loss;
}

Var self_adversarial_loss(Var positive_score, Var negative_scores, const LossConfig& cfg) {
  const Tensor& neg = negative_scores.value();
  if (neg.size() == 0) throw Error("self-adversarial loss needs at least one negative");
  return self_adversarial_loss(positive_score, negative_scores, adversarial_weights(neg.data(), cfg),
                               cfg);
}

Var self_adversarial_loss(Var positive_score, Var negative_scores, std::span<const double> weights,
                          const LossConfig& cfg) {
  if (positive_score.value().size() != 1) {
    throw ShapeError("self_adversarial_loss: positive score must be scalar");
  }
  if (negative_scores.shape().rank() != 1) {
    throw ShapeError("self_adversarial_loss: negative scores must be rank 1, got " +
                     negative_scores.shape().str());
  }
  if (negative_scores.value().size() == 0) {
    throw Error("self-adversarial loss needs at least one negative");
  }
  if (weights.size() != negative_scores.value().size()) {
    throw ShapeError("self_adversarial_loss: " + std::to_string(weights.size()) + " weights for " +
                     std::to_string(negative_scores.value().size()) + " negatives");
  }
  diff::Graph& g = positive_score.graph();
  Var pos_term = diff::log_sigmoid(diff::add_scalar(diff::scale(positive_score, -1.0), cfg.margin));
  Var neg_terms = diff::log_sigmoid(diff::add_scalar(negative_scores, -cfg.margin));
  Var p = g.constant(Tensor::vector({weights.begin(), weights.end()}));
  Var weighted = diff::sum(diff::hadamard(neg_terms, p));
  if (pos_term.shape().rank() != 0) pos_term = diff::sum(pos_term);
  return diff::scale(diff::add(pos_term, weighted), -1.0);
}

}  // namespace enzkg
