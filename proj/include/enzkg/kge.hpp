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

#ifndef ENZKG_KGE_HPP_
#define ENZKG_KGE_HPP_

#include <span>
#include <string_view>
#include <vector>

#include "enzkg/common.hpp"
#include "enzkg/diffmath.hpp"
#include "enzkg/kg_core.hpp"

namespace enzkg {

enum class Scorer { kPairRE, kTransE };

enum class Corruption { kRelation, kEntity };

// Which negatives the adversarial softmax favours. kHarder weights by
// exp(-alpha * f) (small distance = hard negative); kEasier by
// exp(alpha * f).
enum class AdversarialDirection { kHarder, kEasier };

struct LossConfig {
  double margin = 6.0;
  std::size_t negatives = 100;
  double temperature = 1.0;
  Corruption corruption = Corruption::kRelation;
  AdversarialDirection direction = AdversarialDirection::kHarder;
};

Scorer parse_scorer(std::string_view s);
Corruption parse_corruption(std::string_view s);
AdversarialDirection parse_direction(std::string_view s);
const char* to_string(Scorer s);
const char* to_string(Corruption c);
const char* to_string(AdversarialDirection d);

// Per-enzyme relation vectors. PairRE uses head (m^H) and tail (m^T);
// TransE uses head only and leaves tail empty.
struct RelationParams {
  Scorer scorer = Scorer::kPairRE;
  diff::Parameter head;
  diff::Parameter tail;

  std::size_t num_relations() const { return head.value().rows(); }
  std::vector<diff::Parameter*> parameters();
};

RelationParams init_relation_params(Scorer scorer, std::size_t num_enzymes, std::size_t dim,
                                    Rng& rng);

// ||S o m^H - P o m^T||_1
double pairre_score(std::span<const double> educt, std::span<const double> product,
                    std::span<const double> head, std::span<const double> tail);
// ||S + m - P||_1
double transe_score(std::span<const double> educt, std::span<const double> product,
                    std::span<const double> relation);

// Distance of (educt, product) under every enzyme.
std::vector<double> relation_distances(const RelationParams& rel, std::span<const double> educt,
                                       std::span<const double> product);

// Recorded scoring. Each of educt / product / head / tail is [n] or [k,n]; all
// rank-2 operands must agree on k. Returns [k], or a scalar when every
// operand is rank 1. tail is ignored for TransE.
diff::Var score(Scorer scorer, diff::Var educt, diff::Var product, diff::Var head, diff::Var tail);

struct NegativeTriple {
  HyperedgeId head;
  EnzymeId relation;
  HyperedgeId tail;
};

// Candidate hyperedges for entity corruption, split by role.
struct NegativePools {
  std::vector<HyperedgeId> educts;
  std::vector<HyperedgeId> products;
  std::size_t num_enzymes = 0;

  static NegativePools from(const EquationKG& kg);
};

// Up to cfg.negatives corruptions of positive that are not in known. Relation
// mode swaps the enzyme; entity mode swaps the educt or product hyperedge
// (coin flip) for another of the same role, falling back to the other side
// when one side has no valid replacement. Fewer are returned only when the
// pools cannot supply a valid corruption.
std::vector<NegativeTriple> sample_negatives(const TripleKey& positive, const NegativePools& pools,
                                             const TrueTripleSet& known, const LossConfig& cfg,
                                             Rng& rng);

// Adversarial weights over negative distances (sum to 1).
std::vector<double> adversarial_weights(std::span<const double> negative_scores,
                                        const LossConfig& cfg);

// -log sigma(gamma - f(pos)) - sum_i p_i log sigma(f(neg_i) - gamma), with p
// from adversarial_weights().
double self_adversarial_loss(double positive_score, std::span<const double> negative_scores,
                             const LossConfig& cfg);

// Recorded version; p is a constant (no gradient through the weights).
// negative_scores is [k].
diff::Var self_adversarial_loss(diff::Var positive_score, diff::Var negative_scores,
                                const LossConfig& cfg);
// Same loss with the negative weights supplied (held fixed, as in the
// gradient).
diff::Var self_adversarial_loss(diff::Var positive_score, diff::Var negative_scores,
                                std::span<const double> weights, const LossConfig& cfg);

}  // namespace enzkg

#endif  // ENZKG_KGE_HPP_
