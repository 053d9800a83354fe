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

#ifndef ENZKG_EVALUATOR_HPP_
#define ENZKG_EVALUATOR_HPP_

#include <functional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "enzkg/common.hpp"
#include "enzkg/kg_core.hpp"
#include "enzkg/model.hpp"

namespace enzkg {

struct RankingReport {
  std::vector<double> ranks;
  double mr = 0.0;
  double mrr = 0.0;
  double hit1 = 0.0;
  double hit3 = 0.0;
  double hit10 = 0.0;
  std::size_t count = 0;
};

// Filtered rank of the true enzyme among all enzymes, ascending by distance.
// Enzymes in known (other than truth) are skipped. Ties count as the mean of
// the optimistic and pessimistic rank.
double rank_relation(std::span<const double> distances, EnzymeId truth,
                     std::span<const EnzymeId> known);

// Aggregates over ranks; throws Error when ranks is empty.
RankingReport summarize(std::vector<double> ranks);

// Per-enzyme distances for a triple.
using DistanceFn = std::function<std::vector<double>(const EquationTriple&)>;

RankingReport evaluate(std::span<const EquationTriple> triples, const DistanceFn& distances,
                       const TrueTripleSet& filter);

// Relation prediction over model.kg.complete()[indices]. Hyperedge
// embeddings are computed once each, on up to threads workers.
RankingReport evaluate_model(Model& model, std::span<const std::size_t> indices,
                             const TrueTripleSet& filter, std::size_t threads = 1);

// Aligned plain-text table.
void write_report_table(std::ostream& out, const RankingReport& report, std::string_view title);
// One "key value" line per metric.
void write_report_kv(std::ostream& out, const RankingReport& report);
// TSV: educts, enzyme, products, rank.
void write_per_triple(std::ostream& out, const EquationKG& kg,
                      std::span<const std::size_t> indices, const RankingReport& report);

}  // namespace enzkg

#endif  // ENZKG_EVALUATOR_HPP_
