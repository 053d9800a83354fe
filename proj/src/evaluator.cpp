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

#include "enzkg/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <string>
#include <thread>
#include <unordered_map>

namespace enzkg {

double rank_relation(std::span<const double> distances, EnzymeId truth,
                     std::span<const EnzymeId> known) {
  if (truth.index() >= distances.size()) {
    throw OutOfVocabularyError("enzyme id " + std::to_string(truth.value) +
                               " outside the " + std::to_string(distances.size()) +
                               "-enzyme table");
  }
  const double target = distances[truth.index()];
  if (std::isnan(target)) throw NumericalError("NaN distance for the true enzyme");
  std::size_t better = 0;
  std::size_t tied = 0;
  for (std::size_t m = 0; m < distances.size(); ++m) {
    if (m == truth.index()) continue;
    const EnzymeId id(static_cast<std::uint32_t>(m));
    if (std::binary_search(known.begin(), known.end(), id)) continue;
    if (distances[m] < target) {
      ++better;
    } else if (distances[m] == target) {
      ++tied;
    }
  }
  const double optimistic = 1.0 + static_cast<double>(better);
  const double pessimistic = optimistic + static_cast<double>(tied);
  return 0.5 * (optimistic + pessimistic);
}

RankingReport summarize(std::vector<double> ranks) {
  if (ranks.empty()) throw Error("cannot summarize an empty ranking");
  RankingReport r;
  r.count = ranks.size();
  for (double rank : ranks) {
    r.mr += rank;
    r.mrr += 1.0 / rank;
    r.hit1 += rank <= 1.0;
    r.hit3 += rank <= 3.0;
    r.hit10 += rank <= 10.0;
  }
  const double n = static_cast<double>(r.count);
  r.mr /= n;
  r.mrr /= n;
  r.hit1 /= n;
  r.hit3 /= n;
  r.hit10 /= n;
  r.ranks = std::move(ranks);
  return r;
}

RankingReport evaluate(std::span<const EquationTriple> triples, const DistanceFn& distances,
                       const TrueTripleSet& filter) {
  std::vector<double> ranks;
  ranks.reserve(triples.size());
  for (const EquationTriple& t : triples) {
    if (!t.enzyme) throw Error("cannot rank an incomplete equation");
    const auto d = distances(t);
    ranks.push_back(rank_relation(d, *t.enzyme, filter.relations(t.educt_edge, t.product_edge)));
  }
  return summarize(std::move(ranks));
}

RankingReport evaluate_model(Model& model, std::span<const std::size_t> indices,
                             const TrueTripleSet& filter, std::size_t threads) {
  const auto& all = model.kg.complete();
  std::vector<EquationTriple> triples;
  std::vector<HyperedgeId> edges;
  std::unordered_map<std::uint32_t, std::size_t> slot;
  for (std::size_t i : indices) {
    triples.push_back(all.at(i));
    for (HyperedgeId e : {all[i].educt_edge, all[i].product_edge}) {
      if (slot.emplace(e.value, edges.size()).second) edges.push_back(e);
    }
  }
  std::vector<diff::Tensor> cache(edges.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, edges.size()));
  auto work = [&](std::size_t w) {
    for (std::size_t k = w; k < edges.size(); k += workers) {
      cache[k] = embed_hyperedge(model, edges[k]);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  return evaluate(
      triples,
      [&](const EquationTriple& t) {
        return enzyme_distances(model, cache[slot.at(t.educt_edge.value)].data(),
                                cache[slot.at(t.product_edge.value)].data());
      },
      filter);
}

void write_report_table(std::ostream& out, const RankingReport& r, std::string_view title) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << title << " (" << r.count << " triples)\n";
  out << std::left << std::setw(10) << "MR" << std::setw(10) << "MRR" << std::setw(10) << "H@1"
      << std::setw(10) << "H@3" << std::setw(10) << "H@10" << "\n";
  out << std::fixed << std::setprecision(3);
  for (double v : {r.mr, r.mrr, r.hit1, r.hit3, r.hit10}) out << std::setw(10) << v;
  out << "\n";
  out.flags(flags);
  out.precision(precision);
}

void write_report_kv(std::ostream& out, const RankingReport& r) {
  const auto precision = out.precision();
  out << std::setprecision(10);
  out << "count " << r.count << "\n"
      << "mr " << r.mr << "\n"
      << "mrr " << r.mrr << "\n"
      << "hit@1 " << r.hit1 << "\n"
      << "hit@3 " << r.hit3 << "\n"
      << "hit@10 " << r.hit10 << "\n";
  out.precision(precision);
}

void write_per_triple(std::ostream& out, const EquationKG& kg,
                      std::span<const std::size_t> indices, const RankingReport& report) {
  auto join = [&](const std::vector<CompoundId>& ids) {
    std::string s;
    for (CompoundId c : ids) {
      if (!s.empty()) s += ';';
      s += kg.compounds().name(c);
    }
    return s;
  };
  out << "educts\tenzyme\tproducts\trank\n";
  for (std::size_t k = 0; k < indices.size() && k < report.ranks.size(); ++k) {
    const EquationTriple& t = kg.complete().at(indices[k]);
    out << join(t.educts) << '\t' << kg.enzymes().name(*t.enzyme) << '\t' << join(t.products)
        << '\t' << report.ranks[k] << '\n';
  }
}

}  // namespace enzkg
