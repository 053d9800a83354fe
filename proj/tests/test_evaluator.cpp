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

#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "enzkg/evaluator.hpp"
#include "enzkg/synth.hpp"
#include "fixtures.hpp"

namespace enzkg {
namespace {

EnzymeId eid(std::uint32_t v) { return EnzymeId(v); }

// Sorts the surviving candidates and returns the mean of the first and last
// position the truth can take among its ties.
double oracle_rank(const std::vector<double>& d, std::size_t truth,
                   const std::vector<EnzymeId>& known) {
  std::vector<std::pair<double, int>> order;
  for (std::size_t m = 0; m < d.size(); ++m) {
    const bool skip = m != truth && std::find(known.begin(), known.end(), eid(m)) != known.end();
    if (!skip) order.emplace_back(d[m], m == truth ? 1 : 0);
  }
  std::sort(order.begin(), order.end());
  std::size_t first = 0, last = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i].first == d[truth]) {
      if (first == 0) first = i + 1;
      last = i + 1;
    }
  }
  return 0.5 * static_cast<double>(first + last);
}

TEST_CASE("ranks on hand examples") {
  const std::vector<double> d = {1.0, 2.0, 3.0};
  CHECK(rank_relation(d, eid(0), {}) == 1.0);
  CHECK(rank_relation(d, eid(2), {}) == 3.0);
  const std::vector<double> ties = {1.0, 1.0, 1.0};
  CHECK(rank_relation(ties, eid(0), {}) == 2.0);
  const std::vector<double> pair = {0.0, 5.0, 5.0, 9.0};
  CHECK(rank_relation(pair, eid(2), {}) == 2.5);
  const std::vector<EnzymeId> known = {eid(0), eid(2)};
  const std::vector<double> f = {0.5, 1.0, 2.0};
  CHECK(rank_relation(f, eid(2), known) == 2.0);
  CHECK(rank_relation(f, eid(0), known) == 1.0);
  CHECK_THROWS_AS(rank_relation(f, eid(3), {}), Error);
}

TEST_CASE("summary of ranks 1, 2, 4") {
  RankingReport r = summarize({1, 2, 4});
  CHECK(r.count == 3);
  CHECK(r.mr == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
  CHECK(r.mrr == doctest::Approx((1.0 + 0.5 + 0.25) / 3.0).epsilon(1e-15));
  CHECK(r.hit1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(r.hit3 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.hit10 == 1.0);
  CHECK_THROWS_AS(summarize({}), Error);
  RankingReport half = summarize({1.5});
  CHECK(half.hit1 == 0.0);
  CHECK(half.mrr == doctest::Approx(1.0 / 1.5).epsilon(1e-15));
}

TEST_CASE("rank equals the sorting oracle on random cases") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<double> d(n);
    for (double& x : d) x = static_cast<double>(rng() % 6);
    const std::size_t truth = rng() % n;
    std::vector<EnzymeId> known;
    for (std::size_t m = 0; m < n; ++m) {
      if (rng() % 4 == 0) known.push_back(eid(m));
    }
    CHECK(rank_relation(d, eid(truth), known) == oracle_rank(d, truth, known));
    CHECK(rank_relation(d, eid(truth), known) <= rank_relation(d, eid(truth), {}));
  }
}

TEST_CASE("evaluate filters other true enzymes of the pair") {
  EquationKG kg = testing::kg_from_tsv("a\te1\tb\na\te2\tb\nc\te3\td\n");
  const TrueTripleSet filter = TrueTripleSet::from(kg);
  DistanceFn fn = [](const EquationTriple&) { return std::vector<double>{1.0, 0.5, 2.0}; };
  RankingReport r = evaluate(kg.complete(), fn, filter);
  REQUIRE(r.ranks.size() == 3);
  CHECK(r.ranks[0] == 1.0);
  CHECK(r.ranks[1] == 1.0);
  CHECK(r.ranks[2] == 3.0);
  RankingReport raw = evaluate(kg.complete(), fn, TrueTripleSet{});
  CHECK(raw.ranks[0] == 2.0);
}

TEST_CASE("model evaluation is independent of thread count") {
  SyntheticSpec spec;
  spec.num_complete = 80;
  spec.num_incomplete = 10;
  spec.seed = 3;
  SyntheticKG syn = generate_synthetic(spec);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.seed = 5;
  Model m = make_model(std::move(syn.kg), {}, cfg);
  std::vector<std::size_t> all(m.kg.complete().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const TrueTripleSet filter = TrueTripleSet::from(m.kg);
  RankingReport one = evaluate_model(m, all, filter, 1);
  RankingReport three = evaluate_model(m, all, filter, 3);
  CHECK(one.ranks == three.ranks);
  DistanceFn fn = [&](const EquationTriple& t) {
    return enzyme_distances(m, embed_hyperedge(m, t.educt_edge).data(),
                            embed_hyperedge(m, t.product_edge).data());
  };
  CHECK(evaluate(m.kg.complete(), fn, filter).ranks == one.ranks);
}

TEST_CASE("reports are written in both formats") {
  RankingReport r = summarize({1, 2, 4});
  std::ostringstream kv;
  write_report_kv(kv, r);
  const std::string s = kv.str();
  for (const char* key : {"count 3", "mr ", "mrr ", "hit@1 ", "hit@3 ", "hit@10 1"}) {
    CHECK(s.find(key) != std::string::npos);
  }
  std::ostringstream table;
  write_report_table(table, r, "test");
  CHECK(table.str().find("test") != std::string::npos);
  CHECK(table.str().find("MRR") != std::string::npos);
}

}  // namespace
}  // namespace enzkg
