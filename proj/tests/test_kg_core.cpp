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
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "enzkg/kg_core.hpp"
#include "fixtures.hpp"

namespace enzkg {
namespace {

using testing::cid;
using testing::kg_from_tsv;

std::vector<std::string> names(const EquationKG& kg, const std::vector<CompoundId>& ids) {
  std::vector<std::string> out;
  for (CompoundId c : ids) out.push_back(kg.compounds().name(c));
  return out;
}

TEST_CASE("complete row maps fields directly") {
  EquationKG kg = kg_from_tsv("c1;c2\te1\tc3;c4\n");
  REQUIRE(kg.complete().size() == 1);
  const EquationTriple& t = kg.complete()[0];
  CHECK(names(kg, t.educts) == std::vector<std::string>{"c1", "c2"});
  CHECK(kg.enzymes().name(*t.enzyme) == "e1");
  CHECK(names(kg, t.products) == std::vector<std::string>{"c3", "c4"});
}

TEST_CASE("question mark marks an incomplete equation") {
  EquationKG kg = kg_from_tsv("c2;c3\t?\tc4\n");
  REQUIRE(kg.incomplete().size() == 1);
  CHECK(kg.complete().empty());
  CHECK_FALSE(kg.incomplete()[0].enzyme.has_value());
  CHECK(kg.enzymes().size() == 0);
}

TEST_CASE("repeated compounds collapse to a set") {
  EquationKG kg = kg_from_tsv("c1;c1\te1\tc2\n");
  CHECK(names(kg, kg.complete()[0].educts) == std::vector<std::string>{"c1"});
}

TEST_CASE("fields are trimmed and comments skipped") {
  EquationKG kg = kg_from_tsv("# header\n\n c1 ; c2 \t e1 \t c3\n");
  REQUIRE(kg.complete().size() == 1);
  CHECK(kg.compounds().find("c2").has_value());
  CHECK(kg.enzymes().find("e1").has_value());
}

TEST_CASE("malformed rows name their line") {
  SUBCASE("column count") {
    try {
      kg_from_tsv("c1\te1\tc2\nc1\te1\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("empty compound list") {
    try {
      kg_from_tsv("# x\nc1\te1\t ; \n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
}

TEST_CASE("duplicate triples are counted once") {
  EquationKG kg = kg_from_tsv("c1;c2\te1\tc3\nc2;c1\te1\tc3\nc1;c2\t?\tc3\n");
  CHECK(kg.complete().size() == 1);
  CHECK(kg.incomplete().size() == 1);
  CHECK(kg.duplicate_count() == 1);
}

TEST_CASE("json layout matches tsv") {
  std::istringstream in(R"([{"educts": ["c1", "c2"], "enzyme": "e1", "products": ["c3"]},
                            {"educts": ["c2"], "enzyme": null, "products": ["c4"]}])");
  EquationKG kg;
  read_equations(in, EquationFormat::kJson, kg);
  CHECK(kg.complete().size() == 1);
  CHECK(kg.incomplete().size() == 1);
  CHECK(kg.hyperedges().size() == 4);
}

TEST_CASE("interning round trips") {
  EquationKG kg = testing::random_kg(3, 60, 30, 8);
  for (std::size_t i = 0; i < kg.compounds().size(); ++i) {
    CompoundId id(static_cast<std::uint32_t>(i));
    CHECK(*kg.compounds().find(kg.compounds().name(id)) == id);
  }
  for (std::size_t i = 0; i < kg.enzymes().size(); ++i) {
    EnzymeId id(static_cast<std::uint32_t>(i));
    CHECK(*kg.enzymes().find(kg.enzymes().name(id)) == id);
  }
}

TEST_CASE("toy graph has four hyperedges") {
  EquationKG kg = testing::toy_kg();
  const auto& u = hyperedge_universe(kg);
  CHECK(u.size() == 4);
  CHECK(kg.complete()[0].educt_edge == HyperedgeId(0));
  CHECK(kg.complete()[0].product_edge == HyperedgeId(1));
  CHECK(kg.incomplete()[0].educt_edge == HyperedgeId(2));
  CHECK(kg.incomplete()[0].product_edge == HyperedgeId(3));
}

TEST_CASE("hyperedge keys include the role") {
  EquationKG kg = kg_from_tsv("c1;c2\te1\tc3\nc1;c2\te2\tc4\nc5\te1\tc1;c2\n");
  CHECK(kg.complete()[0].educt_edge == kg.complete()[1].educt_edge);
  CHECK(kg.complete()[2].product_edge != kg.complete()[0].educt_edge);
  CHECK(kg.hyperedges().size() == 5);
}

TEST_CASE("universe matches brute-force key set") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EquationKG kg = testing::random_kg(seed, 80, 20, 5);
    std::set<std::pair<int, std::vector<std::string>>> keys;
    for (const auto* triples : {&kg.complete(), &kg.incomplete()}) {
      for (const auto& t : *triples) {
        auto s = names(kg, t.educts);
        auto p = names(kg, t.products);
        std::sort(s.begin(), s.end());
        std::sort(p.begin(), p.end());
        keys.insert({0, s});
        keys.insert({1, p});
        CHECK(kg.hyperedges().key(t.educt_edge).compounds == t.educts);
        CHECK(kg.hyperedges().key(t.product_edge).role == Role::kProduct);
      }
    }
    CHECK(kg.hyperedges().size() == keys.size());
    CHECK(kg.hyperedges().size() <= 2 * (kg.complete().size() + kg.incomplete().size()));
  }
}

EquationKG n_triples(std::size_t n) {
  std::ostringstream tsv;
  for (std::size_t i = 0; i < n; ++i) tsv << "c" << i << "\te" << i % 7 << "\tp" << i << "\n";
  return kg_from_tsv(tsv.str());
}

TEST_CASE("split sizes follow the ratio") {
  SplitSpec spec;
  spec.seed = 7;
  Split s = split(n_triples(100), spec);
  CHECK(s.train.size() == 80);
  CHECK(s.valid.size() == 10);
  CHECK(s.test.size() == 10);

  Split t = split(n_triples(101), spec);
  CHECK(t.train.size() + t.valid.size() + t.test.size() == 101);
  CHECK(std::abs(static_cast<double>(t.train.size()) - 80.8) <= 1.0);
  CHECK(std::abs(static_cast<double>(t.valid.size()) - 10.1) <= 1.0);
  CHECK(std::abs(static_cast<double>(t.test.size()) - 10.1) <= 1.0);
}

TEST_CASE("split partitions and is deterministic") {
  EquationKG kg = n_triples(57);
  SplitSpec spec;
  spec.seed = 11;
  Split a = split(kg, spec);
  Split b = split(kg, spec);
  CHECK(a.train == b.train);
  CHECK(a.valid == b.valid);
  CHECK(a.test == b.test);
  std::vector<std::size_t> all;
  for (const auto* part : {&a.train, &a.valid, &a.test}) all.insert(all.end(), part->begin(), part->end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
  spec.seed = 12;
  CHECK(split(kg, spec).test != a.test);
}

TEST_CASE("forced indices land in test") {
  EquationKG kg = n_triples(40);
  const std::vector<std::size_t> forced = {3, 17, 29};
  Split s = split(kg, SplitSpec{}, forced);
  for (std::size_t f : forced) {
    CHECK(std::find(s.test.begin(), s.test.end(), f) != s.test.end());
  }
}

TEST_CASE("split needs ten triples") { CHECK_THROWS_AS(split(n_triples(9), SplitSpec{}), Error); }

TEST_CASE("true triple set lists relations per pair") {
  EquationKG kg = kg_from_tsv("c1\te2\tc2\nc1\te1\tc2\nc1\te3\tc3\n");
  TrueTripleSet set = TrueTripleSet::from(kg);
  CHECK(set.size() == 3);
  const auto& t = kg.complete()[0];
  auto rel = set.relations(t.educt_edge, t.product_edge);
  REQUIRE(rel.size() == 2);
  CHECK(rel[0] < rel[1]);
  CHECK(set.contains(key_of(kg.complete()[2])));
}

TEST_CASE("tsv writer round trips") {
  EquationKG kg = testing::random_kg(5, 40, 15, 4);
  std::ostringstream out;
  write_equation_tsv(out, kg, kg.complete());
  write_equation_tsv(out, kg, kg.incomplete());
  EquationKG back = kg_from_tsv(out.str());
  CHECK(back.complete().size() == kg.complete().size());
  CHECK(back.incomplete().size() == kg.incomplete().size());
  CHECK(back.hyperedges().size() == kg.hyperedges().size());
}

}  // namespace
}  // namespace enzkg
