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

#ifndef ENZKG_TESTS_FIXTURES_HPP_
#define ENZKG_TESTS_FIXTURES_HPP_

#include <algorithm>
#include <iterator>
#include <random>
#include <set>
#include <tuple>
#include <sstream>
#include <string>
#include <vector>

#include "enzkg/hypergraph.hpp"
#include "enzkg/kg_core.hpp"

namespace enzkg::testing {

inline EquationKG kg_from_tsv(const std::string& text) {
  EquationKG kg;
  std::istringstream in(text);
  read_equations(in, EquationFormat::kTsv, kg);
  return kg;
}

// q1: c1 + c2 -> c3 + c4 and q2: c2 + c3 -> c4. Hyperedges are S1=0, P1=1,
// S2=2, P2=3.
inline EquationKG toy_kg(bool with_enzymes = false) {
  return kg_from_tsv(with_enzymes ? "c1;c2\te1\tc3;c4\nc2;c3\te2\tc4\n"
                                  : "c1;c2\te1\tc3;c4\nc2;c3\t?\tc4\n");
}

inline CompoundId cid(const EquationKG& kg, const std::string& name) {
  return *kg.compounds().find(name);
}

// Random KG over num_compounds compounds and num_enzymes enzymes with small
// compound sets; roughly a third of the equations are incomplete.
inline EquationKG random_kg(std::uint64_t seed, std::size_t num_equations,
                            std::size_t num_compounds, std::size_t num_enzymes,
                            double incomplete_share = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> comp(1, num_compounds);
  std::uniform_int_distribution<std::size_t> enz(1, num_enzymes);
  std::uniform_int_distribution<int> size(1, 3);
  std::bernoulli_distribution missing(incomplete_share);
  std::ostringstream tsv;
  for (std::size_t q = 0; q < num_equations; ++q) {
    auto side = [&] {
      std::string s;
      for (int k = size(rng); k > 0; --k) s += (s.empty() ? "c" : ";c") + std::to_string(comp(rng));
      return s;
    };
    const std::string educts = side();
    const std::string enzyme = missing(rng) ? "?" : "e" + std::to_string(enz(rng));
    tsv << educts << '\t' << enzyme << '\t' << side() << '\n';
  }
  return kg_from_tsv(tsv.str());
}

// Typed H(2) edges (i, j, type) from pairwise intersection of every pair of
// universe hyperedges.
using TypedEdge = std::tuple<std::uint32_t, std::uint32_t, int>;

inline std::set<TypedEdge> brute_force_h2(const EquationKG& kg, bool homogeneous = false) {
  std::set<TypedEdge> out;
  const auto& keys = kg.hyperedges().keys();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    for (std::size_t j = 0; j < keys.size(); ++j) {
      if (i == j) continue;
      std::vector<CompoundId> common;
      std::set_intersection(keys[i].compounds.begin(), keys[i].compounds.end(),
                            keys[j].compounds.begin(), keys[j].compounds.end(),
                            std::back_inserter(common));
      if (common.empty()) continue;
      int type = 2;
      if (keys[i].role == Role::kEduct && keys[j].role == Role::kEduct) type = 0;
      if (keys[i].role == Role::kProduct && keys[j].role == Role::kProduct) type = 1;
      if (homogeneous) type = 0;
      out.emplace(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), type);
    }
  }
  return out;
}

inline std::set<TypedEdge> graph_edges(const Hypergraph& g) {
  std::set<TypedEdge> out;
  for (std::size_t i = 0; i < g.num_hyperedges(); ++i) {
    for (const TypedNeighbor& nb : g.neighbors(HyperedgeId(static_cast<std::uint32_t>(i)))) {
      for (int t = 0; t < kNumSharingTypes; ++t) {
        if (nb.types & (1u << t)) out.emplace(static_cast<std::uint32_t>(i), nb.edge.value, t);
      }
    }
  }
  return out;
}

}  // namespace enzkg::testing

#endif  // ENZKG_TESTS_FIXTURES_HPP_
