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

#include "enzkg/hypergraph.hpp"

#include <algorithm>
#include <bit>
#include <iterator>
#include <numeric>
#include <ostream>

namespace enzkg {

SharingType sharing_type(Role a, Role b) {
  if (a != b) return SharingType::kCrossSharing;
  return a == Role::kEduct ? SharingType::kEductSharing : SharingType::kProductSharing;
}

const char* sharing_name(SharingType t) {
  switch (t) {
    case SharingType::kEductSharing:
      return "educt";
    case SharingType::kProductSharing:
      return "product";
    case SharingType::kCrossSharing:
      return "cross";
  }
  return "?";
}

std::size_t SubHypergraph::neighbor_count() const {
  return static_cast<std::size_t>(std::count(neighbor_mask.begin(), neighbor_mask.end(), 1));
}

Hypergraph Hypergraph::build(const EquationKG& kg, bool homogeneous) {
  Hypergraph g;
  g.homogeneous_ = homogeneous;
  const auto& keys = kg.hyperedges().keys();
  const std::size_t num_edges = keys.size();
  g.roles_.reserve(num_edges);
  g.members_.reserve(num_edges);
  g.compound_edges_.resize(kg.compounds().size());
  for (std::size_t e = 0; e < num_edges; ++e) {
    g.roles_.push_back(keys[e].role);
    g.members_.push_back(keys[e].compounds);
    for (CompoundId c : keys[e].compounds) {
      g.compound_edges_[c.index()].push_back(HyperedgeId(static_cast<std::uint32_t>(e)));
    }
  }

  // Accumulate the sharing mask of every pair that meets in some compound.
  g.adjacency_.resize(num_edges);
  std::vector<SharingMask> mask(num_edges, 0);
  std::vector<std::uint32_t> touched;
  for (std::size_t i = 0; i < num_edges; ++i) {
    touched.clear();
    for (CompoundId c : g.members_[i]) {
      for (HyperedgeId j : g.compound_edges_[c.index()]) {
        if (j.index() == i) continue;
        if (mask[j.index()] == 0) touched.push_back(j.value);
        mask[j.index()] |= bit(sharing_type(g.roles_[i], g.roles_[j.index()]));
      }
    }
    std::sort(touched.begin(), touched.end());
    auto& row = g.adjacency_[i];
    row.reserve(touched.size());
    for (std::uint32_t j : touched) {
      row.push_back({HyperedgeId(j), g.collapse(mask[j])});
      mask[j] = 0;
    }
  }
  return g;
}

SharingMask Hypergraph::collapse(SharingMask m) const {
  if (!homogeneous_ || m == 0) return m;
  return bit(SharingType::kEductSharing);
}

bool Hypergraph::incident(CompoundId c, HyperedgeId e) const {
  auto m = members(e);
  return std::binary_search(m.begin(), m.end(), c);
}

SharingMask Hypergraph::edge_types(HyperedgeId i, HyperedgeId j) const {
  auto row = neighbors(i);
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const TypedNeighbor& n, HyperedgeId id) { return n.edge < id; });
  if (it == row.end() || it->edge != j) return 0;
  return it->types;
}

std::size_t Hypergraph::num_typed_edges() const {
  std::size_t n = 0;
  for (const auto& row : adjacency_) {
    for (const auto& nb : row) n += static_cast<std::size_t>(std::popcount(nb.types));
  }
  return n;
}

namespace {

// Uniform without replacement; everything when the budget covers it.
template <typename T>
std::vector<T> take_up_to(std::span<const T> items, std::size_t budget, Rng& rng) {
  std::vector<T> out;
  if (items.size() <= budget) {
    out.assign(items.begin(), items.end());
  } else {
    out.reserve(budget);
    std::sample(items.begin(), items.end(), std::back_inserter(out), budget, rng);
  }
  return out;
}

}  // namespace

HyperedgeSlot Hypergraph::make_slot(HyperedgeId e, SharingMask types, std::size_t eta2,
                                    Rng& rng) const {
  HyperedgeSlot slot;
  slot.edge = e;
  slot.types = types;
  slot.compounds = take_up_to(members(e), eta2, rng);
  slot.compound_mask.assign(slot.compounds.size(), 1);
  slot.compounds.resize(eta2, CompoundId(0));
  slot.compound_mask.resize(eta2, 0);
  return slot;
}

SubHypergraph Hypergraph::sample_neighborhood(HyperedgeId target, std::size_t eta1,
                                              std::size_t eta2, Rng& rng) const {
  if (target.index() >= num_hyperedges()) {
    throw Error("unknown hyperedge " + std::to_string(target.value));
  }
  if (eta1 == 0 || eta2 == 0) throw ConfigError("eta1 and eta2 must be at least 1");
  SubHypergraph sub;
  sub.target = target;
  sub.role = role(target);
  HyperedgeSlot own = make_slot(target, 0, eta2, rng);
  sub.target_compounds = std::move(own.compounds);
  sub.target_mask = std::move(own.compound_mask);

  auto picked = take_up_to(neighbors(target), eta1, rng);
  for (const auto& nb : picked) {
    sub.neighbors.push_back(make_slot(nb.edge, nb.types, eta2, rng));
    sub.neighbor_mask.push_back(1);
  }
  while (sub.neighbors.size() < eta1) {
    HyperedgeSlot pad;
    pad.compounds.assign(eta2, CompoundId(0));
    pad.compound_mask.assign(eta2, 0);
    sub.neighbors.push_back(std::move(pad));
    sub.neighbor_mask.push_back(0);
  }
  return sub;
}

SubHypergraph Hypergraph::attach_test_hyperedge(std::span<const CompoundId> compounds,
                                                Role role, std::size_t eta2, Rng& rng,
                                                std::size_t* dropped) const {
  if (eta2 == 0) throw ConfigError("eta2 must be at least 1");
  std::vector<CompoundId> known;
  std::size_t unknown = 0;
  for (CompoundId c : compounds) {
    if (c.index() < num_compounds()) {
      known.push_back(c);
    } else {
      ++unknown;
    }
  }
  if (dropped) *dropped = unknown;
  std::sort(known.begin(), known.end());
  known.erase(std::unique(known.begin(), known.end()), known.end());
  if (known.empty()) {
    throw OutOfVocabularyError("out-of-vocabulary hyperedge: no compound is known to the graph");
  }

  SubHypergraph sub;
  sub.role = role;
  sub.target_compounds = take_up_to(std::span<const CompoundId>(known), eta2, rng);
  sub.target_mask.assign(sub.target_compounds.size(), 1);
  sub.target_compounds.resize(eta2, CompoundId(0));
  sub.target_mask.resize(eta2, 0);

  std::vector<SharingMask> mask(num_hyperedges(), 0);
  std::vector<std::uint32_t> touched;
  for (CompoundId c : known) {
    for (HyperedgeId j : edges_of(c)) {
      if (mask[j.index()] == 0) touched.push_back(j.value);
      mask[j.index()] |= bit(sharing_type(role, roles_[j.index()]));
    }
  }
  std::sort(touched.begin(), touched.end());
  for (std::uint32_t j : touched) {
    HyperedgeId e(j);
    if (roles_[j] == role && members_[j] == known) {
      sub.target = e;  // same key as a built hyperedge
      continue;
    }
    sub.neighbors.push_back(make_slot(e, collapse(mask[j]), eta2, rng));
    sub.neighbor_mask.push_back(1);
  }
  return sub;
}

void Hypergraph::dump(std::ostream& out) const {
  for (std::size_t i = 0; i < adjacency_.size(); ++i) {
    for (const auto& nb : adjacency_[i]) {
      for (int t = 0; t < kNumSharingTypes; ++t) {
        auto type = static_cast<SharingType>(t);
        if (nb.types & bit(type)) {
          out << i << '\t' << nb.edge.value << '\t' << sharing_name(type) << '\n';
        }
      }
    }
  }
}

}  // namespace enzkg
