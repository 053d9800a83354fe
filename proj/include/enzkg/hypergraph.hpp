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

#ifndef ENZKG_HYPERGRAPH_HPP_
#define ENZKG_HYPERGRAPH_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "enzkg/common.hpp"
#include "enzkg/kg_core.hpp"

namespace enzkg {

enum class SharingType : std::uint8_t {
  kEductSharing = 0,
  kProductSharing = 1,
  kCrossSharing = 2,
};

inline constexpr int kNumSharingTypes = 3;
// Edge-type table slot for compound -> hyperedge membership.
inline constexpr int kMembershipSlot = 3;
inline constexpr int kNumEdgeTypeSlots = 4;

// Bit set over SharingType; a hyperedge pair may share through several.
using SharingMask = std::uint8_t;

constexpr SharingMask bit(SharingType t) {
  return static_cast<SharingMask>(1u << static_cast<unsigned>(t));
}

// Sharing type implied by the roles of two overlapping hyperedges.
SharingType sharing_type(Role a, Role b);

const char* sharing_name(SharingType t);

struct TypedNeighbor {
  HyperedgeId edge;
  SharingMask types = 0;
};

// One hyperedge of a sampled neighbourhood with up to eta2 compounds. Slots
// whose mask entry is 0 are padding and carry no meaning.
struct HyperedgeSlot {
  HyperedgeId edge;
  SharingMask types = 0;
  std::vector<CompoundId> compounds;
  std::vector<std::uint8_t> compound_mask;
};

struct SubHypergraph {
  // Absent when the target was attached at test time and is not part of
  // the built universe.
  std::optional<HyperedgeId> target;
  Role role = Role::kEduct;
  std::vector<CompoundId> target_compounds;
  std::vector<std::uint8_t> target_mask;
  std::vector<HyperedgeSlot> neighbors;
  std::vector<std::uint8_t> neighbor_mask;

  std::size_t neighbor_count() const;
};

// Two-level hypergraph: incidence H(1) between compounds and hyperedges, and
// the typed hyperedge adjacency H(2). Immutable after build().
class Hypergraph {
 public:
  // With homogeneous set, every sharing edge is stored with the single type
  // kEductSharing so the encoder sees one relation.
  static Hypergraph build(const EquationKG& kg, bool homogeneous = false);

  std::size_t num_compounds() const { return compound_edges_.size(); }
  std::size_t num_hyperedges() const { return members_.size(); }
  bool homogeneous() const { return homogeneous_; }

  Role role(HyperedgeId e) const { return roles_.at(e.index()); }
  // H(1) column: sorted member compounds of e.
  std::span<const CompoundId> members(HyperedgeId e) const { return members_.at(e.index()); }
  // H(1) row: hyperedges containing c, ascending.
  std::span<const HyperedgeId> edges_of(CompoundId c) const {
    return compound_edges_.at(c.index());
  }
  bool incident(CompoundId c, HyperedgeId e) const;

  // H(2) row of e, ascending by neighbour id.
  std::span<const TypedNeighbor> neighbors(HyperedgeId e) const {
    return adjacency_.at(e.index());
  }
  SharingMask edge_types(HyperedgeId i, HyperedgeId j) const;
  std::size_t num_typed_edges() const;

  SubHypergraph sample_neighborhood(HyperedgeId target, std::size_t eta1,
                                    std::size_t eta2, Rng& rng) const;

  // Neighbourhood of a compound set that may not be in the universe. All
  // hyperedges overlapping the set become neighbours, except one with the
  // identical key. Compounds outside the table are dropped and counted in
  // dropped (when given); if none remain an OutOfVocabularyError is thrown.
  SubHypergraph attach_test_hyperedge(std::span<const CompoundId> compounds, Role role,
                                      std::size_t eta2, Rng& rng,
                                      std::size_t* dropped = nullptr) const;

  // One line per typed edge: i <TAB> j <TAB> type.
  void dump(std::ostream& out) const;

 private:
  SharingMask collapse(SharingMask m) const;
  HyperedgeSlot make_slot(HyperedgeId e, SharingMask types, std::size_t eta2, Rng& rng) const;

  bool homogeneous_ = false;
  std::vector<Role> roles_;
  std::vector<std::vector<CompoundId>> members_;
  std::vector<std::vector<HyperedgeId>> compound_edges_;
  std::vector<std::vector<TypedNeighbor>> adjacency_;
};

}  // namespace enzkg

#endif  // ENZKG_HYPERGRAPH_HPP_
