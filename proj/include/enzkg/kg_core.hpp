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

#ifndef ENZKG_KG_CORE_HPP_
#define ENZKG_KG_CORE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "enzkg/common.hpp"

namespace enzkg {

// Bijective mapping between external identifiers and dense ids, in
// first-seen order.
template <typename IdT>
class Interner {
 public:
  IdT intern(std::string_view name) {
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return it->second;
    IdT id(static_cast<std::uint32_t>(names_.size()));
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
  }

  std::optional<IdT> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& name(IdT id) const { return names_.at(id.index()); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, IdT> index_;
};

enum class Role : std::uint8_t { kEduct = 0, kProduct = 1 };

const char* role_name(Role role);

// One reaction <S, m, P>. Compound lists are sorted by id and duplicate free.
// The hyperedge ids are assigned by EquationKG::finalize().
struct EquationTriple {
  std::vector<CompoundId> educts;
  std::optional<EnzymeId> enzyme;
  std::vector<CompoundId> products;
  HyperedgeId educt_edge{};
  HyperedgeId product_edge{};

  bool complete() const { return enzyme.has_value(); }
};

struct HyperedgeKey {
  Role role = Role::kEduct;
  std::vector<CompoundId> compounds;  // sorted

  friend bool operator==(const HyperedgeKey&, const HyperedgeKey&) = default;
};

struct HyperedgeKeyHash {
  std::size_t operator()(const HyperedgeKey& key) const noexcept;
};

// Distinct (role, compound set) keys across all equations, complete and
// incomplete.
class HyperedgeUniverse {
 public:
  HyperedgeId insert(HyperedgeKey key);
  std::optional<HyperedgeId> find(const HyperedgeKey& key) const;
  const HyperedgeKey& key(HyperedgeId id) const { return keys_.at(id.index()); }
  std::size_t size() const { return keys_.size(); }
  const std::vector<HyperedgeKey>& keys() const { return keys_; }

 private:
  std::vector<HyperedgeKey> keys_;
  std::unordered_map<HyperedgeKey, HyperedgeId, HyperedgeKeyHash> index_;
};

// The equation knowledge graph: complete equations Q, incomplete Q', the
// entity tables and the hyperedge universe E = S u P.
class EquationKG {
 public:
  Interner<CompoundId>& compounds() { return compounds_; }
  const Interner<CompoundId>& compounds() const { return compounds_; }
  Interner<EnzymeId>& enzymes() { return enzymes_; }
  const Interner<EnzymeId>& enzymes() const { return enzymes_; }

  // Adds an equation, sorting and deduplicating its compound lists. Returns
  // false (and bumps duplicate_count) when the identical triple is already
  // present. Throws Error on an empty side.
  bool add(std::vector<CompoundId> educts, std::optional<EnzymeId> enzyme,
           std::vector<CompoundId> products);

  // Interns the names and adds the equation.
  bool add_named(std::span<const std::string> educts,
                 std::optional<std::string_view> enzyme,
                 std::span<const std::string> products);

  // Assigns hyperedge ids to every equation. Called by the parsers; must be
  // called again after further add() calls.
  void finalize();

  const std::vector<EquationTriple>& complete() const { return complete_; }
  const std::vector<EquationTriple>& incomplete() const { return incomplete_; }
  const HyperedgeUniverse& hyperedges() const { return universe_; }
  std::size_t duplicate_count() const { return duplicates_; }

  // Membership of a compound in S u P (complete equations) and S' u P'.
  bool in_complete(CompoundId c) const;
  bool in_incomplete(CompoundId c) const;

  std::string format(const EquationTriple& triple) const;

 private:
  Interner<CompoundId> compounds_;
  Interner<EnzymeId> enzymes_;
  std::vector<EquationTriple> complete_;
  std::vector<EquationTriple> incomplete_;
  HyperedgeUniverse universe_;
  std::vector<bool> in_complete_;
  std::vector<bool> in_incomplete_;
  std::size_t duplicates_ = 0;
  std::unordered_map<std::string, bool> seen_;
};

enum class EquationFormat { kTsv, kJson };

// Reads equations into kg (which may already hold interned entities; new
// names are appended). Returns the number of rows read.
std::size_t read_equations(std::istream& in, EquationFormat format,
                           EquationKG& kg);
EquationKG parse_equation_file(const std::filesystem::path& path,
                               EquationFormat format);
EquationFormat format_from_path(const std::filesystem::path& path);

void write_equation_tsv(std::ostream& out, const EquationKG& kg,
                        std::span<const EquationTriple> triples);

struct SplitSpec {
  double train = 8.0;
  double valid = 1.0;
  double test = 1.0;
  std::uint64_t seed = 0;
};

// Indices into EquationKG::complete().
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

// Partition of the complete equations. Indices in forced_test always land in
// the test split (filling it first); the rest is shuffled by spec.seed.
Split split(const EquationKG& kg, const SplitSpec& spec,
            std::span<const std::size_t> forced_test = {});

// <educt hyperedge, enzyme, product hyperedge>.
struct TripleKey {
  HyperedgeId head;
  EnzymeId relation;
  HyperedgeId tail;

  friend bool operator==(const TripleKey&, const TripleKey&) = default;
};

struct TripleKeyHash {
  std::size_t operator()(const TripleKey& key) const noexcept;
};

inline TripleKey key_of(const EquationTriple& t) {
  return {t.educt_edge, *t.enzyme, t.product_edge};
}

// Known true triples, queried when filtering negatives and rankings.
class TrueTripleSet {
 public:
  // Every complete equation of kg (all splits).
  static TrueTripleSet from(const EquationKG& kg);

  void insert(const TripleKey& key);
  bool contains(const TripleKey& key) const { return triples_.contains(key); }
  // Enzymes m with <head, m, tail> known, ascending.
  std::span<const EnzymeId> relations(HyperedgeId head, HyperedgeId tail) const;
  std::size_t size() const { return triples_.size(); }

 private:
  static std::uint64_t pair_key(HyperedgeId head, HyperedgeId tail) {
    return (static_cast<std::uint64_t>(head.value) << 32) | tail.value;
  }
  std::unordered_set<TripleKey, TripleKeyHash> triples_;
  std::unordered_map<std::uint64_t, std::vector<EnzymeId>> by_pair_;
};

// (role, sorted compounds) -> hyperedge id over Q and Q'.
const HyperedgeUniverse& hyperedge_universe(const EquationKG& kg);

}  // namespace enzkg

#endif  // ENZKG_KG_CORE_HPP_
