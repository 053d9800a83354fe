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

#include "enzkg/kg_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace enzkg {

Rng make_rng(std::uint64_t seed, std::string_view stream) {
  // FNV-1a of the stream name, mixed into the seed sequence.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : stream) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h),
                    static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

const char* role_name(Role role) {
  return role == Role::kEduct ? "educt" : "product";
}

std::size_t HyperedgeKeyHash::operator()(const HyperedgeKey& key) const noexcept {
  std::size_t h = static_cast<std::size_t>(key.role) * 0x9e3779b97f4a7c15ULL;
  for (CompoundId c : key.compounds) {
    h ^= std::hash<CompoundId>{}(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

HyperedgeId HyperedgeUniverse::insert(HyperedgeKey key) {
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  HyperedgeId id(static_cast<std::uint32_t>(keys_.size()));
  index_.emplace(key, id);
  keys_.push_back(std::move(key));
  return id;
}

std::optional<HyperedgeId> HyperedgeUniverse::find(const HyperedgeKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

void canonicalize(std::vector<CompoundId>& set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
}

std::string triple_key(const std::vector<CompoundId>& educts,
                       std::optional<EnzymeId> enzyme,
                       const std::vector<CompoundId>& products) {
  std::string key;
  for (CompoundId c : educts) key += std::to_string(c.value) + ",";
  key += enzyme ? "|" + std::to_string(enzyme->value) + "|" : "|?|";
  for (CompoundId c : products) key += std::to_string(c.value) + ",";
  return key;
}

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> compound_list(std::string_view field) {
  std::vector<std::string> out;
  for (auto& token : split_on(field, ';')) {
    auto t = trim(token);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

bool EquationKG::add(std::vector<CompoundId> educts,
                     std::optional<EnzymeId> enzyme,
                     std::vector<CompoundId> products) {
  if (educts.empty()) throw Error("equation has no educts");
  if (products.empty()) throw Error("equation has no products");
  canonicalize(educts);
  canonicalize(products);
  for (auto ids : {&educts, &products}) {
    for (CompoundId c : *ids) {
      if (c.index() >= compounds_.size()) throw Error("compound id not interned");
    }
  }
  if (enzyme && enzyme->index() >= enzymes_.size()) {
    throw Error("enzyme id not interned");
  }
  auto [it, inserted] = seen_.emplace(triple_key(educts, enzyme, products), true);
  if (!inserted) {
    ++duplicates_;
    return false;
  }
  EquationTriple triple{std::move(educts), enzyme, std::move(products), {}, {}};
  (enzyme ? complete_ : incomplete_).push_back(std::move(triple));
  return true;
}

bool EquationKG::add_named(std::span<const std::string> educts,
                           std::optional<std::string_view> enzyme,
                           std::span<const std::string> products) {
  std::vector<CompoundId> s, p;
  for (const auto& name : educts) s.push_back(compounds_.intern(name));
  for (const auto& name : products) p.push_back(compounds_.intern(name));
  std::optional<EnzymeId> m;
  if (enzyme) m = enzymes_.intern(*enzyme);
  return add(std::move(s), m, std::move(p));
}

void EquationKG::finalize() {
  in_complete_.assign(compounds_.size(), false);
  in_incomplete_.assign(compounds_.size(), false);
  auto assign = [&](std::vector<EquationTriple>& triples, std::vector<bool>& seen) {
    for (auto& t : triples) {
      t.educt_edge = universe_.insert({Role::kEduct, t.educts});
      t.product_edge = universe_.insert({Role::kProduct, t.products});
      for (CompoundId c : t.educts) seen[c.index()] = true;
      for (CompoundId c : t.products) seen[c.index()] = true;
    }
  };
  assign(complete_, in_complete_);
  assign(incomplete_, in_incomplete_);
}

bool EquationKG::in_complete(CompoundId c) const {
  return c.index() < in_complete_.size() && in_complete_[c.index()];
}

bool EquationKG::in_incomplete(CompoundId c) const {
  return c.index() < in_incomplete_.size() && in_incomplete_[c.index()];
}

std::string EquationKG::format(const EquationTriple& triple) const {
  auto join = [&](const std::vector<CompoundId>& ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i) s += ';';
      s += compounds_.name(ids[i]);
    }
    return s;
  };
  return join(triple.educts) + "\t" +
         (triple.enzyme ? enzymes_.name(*triple.enzyme) : std::string("?")) +
         "\t" + join(triple.products);
}

std::size_t read_equations(std::istream& in, EquationFormat format,
                           EquationKG& kg) {
  std::size_t rows = 0;
  if (format == EquationFormat::kJson) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(0, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError(0, "expected a JSON array of equations");
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto& entry = doc[i];
      // JSON entries are reported 1-based, like TSV lines.
      const std::size_t line = i + 1;
      try {
        auto educts = entry.at("educts").get<std::vector<std::string>>();
        auto products = entry.at("products").get<std::vector<std::string>>();
        std::optional<std::string> enzyme;
        if (!entry.at("enzyme").is_null()) enzyme = entry.at("enzyme").get<std::string>();
        std::erase_if(educts, [](const std::string& s) { return s.empty(); });
        std::erase_if(products, [](const std::string& s) { return s.empty(); });
        if (educts.empty() || products.empty()) {
          throw ParseError(line, "empty compound list");
        }
        kg.add_named(educts, enzyme, products);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(line, std::string("malformed equation entry: ") + e.what());
      }
      ++rows;
    }
  } else {
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      auto stripped = trim(raw);
      if (stripped.empty() || stripped.front() == '#') continue;
      auto columns = split_on(raw, '\t');
      if (columns.size() != 3) {
        throw ParseError(line, "expected 3 tab-separated columns, found " +
                                   std::to_string(columns.size()));
      }
      auto educts = compound_list(columns[0]);
      auto products = compound_list(columns[2]);
      auto enzyme = trim(columns[1]);
      if (educts.empty() || products.empty()) {
        throw ParseError(line, "empty compound list");
      }
      if (enzyme.empty()) throw ParseError(line, "empty enzyme field (use '?')");
      std::optional<std::string_view> m;
      if (enzyme != "?") m = enzyme;
      kg.add_named(educts, m, products);
      ++rows;
    }
  }
  kg.finalize();
  return rows;
}

EquationFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".json" ? EquationFormat::kJson : EquationFormat::kTsv;
}

EquationKG parse_equation_file(const std::filesystem::path& path,
                               EquationFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open equation file " + path.string());
  EquationKG kg;
  read_equations(in, format, kg);
  return kg;
}

void write_equation_tsv(std::ostream& out, const EquationKG& kg,
                        std::span<const EquationTriple> triples) {
  for (const auto& t : triples) out << kg.format(t) << '\n';
}

Split split(const EquationKG& kg, const SplitSpec& spec,
            std::span<const std::size_t> forced_test) {
  const std::size_t n = kg.complete().size();
  if (n < 10) {
    throw Error("split needs at least 10 complete equations, got " + std::to_string(n));
  }
  if (!(spec.train > 0 && spec.valid > 0 && spec.test > 0)) {
    throw ConfigError("split ratios must be positive");
  }
  const double total = spec.train + spec.valid + spec.test;
  std::size_t n_valid = static_cast<std::size_t>(std::llround(n * spec.valid / total));
  std::size_t n_test = static_cast<std::size_t>(std::llround(n * spec.test / total));

  std::vector<bool> forced(n, false);
  for (std::size_t i : forced_test) {
    if (i >= n) throw Error("forced test index out of range");
    forced[i] = true;
  }
  Split out;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    (forced[i] ? out.test : pool).push_back(i);
  }
  Rng rng = make_rng(spec.seed, "split");
  std::shuffle(pool.begin(), pool.end(), rng);
  std::size_t cursor = 0;
  while (out.test.size() < n_test && cursor < pool.size()) out.test.push_back(pool[cursor++]);
  while (out.valid.size() < n_valid && cursor < pool.size()) out.valid.push_back(pool[cursor++]);
  out.train.assign(pool.begin() + static_cast<std::ptrdiff_t>(cursor), pool.end());
  return out;
}

std::size_t TripleKeyHash::operator()(const TripleKey& key) const noexcept {
  std::uint64_t h = (static_cast<std::uint64_t>(key.head.value) << 32) ^ key.tail.value;
  h ^= static_cast<std::uint64_t>(key.relation.value) * 0x9e3779b97f4a7c15ULL;
  return std::hash<std::uint64_t>{}(h);
}

TrueTripleSet TrueTripleSet::from(const EquationKG& kg) {
  TrueTripleSet set;
  for (const auto& t : kg.complete()) set.insert(key_of(t));
  return set;
}

void TrueTripleSet::insert(const TripleKey& key) {
  if (!triples_.insert(key).second) return;
  auto& list = by_pair_[pair_key(key.head, key.tail)];
  list.insert(std::upper_bound(list.begin(), list.end(), key.relation), key.relation);
}

std::span<const EnzymeId> TrueTripleSet::relations(HyperedgeId head, HyperedgeId tail) const {
  auto it = by_pair_.find(pair_key(head, tail));
  if (it == by_pair_.end()) return {};
  return it->second;
}

const HyperedgeUniverse& hyperedge_universe(const EquationKG& kg) {
  return kg.hyperedges();
}

}  // namespace enzkg
