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

#include "enzkg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace enzkg {

void SyntheticSpec::validate() const {
  if (num_compounds == 0 || num_enzymes == 0 || num_complete == 0) {
    throw ConfigError("synthetic spec needs positive compound, enzyme and equation counts");
  }
  for (double f : {symmetric_fraction, inverse_fraction, heldout_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("synthetic fractions must lie in [0, 1]");
  }
  if (mean_educts < 1.0 || mean_products < 1.0) {
    throw ConfigError("mean educt and product set sizes must be at least 1");
  }
  if (pool_size < 2 || pool_size > num_compounds) {
    throw ConfigError("pool_size must lie in [2, num_compounds]");
  }
}

namespace {

enum class Kind { kPlain, kSymmetric, kInverse };

struct Unit {
  Kind kind = Kind::kPlain;
  EnzymeId first;
  EnzymeId second;
  std::size_t triples() const { return kind == Kind::kPlain ? 1 : 2; }
};

std::vector<CompoundId> draw_set(const std::vector<CompoundId>& pool, double mean,
                                 const std::vector<CompoundId>& exclude, Rng& rng) {
  std::vector<CompoundId> avail;
  for (CompoundId c : pool) {
    if (!std::binary_search(exclude.begin(), exclude.end(), c)) avail.push_back(c);
  }
  std::poisson_distribution<int> extra(mean - 1.0);
  std::size_t size = 1 + static_cast<std::size_t>(mean > 1.0 ? extra(rng) : 0);
  size = std::min(size, avail.size());
  std::vector<CompoundId> out;
  std::sample(avail.begin(), avail.end(), std::back_inserter(out), size, rng);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

SyntheticKG generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng = make_rng(spec.seed, "synth");
  SyntheticKG out;
  EquationKG& kg = out.kg;
  for (std::size_t c = 0; c < spec.num_compounds; ++c) kg.compounds().intern("c" + std::to_string(c + 1));
  for (std::size_t m = 0; m < spec.num_enzymes; ++m) kg.enzymes().intern("e" + std::to_string(m + 1));

  std::vector<CompoundId> all(spec.num_compounds);
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = CompoundId(static_cast<std::uint32_t>(c));
  std::vector<std::vector<CompoundId>> educt_pool(spec.num_enzymes);
  std::vector<std::vector<CompoundId>> product_pool(spec.num_enzymes);
  for (std::size_t m = 0; m < spec.num_enzymes; ++m) {
    std::sample(all.begin(), all.end(), std::back_inserter(educt_pool[m]), spec.pool_size, rng);
    std::sample(all.begin(), all.end(), std::back_inserter(product_pool[m]), spec.pool_size, rng);
  }

  std::vector<EnzymeId> order(spec.num_enzymes);
  for (std::size_t m = 0; m < order.size(); ++m) order[m] = EnzymeId(static_cast<std::uint32_t>(m));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_sym = static_cast<std::size_t>(std::llround(spec.symmetric_fraction * spec.num_enzymes));
  const auto n_inv = static_cast<std::size_t>(
      std::floor(spec.inverse_fraction * static_cast<double>(spec.num_enzymes) / 2.0));
  if (n_sym + 2 * n_inv > spec.num_enzymes) {
    throw ConfigError("symmetric and inverse fractions exceed the enzyme count");
  }
  std::vector<Unit> units;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n_sym; ++i) {
    out.symmetric.push_back(order[next]);
    units.push_back({Kind::kSymmetric, order[next], order[next]});
    ++next;
  }
  for (std::size_t i = 0; i < n_inv; ++i) {
    EnzymeId a = order[next++];
    EnzymeId b = order[next++];
    // The partner's pools mirror the first enzyme's.
    educt_pool[b.index()] = product_pool[a.index()];
    product_pool[b.index()] = educt_pool[a.index()];
    out.inverse_pairs.emplace_back(a, b);
    units.push_back({Kind::kInverse, a, b});
  }
  while (next < order.size()) units.push_back({Kind::kPlain, order[next], order[next++]});
  for (auto& pool : educt_pool) std::sort(pool.begin(), pool.end());
  for (auto& pool : product_pool) std::sort(pool.begin(), pool.end());

  std::size_t quota = 0;
  for (const Unit& u : units) quota += u.triples();
  if (spec.num_complete < quota) {
    throw ConfigError("num_complete " + std::to_string(spec.num_complete) +
                      " below the pattern quota of " + std::to_string(quota));
  }
  const bool any_plain =
      std::any_of(units.begin(), units.end(), [](const Unit& u) { return u.kind == Kind::kPlain; });
  if (!any_plain && spec.num_complete % 2 != 0) {
    throw ConfigError("every enzyme emits triples in pairs; num_complete must be even");
  }

  std::bernoulli_distribution hold(spec.heldout_fraction);
  const std::size_t max_attempts = 1000 * spec.num_complete + 1000;
  std::size_t attempts = 0;
  std::size_t u = 0;
  while (kg.complete().size() < spec.num_complete) {
    if (++attempts > max_attempts) {
      throw ConfigError("cannot draw " + std::to_string(spec.num_complete) +
                        " distinct equations from the compound pools");
    }
    const Unit& unit = units[u % units.size()];
    ++u;
    const std::size_t remaining = spec.num_complete - kg.complete().size();
    if (unit.triples() > remaining) continue;
    const auto m = unit.first.index();
    auto s = draw_set(educt_pool[m], spec.mean_educts, {}, rng);
    auto p = draw_set(product_pool[m], spec.mean_products, s, rng);
    if (s.empty() || p.empty()) continue;
    if (unit.kind == Kind::kPlain) {
      kg.add(s, unit.first, p);
      continue;
    }
    // Both triples must be new, or neither is added.
    const bool self_swap = unit.kind == Kind::kSymmetric && s == p;
    if (self_swap) continue;
    const std::size_t before = kg.complete().size();
    if (!kg.add(s, unit.first, p)) continue;
    if (!kg.add(p, unit.second, s)) {
      throw Error("synthetic generator drew a pattern partner that already exists");
    }
    if (hold(rng)) out.heldout.push_back(before + 1);
  }

  std::uniform_int_distribution<std::size_t> pick(0, spec.num_enzymes - 1);
  attempts = 0;
  std::size_t added = 0;
  while (added < spec.num_incomplete) {
    if (++attempts > 1000 * spec.num_incomplete + 1000) {
      throw ConfigError("cannot draw " + std::to_string(spec.num_incomplete) +
                        " distinct incomplete equations");
    }
    const std::size_t m = pick(rng);
    auto s = draw_set(educt_pool[m], spec.mean_educts, {}, rng);
    auto p = draw_set(product_pool[m], spec.mean_products, s, rng);
    if (s.empty() || p.empty()) continue;
    if (kg.add(std::move(s), std::nullopt, std::move(p))) ++added;
  }
  kg.finalize();
  return out;
}

std::vector<std::string> check_pattern_closure(
    const EquationKG& kg, const std::vector<EnzymeId>& symmetric,
    const std::vector<std::pair<EnzymeId, EnzymeId>>& inverse_pairs) {
  std::vector<std::string> violations;
  const auto& triples = kg.complete();
  auto has = [&](const std::vector<CompoundId>& s, EnzymeId m, const std::vector<CompoundId>& p) {
    for (const EquationTriple& t : triples) {
      if (*t.enzyme == m && t.educts == s && t.products == p) return true;
    }
    return false;
  };
  for (const EquationTriple& t : triples) {
    const EnzymeId m = *t.enzyme;
    if (std::find(symmetric.begin(), symmetric.end(), m) != symmetric.end() &&
        !has(t.products, m, t.educts)) {
      violations.push_back("symmetric " + kg.format(t) + " lacks its swap");
    }
    for (const auto& [a, b] : inverse_pairs) {
      if (m == a && !has(t.products, b, t.educts)) {
        violations.push_back("inverse " + kg.format(t) + " lacks its partner under " +
                             kg.enzymes().name(b));
      }
      if (m == b && !has(t.products, a, t.educts)) {
        violations.push_back("inverse " + kg.format(t) + " lacks its partner under " +
                             kg.enzymes().name(a));
      }
    }
  }
  return violations;
}

}  // namespace enzkg
