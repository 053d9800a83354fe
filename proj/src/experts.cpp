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

#include "enzkg/experts.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace enzkg {

const char* to_string(ExpertId id) {
  switch (id) {
    case ExpertId::kKB:
      return "kb";
    case ExpertId::kHyperEnz:
      return "hyperenz";
    case ExpertId::kML:
      return "ml";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(trim(std::string_view(line).substr(start, tab - start)));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

bool contains(const std::vector<CompoundId>& ids, CompoundId c) {
  return std::binary_search(ids.begin(), ids.end(), c);
}

}  // namespace

MlLogitTable read_ml_logits(std::istream& in) {
  MlLogitTable table;
  std::unordered_map<std::string, std::size_t> position;
  std::string line;
  std::size_t number = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto cols = split_tabs(line);
    if (cols.size() != 3) throw ParseError(number, "expected 3 tab-separated columns");
    double logit = 0.0;
    const std::string& text = cols[2];
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), logit);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(logit)) {
      if (first && cols[0] == "substrate") {
        first = false;
        continue;
      }
      throw ParseError(number, "logit '" + text + "' is not a finite number");
    }
    first = false;
    if (cols[0].empty() || cols[1].empty()) throw ParseError(number, "empty substrate or enzyme");
    auto& rows = table.rows[cols[0]];
    const std::string key = cols[0] + '\t' + cols[1];
    if (auto it = position.find(key); it != position.end()) {
      rows[it->second].second = logit;
      table.warnings.push_back("line " + std::to_string(number) + ": duplicate row for (" +
                               cols[0] + ", " + cols[1] + "), keeping the last logit");
    } else {
      position.emplace(key, rows.size());
      rows.emplace_back(cols[1], logit);
    }
  }
  return table;
}

MlLogitTable read_ml_logits_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open logit table " + path.string());
  return read_ml_logits(in);
}

ExpertOutput kb_expert(std::string_view substrate, const EquationKG& kb) {
  ExpertOutput out{ExpertId::kKB, {}};
  const auto id = kb.compounds().find(substrate);
  if (!id) return out;
  for (const EquationTriple& t : kb.complete()) {
    if (contains(t.educts, *id) || contains(t.products, *id)) out.logits[*t.enzyme] += 1.0;
  }
  return out;
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "max") return Aggregation::kMax;
  if (s == "mean") return Aggregation::kMean;
  if (s == "sum") return Aggregation::kSum;
  throw ConfigError("unknown aggregation '" + std::string(s) + "' (max, mean, sum)");
}

ExpertOutput hyperenz_expert(std::string_view substrate, const EquationKG& kb, Model& model,
                             Interner<EnzymeId>& catalog, Aggregation agg) {
  ExpertOutput out{ExpertId::kHyperEnz, {}};
  const auto id = kb.compounds().find(substrate);
  if (!id) return out;
  auto to_model = [&](const std::vector<CompoundId>& ids) {
    std::vector<CompoundId> mapped;
    for (CompoundId c : ids) {
      if (auto m = model.kg.compounds().find(kb.compounds().name(c))) mapped.push_back(*m);
    }
    return mapped;
  };
  std::vector<EnzymeId> ids(model.num_enzymes());
  for (std::size_t m = 0; m < ids.size(); ++m) {
    ids[m] = catalog.intern(model.kg.enzymes().name(EnzymeId(static_cast<std::uint32_t>(m))));
  }
  std::size_t matched = 0;
  for (const auto* triples : {&kb.complete(), &kb.incomplete()}) {
    for (const EquationTriple& t : *triples) {
      if (!contains(t.educts, *id) && !contains(t.products, *id)) continue;
      const auto educts = to_model(t.educts);
      const auto products = to_model(t.products);
      if (educts.empty() || products.empty()) continue;
      const auto s = embed_compound_set(model, educts, Role::kEduct);
      const auto p = embed_compound_set(model, products, Role::kProduct);
      const auto d = enzyme_distances(model, s.data(), p.data());
      for (std::size_t m = 0; m < d.size(); ++m) {
        const double logit = -d[m];
        auto [it, fresh] = out.logits.emplace(ids[m], logit);
        if (fresh) continue;
        it->second = agg == Aggregation::kMax ? std::max(it->second, logit) : it->second + logit;
      }
      ++matched;
    }
  }
  if (agg == Aggregation::kMean && matched > 0) {
    for (auto& [m, v] : out.logits) v /= static_cast<double>(matched);
  }
  return out;
}

ExpertOutput ml_expert(std::string_view substrate, const MlLogitTable& table,
                       Interner<EnzymeId>& catalog) {
  ExpertOutput out{ExpertId::kML, {}};
  auto it = table.rows.find(std::string(substrate));
  if (it == table.rows.end()) return out;
  for (const auto& [enzyme, logit] : it->second) out.logits[catalog.intern(enzyme)] = logit;
  return out;
}

bool Route::enabled(ExpertId id) const {
  switch (id) {
    case ExpertId::kKB:
      return kb;
    case ExpertId::kHyperEnz:
      return hyperenz;
    case ExpertId::kML:
      return ml;
  }
  return false;
}

Route route(std::string_view substrate, const EquationKG& kb) {
  Route r;
  if (auto id = kb.compounds().find(substrate)) {
    r.kb = kb.in_complete(*id);
    r.hyperenz = kb.in_incomplete(*id);
  }
  return r;
}

void FusionWeights::validate() const {
  bool positive = false;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("fusion weights must be non-negative");
    positive |= x > 0.0;
  }
  if (!positive) throw ConfigError("at least one fusion weight must be positive");
}

FusionWeights parse_weights(std::string_view text) {
  FusionWeights fw;
  std::size_t k = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const std::string part = trim(text.substr(start, comma - start));
    if (k == kNumExperts) throw ConfigError("expected three weights, got more");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw ConfigError("bad weight '" + part + "'");
    }
    fw.w[k++] = v;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (k != kNumExperts) throw ConfigError("expected three weights w1,w2,w3");
  fw.validate();
  return fw;
}

std::vector<FusionWeights> default_weight_grid() {
  return {{{0.1, 0.1, 0.8}}, {{0.1, 0.3, 0.6}}, {{0.1, 0.7, 0.2}},
          {{0.3, 0.1, 0.6}}, {{0.4, 0.1, 0.5}}, {{0.7, 0.1, 0.2}}};
}

std::vector<RankedEnzyme> fuse(const std::vector<ExpertOutput>& outputs,
                               const FusionWeights& weights, std::size_t k) {
  double total_weight = 0.0;
  for (const auto& o : outputs) {
    if (o.covered()) total_weight += weights[o.expert];
  }
  bool any = std::any_of(outputs.begin(), outputs.end(), [](auto& o) { return o.covered(); });
  if (!any) throw Error("no expert fired");
  if (total_weight <= 0.0) throw ConfigError("every expert that fired has weight 0");

  std::map<EnzymeId, double> fused;
  for (const auto& o : outputs) {
    if (!o.covered()) continue;
    const double n = static_cast<double>(o.logits.size());
    double mu = 0.0;
    for (const auto& [m, z] : o.logits) mu += z;
    mu /= n;
    double var = 0.0;
    for (const auto& [m, z] : o.logits) var += (z - mu) * (z - mu);
    const double sigma = std::sqrt(var / n);
    const double w = weights[o.expert] / total_weight;
    for (const auto& [m, z] : o.logits) {
      const double zhat = sigma > 0.0 ? (z - mu) / sigma : 0.0;
      fused[m] += w * zhat;
    }
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& [m, s] : fused) peak = std::max(peak, s);
  double norm = 0.0;
  for (const auto& [m, s] : fused) norm += std::exp(s - peak);
  std::vector<RankedEnzyme> ranked;
  ranked.reserve(fused.size());
  for (const auto& [m, s] : fused) ranked.push_back({m, s, std::exp(s - peak) / norm});
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.enzyme < b.enzyme;
  });
  if (k > 0 && ranked.size() > k) ranked.resize(k);
  return ranked;
}

SubstratePrediction predict_substrate(std::string_view substrate, const EquationKG& kb,
                                      Model* model, const MlLogitTable* table,
                                      const FusionWeights& weights, std::size_t k,
                                      Aggregation agg) {
  SubstratePrediction out;
  out.catalog = kb.enzymes();
  out.route = route(substrate, kb);
  if (out.route.kb) out.outputs.push_back(kb_expert(substrate, kb));
  if (out.route.hyperenz && model) {
    out.outputs.push_back(hyperenz_expert(substrate, kb, *model, out.catalog, agg));
  }
  if (out.route.ml && table) out.outputs.push_back(ml_expert(substrate, *table, out.catalog));
  out.ranking = fuse(out.outputs, weights, k);
  return out;
}

}  // namespace enzkg
