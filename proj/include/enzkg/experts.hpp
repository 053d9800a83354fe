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

#ifndef ENZKG_EXPERTS_HPP_
#define ENZKG_EXPERTS_HPP_

#include <array>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "enzkg/common.hpp"
#include "enzkg/kg_core.hpp"
#include "enzkg/model.hpp"

namespace enzkg {

enum class ExpertId : std::uint8_t { kKB = 0, kHyperEnz = 1, kML = 2 };
inline constexpr std::size_t kNumExperts = 3;
const char* to_string(ExpertId id);

// Per-enzyme logits of one expert for one substrate. Enzyme ids refer to the
// catalogue the expert was queried with.
struct ExpertOutput {
  ExpertId expert = ExpertId::kKB;
  std::map<EnzymeId, double> logits;

  bool covered() const { return !logits.empty(); }
};

// Expert-logit table: substrate -> (enzyme, logit) rows in file order.
struct MlLogitTable {
  std::unordered_map<std::string, std::vector<std::pair<std::string, double>>> rows;
  std::vector<std::string> warnings;
};

// TSV with columns substrate, enzyme, logit; an optional header row and '#'
// comments are skipped. A repeated (substrate, enzyme) pair replaces the
// earlier logit and records a warning.
MlLogitTable read_ml_logits(std::istream& in);
MlLogitTable read_ml_logits_file(const std::filesystem::path& path);

// Match counts over the complete equations containing the substrate on
// either side. Ids are those of kb.enzymes().
ExpertOutput kb_expert(std::string_view substrate, const EquationKG& kb);

enum class Aggregation { kMax, kMean, kSum };
Aggregation parse_aggregation(std::string_view s);

// Relation prediction for every equation of kb (complete and incomplete)
// containing the substrate; logits are negated distances combined per enzyme
// by agg. Compound sets are mapped into the model vocabulary by name, and an
// equation whose side has no known compound is skipped. Enzyme names are
// interned into catalog.
ExpertOutput hyperenz_expert(std::string_view substrate, const EquationKG& kb, Model& model,
                             Interner<EnzymeId>& catalog, Aggregation agg = Aggregation::kMax);

// The substrate's row of the table, enzymes interned into catalog.
ExpertOutput ml_expert(std::string_view substrate, const MlLogitTable& table,
                       Interner<EnzymeId>& catalog);

// Experts enabled by where the substrate occurs: S u P (complete equations)
// enables KB, S' u P' (incomplete) enables HyperEnz; ML is always enabled.
struct Route {
  bool kb = false;
  bool hyperenz = false;
  bool ml = true;

  bool enabled(ExpertId id) const;
  friend bool operator==(const Route&, const Route&) = default;
};

Route route(std::string_view substrate, const EquationKG& kb);

struct FusionWeights {
  std::array<double, kNumExperts> w{1.0, 1.0, 1.0};

  double operator[](ExpertId id) const { return w[static_cast<std::size_t>(id)]; }
  // Non-negative with at least one positive entry; throws ConfigError.
  void validate() const;
};

// "w1,w2,w3".
FusionWeights parse_weights(std::string_view text);
// The published weight grid.
std::vector<FusionWeights> default_weight_grid();

struct RankedEnzyme {
  EnzymeId enzyme;
  double fused = 0.0;
  double probability = 0.0;
};

// z-scores each covered expert over its own logits (population standard
// deviation; constant logits give 0), sums them with weights renormalised
// over the covered experts, and applies a softmax over every enzyme scored
// by some covered expert. Returns the top k (k = 0: all) by probability,
// ties broken by ascending enzyme id. Throws Error("no expert fired") when
// nothing is covered.
std::vector<RankedEnzyme> fuse(const std::vector<ExpertOutput>& outputs,
                               const FusionWeights& weights, std::size_t k);

struct SubstratePrediction {
  Route route;
  std::vector<ExpertOutput> outputs;  // routed experts with an available source
  std::vector<RankedEnzyme> ranking;
  Interner<EnzymeId> catalog;
};

// Routes the substrate and fuses the experts whose source is given (model
// and table may be null).
SubstratePrediction predict_substrate(std::string_view substrate, const EquationKG& kb,
                                      Model* model, const MlLogitTable* table,
                                      const FusionWeights& weights, std::size_t k,
                                      Aggregation agg = Aggregation::kMax);

}  // namespace enzkg

#endif  // ENZKG_EXPERTS_HPP_
