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

#ifndef ENZKG_SYNTH_HPP_
#define ENZKG_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "enzkg/common.hpp"
#include "enzkg/kg_core.hpp"

namespace enzkg {

struct SyntheticSpec {
  std::size_t num_compounds = 50;
  std::size_t num_enzymes = 20;
  std::size_t num_complete = 200;
  std::size_t num_incomplete = 100;
  double mean_educts = 2.0;
  double mean_products = 2.0;
  // Compounds available to each enzyme on either side.
  std::size_t pool_size = 6;
  double symmetric_fraction = 0.0;
  double inverse_fraction = 0.0;
  // Share of pattern-completing triples listed as held out.
  double heldout_fraction = 0.2;
  std::uint64_t seed = 0;

  // Throws ConfigError for non-positive counts or fractions outside [0, 1].
  void validate() const;
};

struct SyntheticKG {
  EquationKG kg;
  std::vector<EnzymeId> symmetric;
  std::vector<std::pair<EnzymeId, EnzymeId>> inverse_pairs;
  // Indices into kg.complete() of held-out pattern-completing triples, each
  // the swapped partner of a triple that stays available for training.
  std::vector<std::size_t> heldout;
};

// Each enzyme draws its equations from its own educt and product compound
// pools. A symmetric enzyme emits <S, m, P> with <P, m, S>; an inverse pair
// (m1, m2) emits <S, m1, P> with <P, m2, S>. The incomplete equations are
// generated the same way and their enzyme removed. Throws ConfigError when
// the counts cannot hold the pattern quota.
SyntheticKG generate_synthetic(const SyntheticSpec& spec);

// Brute-force closure check over the complete equations; one message per
// violation.
std::vector<std::string> check_pattern_closure(const EquationKG& kg,
                                               const std::vector<EnzymeId>& symmetric,
                                               const std::vector<std::pair<EnzymeId, EnzymeId>>&
                                                   inverse_pairs);

}  // namespace enzkg

#endif  // ENZKG_SYNTH_HPP_
