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

#ifndef ENZKG_ENCODER_HPP_
#define ENZKG_ENCODER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "enzkg/common.hpp"
#include "enzkg/diffmath.hpp"
#include "enzkg/hypergraph.hpp"

namespace enzkg {

// One transformer block: single-head attention, post-norm residuals and a
// two-layer feed-forward with biases.
struct EncoderLayer {
  diff::Parameter query;
  diff::Parameter key;
  diff::Parameter value;
  diff::Parameter norm1_gain;
  diff::Parameter norm1_shift;
  diff::Parameter ff_in;
  diff::Parameter ff_in_bias;
  diff::Parameter ff_out;
  diff::Parameter ff_out_bias;
  diff::Parameter norm2_gain;
  diff::Parameter norm2_shift;
};

struct EncoderParams {
  std::size_t dim = 0;
  std::size_t hidden = 0;
  // Compound features x_v, one row per compound.
  diff::Parameter features;
  // Rows: educt-, product-, cross-sharing, compound membership.
  diff::Parameter edge_types;
  std::vector<EncoderLayer> layers;

  std::vector<diff::Parameter*> parameters();
  // Parameters subject to L2 regularisation (compound features).
  std::vector<diff::Parameter*> regularized();
};

// Weights, biases, features and edge-type rows ~ U[-1/sqrt(dim), 1/sqrt(dim)];
// layer-norm gains start at 1 and shifts at 0. hidden == 0 means 2 * dim.
EncoderParams init_encoder_params(std::size_t num_compounds, std::size_t dim,
                                  std::size_t hidden, std::size_t layers, Rng& rng);

// Bits 0-2 follow SharingType, bit 3 is compound membership.
using EdgeTypeSet = std::uint8_t;
inline constexpr EdgeTypeSet kMembershipBit = 1u << kMembershipSlot;

struct EncodeOptions {
  // Dropout on attention weights and the feed-forward hidden layer; needs rng.
  double dropout = 0.0;
  Rng* rng = nullptr;
  // Embeddings whose L2 norm exceeds this are rejected.
  double norm_cap = 1e6;
  // Treat every sharing edge as one relation (edge-type row 0).
  bool homogeneous = false;
};

// Attention weights of the last layer_forward call, over unmasked slots.
struct LayerTrace {
  diff::Tensor attention;
};

// h' = LN2(x + FF(x)), x = LN1(h + sum_j a_j V(h_j + r_ij)),
// a = softmax_j(Q(h) . K(h_j + r_ij) / sqrt(n)) over unmasked j.
// neighbor_states is [k, n] (or invalid when k = 0); r_ij is the sum of the
// edge-type rows named by edge_types[j]. With no unmasked neighbour the
// attention term is dropped.
diff::Var layer_forward(diff::Graph& graph, EncoderParams& params, std::size_t layer,
                        diff::Var target_state, diff::Var neighbor_states,
                        std::span<const EdgeTypeSet> edge_types,
                        std::span<const std::uint8_t> mask, const EncodeOptions& options = {},
                        LayerTrace* trace = nullptr);

// Target embedding of a sampled sub-hypergraph. Hyperedge states start as the
// mean of their sampled compound features; each layer updates the target
// from its neighbour hyperedges (typed sharing edges) and its own compounds
// (membership edges), and updates neighbour hyperedges from their compounds.
diff::Var encode(diff::Graph& graph, EncoderParams& params, const SubHypergraph& sub,
                 const EncodeOptions& options = {});

// Mean of the member compound features; no neighbour structure.
diff::Var mean_pool_encode(diff::Graph& graph, EncoderParams& params,
                           std::span<const CompoundId> members);

struct HyperedgeEmbedding {
  diff::Tensor vector;
  std::optional<HyperedgeId> edge;
  std::size_t layer = 0;
};

// Forward pass without gradient recording.
HyperedgeEmbedding embed(EncoderParams& params, const SubHypergraph& sub,
                         const EncodeOptions& options = {});

}  // namespace enzkg

#endif  // ENZKG_ENCODER_HPP_
