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

#include "enzkg/encoder.hpp"

#include <cmath>
#include <random>
#include <string>

namespace enzkg {

using diff::Graph;
using diff::Parameter;
using diff::Shape;
using diff::Tensor;
using diff::Var;

std::vector<Parameter*> EncoderParams::parameters() {
  std::vector<Parameter*> out{&features, &edge_types};
  for (auto& l : layers) {
    for (Parameter* p : {&l.query, &l.key, &l.value, &l.norm1_gain, &l.norm1_shift, &l.ff_in,
                         &l.ff_in_bias, &l.ff_out, &l.ff_out_bias, &l.norm2_gain,
                         &l.norm2_shift}) {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<Parameter*> EncoderParams::regularized() { return {&features}; }

namespace {

Parameter uniform(const std::string& name, Shape shape, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(shape, 0.0);
  for (double& x : t.data()) x = dist(rng);
  return Parameter(name, std::move(t));
}

Parameter constant(const std::string& name, std::size_t n, double v) {
  return Parameter(name, Tensor(Shape{n}, v));
}

Tensor dropout_keep(std::size_t n, double rate, Rng& rng) {
  std::bernoulli_distribution keep(1.0 - rate);
  Tensor t(Shape{n}, 0.0);
  const double scale = 1.0 / (1.0 - rate);
  for (double& x : t.data()) x = keep(rng) ? scale : 0.0;
  return t;
}

bool use_dropout(const EncodeOptions& options) {
  return options.dropout > 0.0 && options.rng != nullptr;
}

EdgeTypeSet effective_types(EdgeTypeSet types, bool homogeneous) {
  if (!homogeneous) return types;
  const EdgeTypeSet sharing = types & 0x7u;
  EdgeTypeSet out = types & kMembershipBit;
  if (sharing) out |= 1u;
  return out;
}

}  // namespace

EncoderParams init_encoder_params(std::size_t num_compounds, std::size_t dim,
                                  std::size_t hidden, std::size_t layers, Rng& rng) {
  if (dim == 0 || num_compounds == 0) throw ConfigError("encoder needs dim > 0 and compounds");
  if (layers == 0) throw ConfigError("encoder needs at least one layer");
  if (hidden == 0) hidden = 2 * dim;
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  EncoderParams p;
  p.dim = dim;
  p.hidden = hidden;
  p.features = uniform("features", Shape{num_compounds, dim}, bound, rng);
  p.edge_types = uniform("edge_types", Shape{kNumEdgeTypeSlots, dim}, bound, rng);
  p.layers.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    p.layers.push_back(EncoderLayer{
        uniform(prefix + "query", Shape{dim, dim}, bound, rng),
        uniform(prefix + "key", Shape{dim, dim}, bound, rng),
        uniform(prefix + "value", Shape{dim, dim}, bound, rng),
        constant(prefix + "norm1_gain", dim, 1.0),
        constant(prefix + "norm1_shift", dim, 0.0),
        uniform(prefix + "ff_in", Shape{dim, hidden}, bound, rng),
        uniform(prefix + "ff_in_bias", Shape{hidden}, bound, rng),
        uniform(prefix + "ff_out", Shape{hidden, dim}, bound, rng),
        uniform(prefix + "ff_out_bias", Shape{dim}, bound, rng),
        constant(prefix + "norm2_gain", dim, 1.0),
        constant(prefix + "norm2_shift", dim, 0.0),
    });
  }
  return p;
}

Var layer_forward(Graph& graph, EncoderParams& params, std::size_t layer, Var target_state,
                  Var neighbor_states, std::span<const EdgeTypeSet> edge_types,
                  std::span<const std::uint8_t> mask, const EncodeOptions& options,
                  LayerTrace* trace) {
  if (layer >= params.layers.size()) throw Error("layer index out of range");
  EncoderLayer& w = params.layers[layer];
  const std::size_t n = params.dim;
  if (target_state.shape().rank() != 1 || target_state.shape()[0] != n) {
    throw ShapeError("layer_forward: target state " + target_state.shape().str() +
                     " is not [" + std::to_string(n) + "]");
  }

  std::vector<std::size_t> live;
  if (neighbor_states.valid()) {
    const Shape& s = neighbor_states.shape();
    if (s.rank() != 2 || s[1] != n) {
      throw ShapeError("layer_forward: neighbour states " + s.str());
    }
    if (edge_types.size() != s[0] || mask.size() != s[0]) {
      throw ShapeError("layer_forward: edge types / mask do not cover " + s.str());
    }
    for (std::size_t j = 0; j < s[0]; ++j) {
      if (mask[j]) live.push_back(j);
    }
  }

  Var x = target_state;
  if (!live.empty()) {
    Var rows = live.size() == neighbor_states.shape()[0]
                   ? neighbor_states
                   : diff::embedding_lookup(neighbor_states, live);
    Tensor onehot(Shape{live.size(), static_cast<std::size_t>(kNumEdgeTypeSlots)}, 0.0);
    for (std::size_t r = 0; r < live.size(); ++r) {
      const EdgeTypeSet t = effective_types(edge_types[live[r]], options.homogeneous);
      for (int b = 0; b < kNumEdgeTypeSlots; ++b) {
        if (t & (1u << b)) onehot.at(r, static_cast<std::size_t>(b)) = 1.0;
      }
    }
    Var relation = diff::matmul(graph.constant(std::move(onehot)), graph.parameter(params.edge_types));
    Var messages = diff::add(rows, relation);
    Var q = diff::matmul(target_state, graph.parameter(w.query));
    Var k = diff::matmul(messages, graph.parameter(w.key));
    Var v = diff::matmul(messages, graph.parameter(w.value));
    Tensor keep;
    if (use_dropout(options)) keep = dropout_keep(live.size(), options.dropout, *options.rng);
    Var attended = diff::scaled_dot_attention(q, k, v, use_dropout(options) ? &keep : nullptr,
                                              trace ? &trace->attention : nullptr);
    x = diff::add(x, attended);
  } else if (trace) {
    trace->attention = Tensor();
  }
  x = diff::layer_norm(x, graph.parameter(w.norm1_gain), graph.parameter(w.norm1_shift));

  Var hidden = diff::relu(
      diff::add(diff::matmul(x, graph.parameter(w.ff_in)), graph.parameter(w.ff_in_bias)));
  if (use_dropout(options)) {
    hidden = diff::hadamard(
        hidden, graph.constant(dropout_keep(params.hidden, options.dropout, *options.rng)));
  }
  Var ff = diff::add(diff::matmul(hidden, graph.parameter(w.ff_out)), graph.parameter(w.ff_out_bias));
  return diff::layer_norm(diff::add(x, ff), graph.parameter(w.norm2_gain),
                          graph.parameter(w.norm2_shift));
}

namespace {

std::vector<std::size_t> live_compounds(std::span<const CompoundId> ids,
                                        std::span<const std::uint8_t> mask,
                                        std::size_t num_compounds) {
  if (ids.size() != mask.size()) throw ShapeError("sub-hypergraph compound mask length mismatch");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!mask[i]) continue;
    if (ids[i].index() >= num_compounds) {
      throw Error("sub-hypergraph references unknown compound " + std::to_string(ids[i].value));
    }
    out.push_back(ids[i].index());
  }
  return out;
}

void check_embedding(const Tensor& t, double cap) {
  double norm = 0.0;
  for (double x : t.data()) norm += x * x;
  norm = std::sqrt(norm);
  if (!std::isfinite(norm) || norm > cap) {
    throw NumericalError("hyperedge embedding norm " + std::to_string(norm) + " exceeds cap");
  }
}

}  // namespace

Var encode(Graph& graph, EncoderParams& params, const SubHypergraph& sub,
           const EncodeOptions& options) {
  const std::size_t num_compounds = params.features.value().rows();
  Var features = graph.parameter(params.features);

  auto target_ids = live_compounds(sub.target_compounds, sub.target_mask, num_compounds);
  if (target_ids.empty()) throw Error("target hyperedge has no compounds");
  Var target_x = diff::embedding_lookup(features, target_ids);
  Var target_h = diff::mean_rows(target_x);

  struct Neighbor {
    Var compounds;
    Var state;
    EdgeTypeSet types;
  };
  std::vector<Neighbor> neighbors;
  if (sub.neighbor_mask.size() != sub.neighbors.size()) {
    throw ShapeError("sub-hypergraph neighbour mask length mismatch");
  }
  for (std::size_t j = 0; j < sub.neighbors.size(); ++j) {
    if (!sub.neighbor_mask[j]) continue;
    const auto& slot = sub.neighbors[j];
    auto ids = live_compounds(slot.compounds, slot.compound_mask, num_compounds);
    if (ids.empty()) throw Error("neighbour hyperedge has no compounds");
    Var x = diff::embedding_lookup(features, ids);
    neighbors.push_back({x, diff::mean_rows(x), static_cast<EdgeTypeSet>(slot.types & 0x7u)});
  }

  const std::size_t num_layers = params.layers.size();
  const std::size_t own = target_ids.size();
  for (std::size_t l = 0; l < num_layers; ++l) {
    std::vector<Var> rows;
    std::vector<EdgeTypeSet> types;
    rows.reserve(neighbors.size() + 1);
    for (const auto& nb : neighbors) {
      rows.push_back(nb.state);
      types.push_back(nb.types);
    }
    rows.push_back(target_x);
    types.insert(types.end(), own, kMembershipBit);
    std::vector<std::uint8_t> ones(types.size(), 1);
    Var next = layer_forward(graph, params, l, target_h, diff::stack_rows(rows), types, ones,
                             options);
    if (l + 1 < num_layers) {
      for (auto& nb : neighbors) {
        const std::size_t k = nb.compounds.shape()[0];
        std::vector<EdgeTypeSet> member(k, kMembershipBit);
        std::vector<std::uint8_t> all(k, 1);
        nb.state = layer_forward(graph, params, l, nb.state, nb.compounds, member, all, options);
      }
    }
    target_h = next;
  }
  check_embedding(target_h.value(), options.norm_cap);
  return target_h;
}

Var mean_pool_encode(Graph& graph, EncoderParams& params, std::span<const CompoundId> members) {
  const std::size_t num_compounds = params.features.value().rows();
  std::vector<std::size_t> ids;
  for (CompoundId c : members) {
    if (c.index() >= num_compounds) throw Error("mean pool: unknown compound");
    ids.push_back(c.index());
  }
  if (ids.empty()) throw Error("mean pool: empty hyperedge");
  return diff::mean_rows(diff::embedding_lookup(graph.parameter(params.features), ids));
}

HyperedgeEmbedding embed(EncoderParams& params, const SubHypergraph& sub,
                         const EncodeOptions& options) {
  Graph graph(false);
  Var v = encode(graph, params, sub, options);
  return {v.value(), sub.target, params.layers.size()};
}

}  // namespace enzkg
