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

#include "enzkg/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace enzkg {

using diff::Graph;
using diff::Parameter;
using diff::Shape;
using diff::Tensor;
using diff::Var;

DecoderKind parse_decoder(std::string_view s) {
  if (s == "pairre") return DecoderKind::kPairRE;
  if (s == "transe") return DecoderKind::kTransE;
  if (s == "mlp") return DecoderKind::kMlp;
  throw ConfigError("unknown decoder '" + std::string(s) + "' (pairre, transe, mlp)");
}

EncoderKind parse_encoder(std::string_view s) {
  if (s == "hyper") return EncoderKind::kHypergraph;
  if (s == "meanpool") return EncoderKind::kMeanPool;
  throw ConfigError("unknown encoder '" + std::string(s) + "' (hyper, meanpool)");
}

const char* to_string(DecoderKind d) {
  switch (d) {
    case DecoderKind::kPairRE:
      return "pairre";
    case DecoderKind::kTransE:
      return "transe";
    case DecoderKind::kMlp:
      return "mlp";
  }
  return "?";
}

const char* to_string(EncoderKind e) {
  return e == EncoderKind::kHypergraph ? "hyper" : "meanpool";
}

std::vector<Parameter*> MlpDecoderParams::parameters() {
  return {&hidden_weight, &hidden_bias, &out_weight, &out_bias};
}

MlpDecoderParams init_mlp_decoder(std::size_t dim, std::size_t hidden, std::size_t num_enzymes,
                                  Rng& rng) {
  auto uniform = [&](const char* name, Shape shape, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor t(shape, 0.0);
    for (double& x : t.data()) x = dist(rng);
    return Parameter(name, std::move(t));
  };
  return MlpDecoderParams{
      uniform("mlp.hidden_weight", Shape{2 * dim, hidden}, 2 * dim),
      uniform("mlp.hidden_bias", Shape{hidden}, 2 * dim),
      uniform("mlp.out_weight", Shape{hidden, num_enzymes}, hidden),
      uniform("mlp.out_bias", Shape{num_enzymes}, hidden),
  };
}

Var mlp_logits(MlpDecoderParams& params, Var educt, Var product) {
  Graph& g = educt.graph();
  const Var parts[] = {educt, product};
  Var joined = diff::concat(parts);
  Var hidden = diff::relu(diff::add(diff::matmul(joined, g.parameter(params.hidden_weight)),
                                    g.parameter(params.hidden_bias)));
  return diff::add(diff::matmul(hidden, g.parameter(params.out_weight)),
                   g.parameter(params.out_bias));
}

namespace {

template <typename ModelT, typename Out>
void collect(ModelT& m, Out& out) {
  for (auto* p : const_cast<EncoderParams&>(m.encoder).parameters()) out.push_back(p);
  switch (m.config.decoder) {
    case DecoderKind::kPairRE:
    case DecoderKind::kTransE:
      for (auto* p : const_cast<RelationParams&>(m.relations).parameters()) out.push_back(p);
      break;
    case DecoderKind::kMlp:
      for (auto* p : const_cast<MlpDecoderParams&>(m.mlp).parameters()) out.push_back(p);
      break;
  }
}

}  // namespace

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  collect(*this, out);
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  std::vector<const Parameter*> out;
  collect(*this, out);
  return out;
}

std::vector<Parameter*> Model::regularized() {
  auto out = encoder.regularized();
  if (config.decoder != DecoderKind::kMlp) {
    for (auto* p : relations.parameters()) out.push_back(p);
  }
  return out;
}

EncodeOptions Model::inference_options() const {
  EncodeOptions o;
  o.homogeneous = config.homogeneous;
  return o;
}

Model make_model(EquationKG kg, Split split, const TrainConfig& config) {
  if (kg.compounds().size() == 0 || kg.enzymes().size() == 0) {
    throw Error("model needs at least one compound and one enzyme");
  }
  Model m;
  m.config = config;
  m.graph = Hypergraph::build(kg, config.homogeneous);
  Rng rng = make_rng(config.seed, "init");
  const std::size_t hidden = config.hidden_dim ? config.hidden_dim : 2 * config.dim;
  m.encoder = init_encoder_params(kg.compounds().size(), config.dim, hidden, config.layers, rng);
  switch (config.decoder) {
    case DecoderKind::kPairRE:
      m.relations = init_relation_params(Scorer::kPairRE, kg.enzymes().size(), config.dim, rng);
      break;
    case DecoderKind::kTransE:
      m.relations = init_relation_params(Scorer::kTransE, kg.enzymes().size(), config.dim, rng);
      break;
    case DecoderKind::kMlp:
      m.mlp = init_mlp_decoder(config.dim, hidden, kg.enzymes().size(), rng);
      break;
  }
  m.kg = std::move(kg);
  m.split = std::move(split);
  return m;
}

Var encode_hyperedge(Graph& graph, Model& model, HyperedgeId edge, Rng& sample_rng,
                     const EncodeOptions& options) {
  if (model.config.encoder == EncoderKind::kMeanPool) {
    return mean_pool_encode(graph, model.encoder, model.graph.members(edge));
  }
  SubHypergraph sub =
      model.graph.sample_neighborhood(edge, model.config.eta1, model.config.eta2, sample_rng);
  return encode(graph, model.encoder, sub, options);
}

Var encode_subgraph(Graph& graph, Model& model, const SubHypergraph& sub,
                    const EncodeOptions& options) {
  if (model.config.encoder == EncoderKind::kMeanPool) {
    std::vector<CompoundId> live;
    for (std::size_t i = 0; i < sub.target_compounds.size(); ++i) {
      if (sub.target_mask[i]) live.push_back(sub.target_compounds[i]);
    }
    return mean_pool_encode(graph, model.encoder, live);
  }
  return encode(graph, model.encoder, sub, options);
}

Rng inference_rng(const Model& model, HyperedgeId edge) {
  return make_rng(model.config.seed + 0x9e3779b97f4a7c15ULL * (edge.value + 1ULL), "inference");
}

Tensor embed_hyperedge(Model& model, HyperedgeId edge) {
  Graph graph(false);
  Rng rng = inference_rng(model, edge);
  return encode_hyperedge(graph, model, edge, rng, model.inference_options()).value();
}

Tensor embed_compound_set(Model& model, std::span<const CompoundId> compounds, Role role,
                          std::size_t* dropped) {
  std::vector<CompoundId> set(compounds.begin(), compounds.end());
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  if (dropped) *dropped = 0;
  if (auto id = model.kg.hyperedges().find({role, set})) {
    if (id->index() < model.graph.num_hyperedges()) return embed_hyperedge(model, *id);
  }
  std::uint64_t h = static_cast<std::uint64_t>(role) + 1;
  for (CompoundId c : set) h = h * 1000003ULL + c.value;
  Rng rng = make_rng(model.config.seed ^ h, "attach");
  SubHypergraph sub =
      model.graph.attach_test_hyperedge(set, role, model.config.eta2, rng, dropped);
  if (model.config.encoder == EncoderKind::kMeanPool) {
    // Mean pooling uses every known compound rather than the eta2 sample.
    std::vector<CompoundId> known;
    for (CompoundId c : set) {
      if (c.index() < model.graph.num_compounds()) known.push_back(c);
    }
    Graph graph(false);
    return mean_pool_encode(graph, model.encoder, known).value();
  }
  Graph graph(false);
  return encode(graph, model.encoder, sub, model.inference_options()).value();
}

std::vector<double> enzyme_distances(Model& model, std::span<const double> educt,
                                     std::span<const double> product) {
  if (model.config.decoder != DecoderKind::kMlp) {
    return relation_distances(model.relations, educt, product);
  }
  Graph graph(false);
  Var s = graph.constant(Tensor::vector({educt.begin(), educt.end()}));
  Var p = graph.constant(Tensor::vector({product.begin(), product.end()}));
  const Tensor& logits = mlp_logits(model.mlp, s, p).value();
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -logits[i];
  return out;
}

double mlp_decoder_score(Model& model, std::span<const double> educt,
                         std::span<const double> product, EnzymeId enzyme) {
  if (model.config.decoder != DecoderKind::kMlp) {
    throw ConfigError("mlp decoder unavailable: model uses the " +
                      std::string(to_string(model.config.decoder)) + " decoder");
  }
  if (enzyme.index() >= model.num_enzymes()) throw Error("unknown enzyme id");
  return -enzyme_distances(model, educt, product)[enzyme.index()];
}

}  // namespace enzkg
