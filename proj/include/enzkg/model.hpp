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

#ifndef ENZKG_MODEL_HPP_
#define ENZKG_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "enzkg/common.hpp"
#include "enzkg/diffmath.hpp"
#include "enzkg/encoder.hpp"
#include "enzkg/hypergraph.hpp"
#include "enzkg/kg_core.hpp"
#include "enzkg/kge.hpp"

namespace enzkg {

enum class DecoderKind { kPairRE, kTransE, kMlp };
enum class EncoderKind { kHypergraph, kMeanPool };

DecoderKind parse_decoder(std::string_view s);
EncoderKind parse_encoder(std::string_view s);
const char* to_string(DecoderKind d);
const char* to_string(EncoderKind e);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 512;
  std::size_t max_epochs = 200;
  // Validation rounds without improvement before stopping; 0 disables.
  std::size_t patience = 10;
  std::size_t eval_every = 1;
  std::size_t eta1 = 10;
  std::size_t eta2 = 5;
  double dropout = 0.1;
  double regularization = 0.001;
  std::size_t dim = 64;
  std::size_t hidden_dim = 0;  // 0: 2 * dim
  std::size_t layers = 1;
  LossConfig loss;
  bool homogeneous = false;
  DecoderKind decoder = DecoderKind::kPairRE;
  EncoderKind encoder = EncoderKind::kHypergraph;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

// MLP decoder head: [S, P] -> hidden (ReLU) -> one logit per enzyme.
struct MlpDecoderParams {
  diff::Parameter hidden_weight;
  diff::Parameter hidden_bias;
  diff::Parameter out_weight;
  diff::Parameter out_bias;

  std::vector<diff::Parameter*> parameters();
};

MlpDecoderParams init_mlp_decoder(std::size_t dim, std::size_t hidden, std::size_t num_enzymes,
                                  Rng& rng);

// Logits over all enzymes, [|M|].
diff::Var mlp_logits(MlpDecoderParams& params, diff::Var educt, diff::Var product);

// Equation KG, its hypergraph and every trainable table. Parameters are
// owned here; graphs only hold pointers while a batch is built.
struct Model {
  TrainConfig config;
  EquationKG kg;
  Split split;
  Hypergraph graph;
  EncoderParams encoder;
  RelationParams relations;  // PairRE / TransE decoders
  MlpDecoderParams mlp;      // MLP decoder

  // Stable order; optimizer state and checkpoints index by it.
  std::vector<diff::Parameter*> parameters();
  std::vector<const diff::Parameter*> parameters() const;
  // Entity features and relation embeddings.
  std::vector<diff::Parameter*> regularized();

  std::size_t num_enzymes() const { return kg.enzymes().size(); }
  EncodeOptions inference_options() const;
};

// Builds the hypergraph and initialises parameters from config.seed.
Model make_model(EquationKG kg, Split split, const TrainConfig& config);

// Recorded embedding of a hyperedge of the universe.
diff::Var encode_hyperedge(diff::Graph& graph, Model& model, HyperedgeId edge, Rng& sample_rng,
                           const EncodeOptions& options);
// Recorded embedding of an arbitrary sub-hypergraph (mean-pool models use its
// target compounds).
diff::Var encode_subgraph(diff::Graph& graph, Model& model, const SubHypergraph& sub,
                          const EncodeOptions& options);

// Neighbour sampling stream used at inference for one hyperedge; fixed per
// (seed, hyperedge) so embeddings do not depend on evaluation order.
Rng inference_rng(const Model& model, HyperedgeId edge);

// Inference embedding of a universe hyperedge.
diff::Tensor embed_hyperedge(Model& model, HyperedgeId edge);
// Inference embedding of a compound set; reuses the universe hyperedge when
// the key exists, otherwise attaches it to the graph. Throws
// OutOfVocabularyError when no compound is known.
diff::Tensor embed_compound_set(Model& model, std::span<const CompoundId> compounds, Role role,
                                std::size_t* dropped = nullptr);

// Per-enzyme distance (lower = more plausible). For the MLP decoder this is
// the negated logit.
std::vector<double> enzyme_distances(Model& model, std::span<const double> educt,
                                     std::span<const double> product);

// Logit of one enzyme under the MLP decoder. Throws when the model does not
// use the MLP decoder.
double mlp_decoder_score(Model& model, std::span<const double> educt,
                         std::span<const double> product, EnzymeId enzyme);

}  // namespace enzkg

#endif  // ENZKG_MODEL_HPP_
