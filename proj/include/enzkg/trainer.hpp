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

#ifndef ENZKG_TRAINER_HPP_
#define ENZKG_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "enzkg/common.hpp"
#include "enzkg/diffmath.hpp"
#include "enzkg/kg_core.hpp"
#include "enzkg/kge.hpp"
#include "enzkg/model.hpp"

namespace enzkg {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First and second moments, one tensor per model parameter (same order).
struct AdamState {
  std::vector<diff::Tensor> m;
  std::vector<diff::Tensor> v;
  std::uint64_t step = 0;
};

void adam_step(std::span<diff::Parameter* const> params, AdamState& state, double lr,
               const AdamConfig& config = {});

struct TrainState {
  AdamState adam;
  std::size_t epoch = 0;
  double best_valid_mrr = -1.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::optional<double> valid_mrr;
};

// Adversarial weights recorded by one batch_loss call and replayed by later
// calls with the same negatives, so finite differences see the weights
// fixed exactly as the backward pass does.
struct FrozenWeights {
  std::vector<std::vector<double>> per_triple;
  bool frozen = false;
};

// Mean loss over model.kg.complete()[triples], recorded on graph. Encodes
// each distinct hyperedge once. PairRE / TransE use the self-adversarial
// loss over sampled negatives; the MLP decoder uses cross-entropy.
diff::Var batch_loss(diff::Graph& graph, Model& model, std::span<const std::size_t> triples,
                     const NegativePools& pools, const TrueTripleSet& known,
                     const EncodeOptions& options, Rng& negative_rng,
                     FrozenWeights* frozen = nullptr);

// Sum of lambda * ||w||^2 over the regularized parameters; when accumulate is
// set, 2 * lambda * w is added to their gradients.
double l2_penalty(Model& model, double lambda, bool accumulate);

class Trainer {
 public:
  explicit Trainer(Model& model, TrainState state = {});

  // One pass over the training split in shuffled batches; returns the mean
  // batch loss (data term plus L2 penalty). Throws NumericalError on a
  // non-finite loss.
  double train_epoch(Rng& rng);
  double train_epoch(std::span<const std::size_t> triples, Rng& rng);

  // Trains up to config.max_epochs, selecting on validation MRR with
  // patience, and restores the best parameters. Without a validation split
  // every epoch is kept.
  std::vector<EpochRecord> fit(const std::function<void(const EpochRecord&)>& on_epoch = {});

  double validation_mrr();

  TrainState& state() { return state_; }
  const TrueTripleSet& filter() const { return known_; }

 private:
  void check_batch(std::span<const std::size_t> batch, double loss);

  Model& model_;
  TrainState state_;
  NegativePools pools_;
  TrueTripleSet known_;
};

}  // namespace enzkg

#endif  // ENZKG_TRAINER_HPP_
