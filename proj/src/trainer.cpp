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

#include "enzkg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "enzkg/evaluator.hpp"

namespace enzkg {

using diff::Graph;
using diff::Parameter;
using diff::Tensor;
using diff::Var;

void adam_step(std::span<Parameter* const> params, AdamState& state, double lr,
               const AdamConfig& config) {
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (Parameter* p : params) {
      state.m.emplace_back(p->value().shape(), 0.0);
      state.v.emplace_back(p->value().shape(), 0.0);
    }
    state.step = 0;
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& w = params[k]->value();
    const Tensor& g = params[k]->grad();
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.eps);
    }
  }
}

Var batch_loss(Graph& graph, Model& model, std::span<const std::size_t> triples,
               const NegativePools& pools, const TrueTripleSet& known,
               const EncodeOptions& options, Rng& negative_rng, FrozenWeights* frozen) {
  if (triples.empty()) throw Error("empty batch");
  const auto& all = model.kg.complete();
  Rng& sample_rng = options.rng ? *options.rng : negative_rng;
  std::unordered_map<std::uint32_t, Var> cache;
  auto embed = [&](HyperedgeId e) {
    auto it = cache.find(e.value);
    if (it != cache.end()) return it->second;
    Var v = encode_hyperedge(graph, model, e, sample_rng, options);
    cache.emplace(e.value, v);
    return v;
  };

  const bool mlp = model.config.decoder == DecoderKind::kMlp;
  const Scorer scorer =
      model.config.decoder == DecoderKind::kTransE ? Scorer::kTransE : Scorer::kPairRE;
  const LossConfig& loss_cfg = model.config.loss;
  Var head_table;
  Var tail_table;
  if (!mlp) {
    head_table = graph.parameter(model.relations.head);
    tail_table = scorer == Scorer::kPairRE ? graph.parameter(model.relations.tail) : head_table;
  }

  if (frozen && !frozen->frozen) frozen->per_triple.assign(triples.size(), {});
  Var total;
  std::size_t slot = 0;
  for (std::size_t idx : triples) {
    const EquationTriple& t = all.at(idx);
    if (!t.enzyme) throw Error("incomplete equation in training batch");
    const TripleKey key = key_of(t);
    Var s = embed(key.head);
    Var p = embed(key.tail);
    const std::size_t m = key.relation.index();
    Var term;
    if (mlp) {
      term = diff::scale(diff::element(diff::log_softmax(mlp_logits(model.mlp, s, p)), m), -1.0);
    } else {
      Var pos = score(scorer, s, p, diff::select_row(head_table, m),
                      diff::select_row(tail_table, m));
      auto negatives = sample_negatives(key, pools, known, loss_cfg, negative_rng);
      if (negatives.empty()) {
        term = diff::scale(
            diff::log_sigmoid(diff::add_scalar(diff::scale(pos, -1.0), loss_cfg.margin)), -1.0);
      } else {
        std::vector<std::size_t> rel(negatives.size());
        for (std::size_t k = 0; k < negatives.size(); ++k) rel[k] = negatives[k].relation.index();
        Var heads = diff::embedding_lookup(head_table, rel);
        Var tails = diff::embedding_lookup(tail_table, rel);
        Var neg;
        if (loss_cfg.corruption == Corruption::kRelation) {
          neg = score(scorer, s, p, heads, tails);
        } else {
          std::vector<Var> ns, np;
          for (const NegativeTriple& n : negatives) {
            ns.push_back(embed(n.head));
            np.push_back(embed(n.tail));
          }
          neg = score(scorer, diff::stack_rows(ns), diff::stack_rows(np), heads, tails);
        }
        if (frozen && frozen->frozen) {
          term = self_adversarial_loss(pos, neg, frozen->per_triple.at(slot), loss_cfg);
        } else {
          auto weights = adversarial_weights(neg.value().data(), loss_cfg);
          term = self_adversarial_loss(pos, neg, weights, loss_cfg);
          if (frozen) frozen->per_triple[slot] = std::move(weights);
        }
      }
    }
    total = total.valid() ? diff::add(total, term) : term;
    ++slot;
  }
  if (frozen && !frozen->frozen) frozen->frozen = true;
  return diff::scale(total, 1.0 / static_cast<double>(triples.size()));
}

double l2_penalty(Model& model, double lambda, bool accumulate) {
  if (lambda == 0.0) return 0.0;
  double penalty = 0.0;
  for (Parameter* p : model.regularized()) {
    Tensor& w = p->value();
    Tensor& g = p->grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      penalty += w[i] * w[i];
      if (accumulate) g[i] += 2.0 * lambda * w[i];
    }
  }
  return lambda * penalty;
}

Trainer::Trainer(Model& model, TrainState state)
    : model_(model),
      state_(std::move(state)),
      pools_(NegativePools::from(model.kg)),
      known_(TrueTripleSet::from(model.kg)) {}

double Trainer::train_epoch(Rng& rng) { return train_epoch(model_.split.train, rng); }

double Trainer::train_epoch(std::span<const std::size_t> triples, Rng& rng) {
  if (triples.empty()) throw Error("no training triples");
  std::vector<std::size_t> order(triples.begin(), triples.end());
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t batch = std::max<std::size_t>(1, model_.config.batch_size);
  auto params = model_.parameters();

  EncodeOptions options;
  options.dropout = model_.config.dropout;
  options.rng = &rng;
  options.homogeneous = model_.config.homogeneous;

  double sum = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size(); start += batch) {
    std::span<const std::size_t> chunk(order.data() + start,
                                       std::min(batch, order.size() - start));
    for (Parameter* p : params) p->zero_grad();
    Graph graph;
    Var loss = batch_loss(graph, model_, chunk, pools_, known_, options, rng);
    const double value = loss.item() + l2_penalty(model_, model_.config.regularization, false);
    if (!std::isfinite(value)) check_batch(chunk, value);
    graph.backward(loss);
    l2_penalty(model_, model_.config.regularization, true);
    adam_step(params, state_.adam, model_.config.learning_rate);
    sum += value;
    ++batches;
  }
  return sum / static_cast<double>(batches);
}

void Trainer::check_batch(std::span<const std::size_t> batch, double loss) {
  std::ostringstream msg;
  msg << "non-finite training loss " << loss;
  for (std::size_t idx : batch) {
    const EquationTriple& t = model_.kg.complete().at(idx);
    const Tensor s = embed_hyperedge(model_, t.educt_edge);
    const Tensor p = embed_hyperedge(model_, t.product_edge);
    const auto d = enzyme_distances(model_, s.data(), p.data());
    const double pos = d[t.enzyme->index()];
    const bool bad = !s.all_finite() || !p.all_finite() ||
                     std::any_of(d.begin(), d.end(), [](double x) { return !std::isfinite(x); });
    if (bad) {
      msg << "; offending triple " << model_.kg.format(t) << " (positive score " << pos << ")";
      throw NumericalError(msg.str());
    }
  }
  msg << "; all batch scores finite, divergence in the loss terms";
  throw NumericalError(msg.str());
}

double Trainer::validation_mrr() {
  return evaluate_model(model_, model_.split.valid, known_, model_.config.threads).mrr;
}

std::vector<EpochRecord> Trainer::fit(const std::function<void(const EpochRecord&)>& on_epoch) {
  Rng rng = make_rng(model_.config.seed, "train");
  std::vector<EpochRecord> history;
  const bool select = !model_.split.valid.empty() && model_.config.eval_every > 0;
  auto params = model_.parameters();
  std::vector<Tensor> best;
  std::size_t stale = 0;
  for (std::size_t e = 0; e < model_.config.max_epochs; ++e) {
    EpochRecord rec;
    rec.loss = train_epoch(rng);
    rec.epoch = ++state_.epoch;
    if (select && (e + 1) % model_.config.eval_every == 0) {
      rec.valid_mrr = validation_mrr();
      if (*rec.valid_mrr > state_.best_valid_mrr) {
        state_.best_valid_mrr = *rec.valid_mrr;
        best.clear();
        for (Parameter* p : params) best.push_back(p->value());
        stale = 0;
      } else {
        ++stale;
      }
    }
    history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (select && model_.config.patience > 0 && stale >= model_.config.patience) break;
  }
  if (!best.empty()) {
    for (std::size_t k = 0; k < params.size(); ++k) params[k]->value() = best[k];
  }
  return history;
}

}  // namespace enzkg
