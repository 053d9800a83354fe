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

#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "enzkg/evaluator.hpp"
#include "enzkg/synth.hpp"
#include "enzkg/trainer.hpp"
#include "fixtures.hpp"

namespace enzkg {
namespace {

using diff::Parameter;
using diff::Tensor;

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.dim = 16;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 8;
  cfg.dropout = 0.0;
  cfg.regularization = 0.0;
  cfg.loss.negatives = 1;
  cfg.seed = 3;
  return cfg;
}

std::vector<Tensor> snapshot(Model& m) {
  std::vector<Tensor> out;
  for (Parameter* p : m.parameters()) out.push_back(p->value());
  return out;
}

double log_sigmoid(double x) { return -std::log(1.0 + std::exp(-x)); }

TEST_CASE("adam first step moves each weight by the learning rate") {
  Parameter p("w", Tensor::vector({1.0, -2.0, 0.5}));
  p.grad() = Tensor::vector({0.3, -4.0, 0.0});
  AdamState st;
  std::vector<Parameter*> params = {&p};
  adam_step(params, st, 0.1);
  CHECK(st.step == 1);
  CHECK(p.value()[0] == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(p.value()[1] == doctest::Approx(-1.9).epsilon(1e-7));
  CHECK(p.value()[2] == 0.5);
}

TEST_CASE("l2 penalty sums squares and accumulates 2 lambda w") {
  Model m = make_model(testing::toy_kg(true), Split{{0, 1}, {}, {}}, small_config());
  double sq = 0.0;
  for (double v : m.encoder.features.value().data()) sq += v * v;
  for (double v : m.relations.head.value().data()) sq += v * v;
  for (double v : m.relations.tail.value().data()) sq += v * v;
  for (Parameter* p : m.parameters()) p->zero_grad();
  CHECK(l2_penalty(m, 0.5, true) == doctest::Approx(0.5 * sq).epsilon(1e-14));
  CHECK(m.encoder.features.grad()[3] == m.encoder.features.value()[3]);
  CHECK(l2_penalty(m, 0.0, true) == 0.0);
}

TEST_CASE("training on the toy graph drives the loss down") {
  TrainConfig cfg = small_config();
  Model m = make_model(testing::toy_kg(true), Split{{0, 1}, {}, {}}, cfg);
  Trainer trainer(m);
  Rng rng = make_rng(cfg.seed, "train");
  const double first = trainer.train_epoch(rng);
  double last = first;
  for (int e = 0; e < 300; ++e) last = trainer.train_epoch(rng);
  CHECK(last < 0.1 * first);
  CHECK(trainer.state().adam.step == 301);
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  TrainConfig cfg = small_config();
  cfg.learning_rate = 0.0;
  cfg.regularization = 0.01;
  Model m = make_model(testing::toy_kg(true), Split{{0, 1}, {}, {}}, cfg);
  const auto before = snapshot(m);
  Trainer trainer(m);
  Rng rng(1);
  for (int e = 0; e < 3; ++e) trainer.train_epoch(rng);
  const auto after = snapshot(m);
  for (std::size_t k = 0; k < before.size(); ++k) {
    for (std::size_t i = 0; i < before[k].size(); ++i) CHECK(before[k][i] == after[k][i]);
  }
}

TEST_CASE("training is deterministic for a seed") {
  SyntheticSpec spec;
  spec.num_complete = 60;
  spec.num_incomplete = 20;
  spec.seed = 4;
  TrainConfig cfg = small_config();
  cfg.dropout = 0.1;
  cfg.regularization = 0.001;
  cfg.loss.negatives = 4;
  cfg.max_epochs = 3;
  auto run = [&] {
    SyntheticKG syn = generate_synthetic(spec);
    Model m = make_model(std::move(syn.kg), {}, cfg);
    m.split.train.resize(m.kg.complete().size());
    for (std::size_t i = 0; i < m.split.train.size(); ++i) m.split.train[i] = i;
    Trainer t(m);
    t.fit();
    return snapshot(m);
  };
  const auto a = run();
  const auto b = run();
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a[k].size(); ++i) CHECK(a[k][i] == b[k][i]);
  }
}

TEST_CASE("MLP decoder separates a small training set") {
  EquationKG kg = testing::kg_from_tsv(
      "a;b\te1\tc\n"
      "c\te2\td;e\n"
      "d\te3\ta\n"
      "b;e\te1\tf\n"
      "f\te2\tb\n");
  TrainConfig cfg = small_config();
  cfg.decoder = DecoderKind::kMlp;
  Model m = make_model(std::move(kg), Split{{0, 1, 2, 3, 4}, {}, {}}, cfg);
  Trainer trainer(m);
  Rng rng(2);
  for (int e = 0; e < 300; ++e) trainer.train_epoch(rng);
  for (const EquationTriple& t : m.kg.complete()) {
    auto d = enzyme_distances(m, embed_hyperedge(m, t.educt_edge).data(),
                              embed_hyperedge(m, t.product_edge).data());
    const auto best = std::min_element(d.begin(), d.end()) - d.begin();
    CHECK(static_cast<std::size_t>(best) == t.enzyme->index());
  }
}

TEST_CASE("mean pool encodes singletons as the feature row") {
  TrainConfig cfg = small_config();
  cfg.encoder = EncoderKind::kMeanPool;
  Model m = make_model(testing::toy_kg(true), Split{{0, 1}, {}, {}}, cfg);
  const HyperedgeId p2 = m.kg.complete()[1].product_edge;
  const Tensor e = embed_hyperedge(m, p2);
  const CompoundId c4 = testing::cid(m.kg, "c4");
  for (std::size_t i = 0; i < cfg.dim; ++i) CHECK(e[i] == m.encoder.features.value().at(c4.index(), i));
  const Tensor s1 = embed_hyperedge(m, m.kg.complete()[0].educt_edge);
  const CompoundId c1 = testing::cid(m.kg, "c1"), c2 = testing::cid(m.kg, "c2");
  for (std::size_t i = 0; i < cfg.dim; ++i) {
    CHECK(s1[i] == doctest::Approx(0.5 * (m.encoder.features.value().at(c1.index(), i) +
                                          m.encoder.features.value().at(c2.index(), i)))
                       .epsilon(1e-15));
  }
}

TEST_CASE("mean pool with TransE matches a direct loss computation") {
  TrainConfig cfg = small_config();
  cfg.encoder = EncoderKind::kMeanPool;
  cfg.decoder = DecoderKind::kTransE;
  Model m = make_model(testing::toy_kg(true), Split{{0, 1}, {}, {}}, cfg);
  const NegativePools pools = NegativePools::from(m.kg);
  const TrueTripleSet known = TrueTripleSet::from(m.kg);
  const std::vector<std::size_t> triples = {0, 1};
  diff::Graph g;
  Rng neg(5);
  diff::Var loss = batch_loss(g, m, triples, pools, known, {}, neg);

  auto pooled = [&](HyperedgeId e) {
    std::vector<double> v(cfg.dim, 0.0);
    auto members = m.graph.members(e);
    for (CompoundId c : members) {
      for (std::size_t i = 0; i < cfg.dim; ++i) v[i] += m.encoder.features.value().at(c.index(), i);
    }
    for (double& x : v) x /= static_cast<double>(members.size());
    return v;
  };
  double expect = 0.0;
  for (std::size_t q : triples) {
    const EquationTriple& t = m.kg.complete()[q];
    const auto s = pooled(t.educt_edge), p = pooled(t.product_edge);
    const std::size_t other = 1 - t.enzyme->index();
    const double pos = transe_score(s, p, m.relations.head.value().row(t.enzyme->index()));
    const double ng = transe_score(s, p, m.relations.head.value().row(other));
    expect += -log_sigmoid(6.0 - pos) - log_sigmoid(ng - 6.0);
  }
  CHECK(loss.item() == doctest::Approx(expect / 2.0).epsilon(1e-13));
}

TEST_CASE("early stopping restores the best validation snapshot") {
  SyntheticSpec spec;
  spec.num_complete = 80;
  spec.num_incomplete = 20;
  spec.seed = 6;
  SyntheticKG syn = generate_synthetic(spec);
  SplitSpec ss;
  ss.seed = 1;
  Split sp = split(syn.kg, ss);
  TrainConfig cfg = small_config();
  cfg.loss.negatives = 8;
  cfg.max_epochs = 30;
  cfg.patience = 3;
  Model m = make_model(std::move(syn.kg), sp, cfg);
  Trainer trainer(m);
  std::size_t calls = 0;
  auto history = trainer.fit([&](const EpochRecord&) { ++calls; });
  CHECK(calls == history.size());
  double best = -1.0;
  for (const auto& r : history) {
    REQUIRE(r.valid_mrr.has_value());
    best = std::max(best, *r.valid_mrr);
  }
  CHECK(trainer.state().best_valid_mrr == best);
  CHECK(trainer.validation_mrr() == doctest::Approx(best).epsilon(1e-12));
  if (history.size() < cfg.max_epochs) {
    std::size_t stale = 0;
    for (auto it = history.rbegin(); it != history.rend() && *it->valid_mrr < best; ++it) ++stale;
    CHECK(stale == cfg.patience);
  }
}

TEST_CASE("non-finite parameters raise a numerical error") {
  TrainConfig cfg = small_config();
  Model m = make_model(testing::toy_kg(true), Split{{0, 1}, {}, {}}, cfg);
  m.relations.head.value()[0] = std::numeric_limits<double>::quiet_NaN();
  Trainer trainer(m);
  Rng rng(3);
  CHECK_THROWS_AS(trainer.train_epoch(rng), NumericalError);
}

}  // namespace
}  // namespace enzkg
