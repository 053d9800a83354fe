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

#include <cmath>

#include "doctest.h"
#include "enzkg/encoder.hpp"
#include "fixtures.hpp"
#include "grad_suite.hpp"

namespace enzkg {
namespace {

using diff::Tensor;

constexpr std::size_t kDim = 8;

HyperedgeSlot slot(HyperedgeId e, SharingMask types, std::vector<CompoundId> compounds) {
  HyperedgeSlot s;
  s.edge = e;
  s.types = types;
  s.compound_mask.assign(compounds.size(), 1);
  s.compounds = std::move(compounds);
  return s;
}

// Target S1 = {c1, c2} of the toy graph with its single neighbour S2.
SubHypergraph toy_s1() {
  SubHypergraph sub;
  sub.target = HyperedgeId(0);
  sub.target_compounds = {CompoundId(0), CompoundId(1)};
  sub.target_mask = {1, 1};
  sub.neighbors.push_back(
      slot(HyperedgeId(2), bit(SharingType::kEductSharing), {CompoundId(1), CompoundId(2)}));
  sub.neighbor_mask = {1};
  return sub;
}

EncoderParams toy_params(std::uint64_t seed, std::size_t layers = 1) {
  Rng rng = make_rng(seed, "encoder-test");
  return init_encoder_params(4, kDim, 0, layers, rng);
}

double max_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST_CASE("initialisation respects bounds and is seeded") {
  Rng rng = make_rng(3, "init");
  EncoderParams p = init_encoder_params(10, 16, 0, 2, rng);
  CHECK(p.hidden == 32);
  CHECK(p.layers.size() == 2);
  const double bound = 1.0 / std::sqrt(16.0);
  for (diff::Parameter* param : p.parameters()) {
    const std::string& n = param->name();
    for (double v : param->value().data()) {
      if (n.find("gain") != std::string::npos) {
        CHECK(v == 1.0);
      } else if (n.find("shift") != std::string::npos) {
        CHECK(v == 0.0);
      } else {
        CHECK(std::abs(v) <= bound);
      }
    }
  }
  Rng again = make_rng(3, "init");
  EncoderParams q = init_encoder_params(10, 16, 0, 2, again);
  auto pa = p.parameters();
  auto qa = q.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(max_diff(pa[i]->value(), qa[i]->value()) == 0.0);
  CHECK(p.regularized().size() == 1);
  CHECK_THROWS_AS(init_encoder_params(10, 0, 0, 1, again), ConfigError);
  CHECK_THROWS_AS(init_encoder_params(10, 4, 0, 0, again), ConfigError);
}

TEST_CASE("embedding is invariant to neighbour and compound order") {
  EncoderParams p = toy_params(1, 2);
  SubHypergraph sub = toy_s1();
  sub.neighbors.push_back(
      slot(HyperedgeId(1), bit(SharingType::kCrossSharing), {CompoundId(2), CompoundId(3)}));
  sub.neighbor_mask.push_back(1);
  const Tensor base = embed(p, sub).vector;

  SubHypergraph perm = sub;
  std::swap(perm.neighbors[0], perm.neighbors[1]);
  std::swap(perm.target_compounds[0], perm.target_compounds[1]);
  std::swap(perm.neighbors[0].compounds[0], perm.neighbors[0].compounds[1]);
  CHECK(max_diff(base, embed(p, perm).vector) < 1e-12);
}

TEST_CASE("masked slots do not change the embedding") {
  EncoderParams p = toy_params(2, 2);
  SubHypergraph sub = toy_s1();
  const Tensor base = embed(p, sub).vector;

  SubHypergraph padded = sub;
  padded.target_compounds.push_back(CompoundId(3));
  padded.target_mask.push_back(0);
  padded.neighbors[0].compounds.push_back(CompoundId(0));
  padded.neighbors[0].compound_mask.push_back(0);
  padded.neighbors.push_back(
      slot(HyperedgeId(3), bit(SharingType::kProductSharing), {CompoundId(3)}));
  padded.neighbor_mask.push_back(0);
  CHECK(max_diff(base, embed(p, padded).vector) < 1e-12);
}

TEST_CASE("singleton hyperedge without neighbours encodes") {
  EncoderParams p = toy_params(3);
  SubHypergraph sub;
  sub.target_compounds = {CompoundId(3)};
  sub.target_mask = {1};
  HyperedgeEmbedding e = embed(p, sub);
  CHECK(e.vector.size() == kDim);
  CHECK(e.vector.all_finite());
  CHECK_FALSE(e.edge.has_value());
  CHECK(e.layer == 1);
}

TEST_CASE("neighbour-only compound influences the target") {
  EncoderParams p = toy_params(4);
  SubHypergraph sub = toy_s1();
  const Tensor base = embed(p, sub).vector;
  p.features.value().at(2, 0) += 0.5;  // c3 is only in S2
  CHECK(max_diff(base, embed(p, sub).vector) > 1e-6);

  SubHypergraph alone = sub;
  alone.neighbor_mask = {0};
  const Tensor isolated = embed(p, alone).vector;
  p.features.value().at(2, 0) -= 1.0;
  CHECK(max_diff(isolated, embed(p, alone).vector) == 0.0);
}

TEST_CASE("homogeneous mode ignores the sharing type") {
  EncoderParams p = toy_params(5);
  SubHypergraph a = toy_s1();
  SubHypergraph b = a;
  b.neighbors[0].types = bit(SharingType::kCrossSharing);
  EncodeOptions homo;
  homo.homogeneous = true;
  CHECK(max_diff(embed(p, a, homo).vector, embed(p, b, homo).vector) == 0.0);
  CHECK(max_diff(embed(p, a).vector, embed(p, b).vector) > 1e-6);
}

TEST_CASE("dropout without an rng is inactive and with one is seeded") {
  EncoderParams p = toy_params(6);
  SubHypergraph sub = toy_s1();
  EncodeOptions off;
  off.dropout = 0.5;
  CHECK(max_diff(embed(p, sub).vector, embed(p, sub, off).vector) == 0.0);
  Rng r1 = make_rng(9, "drop");
  Rng r2 = make_rng(9, "drop");
  EncodeOptions on1 = off, on2 = off;
  on1.rng = &r1;
  on2.rng = &r2;
  CHECK(max_diff(embed(p, sub, on1).vector, embed(p, sub, on2).vector) == 0.0);
}

TEST_CASE("norm cap and malformed inputs are rejected") {
  EncoderParams p = toy_params(7);
  SubHypergraph sub = toy_s1();
  EncodeOptions capped;
  capped.norm_cap = 1e-3;
  CHECK_THROWS_AS(embed(p, sub, capped), NumericalError);

  SubHypergraph empty = sub;
  empty.target_mask = {0, 0};
  CHECK_THROWS_AS(embed(p, empty), Error);
  SubHypergraph bad = sub;
  bad.neighbor_mask.clear();
  CHECK_THROWS_AS(embed(p, bad), ShapeError);

  diff::Graph g(false);
  CHECK_THROWS_AS(layer_forward(g, p, 0, g.constant(Tensor(diff::Shape{kDim + 1})), diff::Var(),
                                {}, {}),
                  ShapeError);
}

TEST_CASE("layer without neighbours is the feed-forward block") {
  EncoderParams p = toy_params(8);
  diff::Graph g(false);
  Tensor h = Tensor::vector({0.1, -0.2, 0.3, 0.0, 0.5, -0.4, 0.2, 0.05});
  LayerTrace trace;
  diff::Var out = layer_forward(g, p, 0, g.constant(h), diff::Var(), {}, {}, {}, &trace);
  CHECK(trace.attention.size() == 0);

  auto ln = [](std::vector<double> x) {
    double mu = 0, var = 0;
    for (double v : x) mu += v;
    mu /= x.size();
    for (double v : x) var += (v - mu) * (v - mu);
    var /= x.size();
    for (double& v : x) v = (v - mu) / std::sqrt(var + 1e-5);
    return x;
  };
  const EncoderLayer& w = p.layers[0];
  std::vector<double> x = ln(std::vector<double>(h.data().begin(), h.data().end()));
  std::vector<double> hidden(p.hidden);
  for (std::size_t j = 0; j < p.hidden; ++j) {
    double s = w.ff_in_bias.value()[j];
    for (std::size_t i = 0; i < kDim; ++i) s += x[i] * w.ff_in.value().at(i, j);
    hidden[j] = std::max(0.0, s);
  }
  std::vector<double> y(kDim);
  for (std::size_t i = 0; i < kDim; ++i) {
    double s = w.ff_out_bias.value()[i];
    for (std::size_t j = 0; j < p.hidden; ++j) s += hidden[j] * w.ff_out.value().at(j, i);
    y[i] = x[i] + s;
  }
  y = ln(y);
  for (std::size_t i = 0; i < kDim; ++i) CHECK(out.value()[i] == doctest::Approx(y[i]).epsilon(1e-12));
}

TEST_CASE("attention trace is a distribution over neighbours and members") {
  EncoderParams p = toy_params(9);
  diff::Graph g(false);
  Tensor nb = Tensor::matrix(3, kDim, std::vector<double>(3 * kDim, 0.1));
  nb.at(1, 2) = 0.7;
  std::vector<EdgeTypeSet> types = {1, kMembershipBit, 4};
  std::vector<std::uint8_t> mask = {1, 0, 1};
  LayerTrace trace;
  layer_forward(g, p, 0, g.constant(Tensor(diff::Shape{kDim}, 0.2)), g.constant(nb), types, mask,
                {}, &trace);
  REQUIRE(trace.attention.size() == 2);
  CHECK(trace.attention[0] + trace.attention[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mean pool is the member average") {
  EncoderParams p = toy_params(10);
  diff::Graph g(false);
  const std::vector<CompoundId> members = {CompoundId(0), CompoundId(3)};
  diff::Var v = mean_pool_encode(g, p, members);
  for (std::size_t i = 0; i < kDim; ++i) {
    const double expect = 0.5 * (p.features.value().at(0, i) + p.features.value().at(3, i));
    CHECK(v.value()[i] == doctest::Approx(expect).epsilon(1e-15));
  }
  CHECK_THROWS_AS(mean_pool_encode(g, p, {}), Error);
}

TEST_CASE("encoder to loss gradients match finite differences") {
  auto one = testing::encoder_loss_suite(11, 6);
  CHECK_MESSAGE(one.passed(), one.first_failure);
  auto two = testing::encoder_loss_suite(12, 3, {}, DecoderKind::kPairRE, 2);
  CHECK_MESSAGE(two.passed(), two.first_failure);
  auto mlp = testing::encoder_loss_suite(13, 3, {}, DecoderKind::kMlp);
  CHECK_MESSAGE(mlp.passed(), mlp.first_failure);
  auto transe = testing::encoder_loss_suite(14, 3, {}, DecoderKind::kTransE);
  CHECK_MESSAGE(transe.passed(), transe.first_failure);
}

}  // namespace
}  // namespace enzkg
