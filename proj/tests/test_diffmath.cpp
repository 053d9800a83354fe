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
#include "enzkg/diffmath.hpp"
#include "grad_suite.hpp"

namespace enzkg::diff {
namespace {

TEST_CASE("hadamard is elementwise") {
  Graph g;
  Var c = hadamard(g.constant(Tensor::vector({1, 2, 3})), g.constant(Tensor::vector({4, 5, 6})));
  CHECK(c.value()[0] == 4);
  CHECK(c.value()[1] == 10);
  CHECK(c.value()[2] == 18);
}

TEST_CASE("l1 of x - x is zero with zero subgradient") {
  Graph g;
  Var x = g.leaf(Tensor::vector({0.3, -2.0, 5.0}));
  Var d = l1_norm(subtract(x, x));
  CHECK(d.item() == 0.0);
  g.backward(d);
  const Tensor gx = g.grad(x);
  for (double v : gx.data()) CHECK(v == 0.0);
}

TEST_CASE("l1 gradient is the sign") {
  Graph g;
  Var x = g.leaf(Tensor::vector({0.5, -1.5, 0.0, 2.0}));
  g.backward(l1_norm(x));
  const Tensor gx = g.grad(x);
  CHECK(gx[0] == 1.0);
  CHECK(gx[1] == -1.0);
  CHECK(gx[2] == 0.0);
  CHECK(gx[3] == 1.0);
}

TEST_CASE("softmax of a constant vector is uniform") {
  Graph g(false);
  Var s = softmax(g.constant(Tensor::vector({2.5, 2.5, 2.5, 2.5, 2.5})));
  for (double v : s.value().data()) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("softmax is shift invariant") {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    Tensor x = testing::random_tensor(Shape{7}, rng, -5, 5);
    Tensor y = x;
    for (double& v : y.data()) v += 123.25;
    Graph g(false);
    Var a = softmax(g.constant(x));
    Var b = softmax(g.constant(y));
    for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(a.value()[i] - b.value()[i]) < 1e-12);
  }
}

TEST_CASE("matmul values") {
  Graph g(false);
  Var a = g.constant(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  Var b = g.constant(Tensor::matrix(3, 2, {7, 8, 9, 10, 11, 12}));
  Var c = matmul(a, b);
  CHECK(c.value().at(0, 0) == 58);
  CHECK(c.value().at(0, 1) == 64);
  CHECK(c.value().at(1, 0) == 139);
  CHECK(c.value().at(1, 1) == 154);
}

TEST_CASE("layer norm normalises the last dimension") {
  Graph g(false);
  Var x = g.constant(Tensor::matrix(2, 4, {1, 2, 3, 4, -1, 0, 0, 1}));
  Var y = layer_norm(x, g.constant(Tensor(Shape{4}, 1.0)), g.constant(Tensor(Shape{4}, 0.0)));
  for (std::size_t r = 0; r < 2; ++r) {
    double mean = 0, var = 0;
    for (double v : y.value().row(r)) mean += v / 4;
    for (double v : y.value().row(r)) var += (v - mean) * (v - mean) / 4;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("attention keep vector scales the weights after the softmax") {
  Graph g(false);
  Var q = g.constant(Tensor::vector({1, 0}));
  Var k = g.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
  Var v = g.constant(Tensor::matrix(2, 2, {3, 4, 100, 200}));
  Tensor keep(Shape{2}, std::vector<double>{2, 0});
  Tensor w;
  Var out = scaled_dot_attention(q, k, v, &keep, &w);
  const double e = std::exp(1.0 / std::sqrt(2.0));
  const double w0 = e / (e + 1.0);
  CHECK(w[0] == doctest::Approx(w0).epsilon(1e-14));
  CHECK(w[0] + w[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(out.value()[0] == doctest::Approx(2 * w0 * 3).epsilon(1e-14));
  CHECK(out.value()[1] == doctest::Approx(2 * w0 * 4).epsilon(1e-14));
}

TEST_CASE("single key gets weight one") {
  Graph g(false);
  Tensor w;
  Var out = scaled_dot_attention(g.constant(Tensor::vector({0.3, -2})),
                                 g.constant(Tensor::matrix(1, 2, {5, 7})),
                                 g.constant(Tensor::matrix(1, 2, {1.5, 2.5})), nullptr, &w);
  CHECK(w[0] == 1.0);
  CHECK(out.value()[0] == 1.5);
}

TEST_CASE("shape errors name the primitive") {
  Graph g;
  Var a = g.constant(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  Var b = g.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    CHECK(what.find("matmul") != std::string::npos);
    CHECK(what.find("[2x3]") != std::string::npos);
  }
  CHECK_THROWS_AS(hadamard(a, b), ShapeError);
  CHECK_THROWS_AS(element(g.constant(Tensor::vector({1})), 3), ShapeError);
}

TEST_CASE("grad_check rejects non-scalar outputs") {
  auto f = [](Graph&, std::span<const Var> v) { return v[0]; };
  CHECK_THROWS_AS(grad_check(f, {Tensor::vector({1, 2})}), ShapeError);
}

TEST_CASE("grad_check catches a wrong backward") {
  // x^2 with a backward that forgets the factor 2.
  auto f = [](Graph& g, std::span<const Var> v) {
    const Tensor& x = v[0].value();
    const std::size_t in = v[0].id();
    Var sq = g.emit(Tensor::scalar(x[0] * x[0]), {v[0]}, [in](Graph& gg, std::size_t self) {
      gg.grad_buffer(in)[0] += gg.grad_buffer(self)[0] * gg.value(in)[0];
    });
    return sq;
  };
  GradCheckReport r = grad_check(f, {Tensor::vector({0.7})});
  CHECK_FALSE(r.passed());
  CHECK(r.failures.size() == 1);
  CHECK(r.max_rel_error == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("gradients accumulate when a node is reused") {
  Graph g;
  Var x = g.leaf(Tensor::vector({1.5, -2}));
  Var y = sum(hadamard(x, x));
  g.backward(y);
  CHECK(g.grad(x)[0] == doctest::Approx(3.0));
  CHECK(g.grad(x)[1] == doctest::Approx(-4.0));
}

TEST_CASE("every primitive passes grad_check") {
  auto r = testing::primitive_suite(17, 20);
  INFO(r.first_failure);
  CHECK(r.passed());
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("pairre loss passes grad_check") {
  auto r = testing::pairre_loss_suite(5, 10);
  INFO(r.first_failure);
  CHECK(r.passed());
}

}  // namespace
}  // namespace enzkg::diff
