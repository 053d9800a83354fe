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

// Dense tensors and a reverse-mode tape, sized for the hypergraph encoder
// and the relation decoders. Everything is float64.

#ifndef ENZKG_DIFFMATH_HPP_
#define ENZKG_DIFFMATH_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "enzkg/common.hpp"

namespace enzkg::diff {

class Shape {
 public:
  static constexpr std::size_t kMaxRank = 3;

  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);

  std::size_t rank() const { return rank_; }
  std::size_t operator[](std::size_t i) const { return dims_[i]; }
  std::size_t numel() const;
  // Last dimension (1 for scalars).
  std::size_t cols() const { return rank_ == 0 ? 1 : dims_[rank_ - 1]; }
  // Product of all leading dimensions.
  std::size_t rows() const { return numel() / cols(); }
  std::string str() const;

  friend bool operator==(const Shape& a, const Shape& b) {
    return a.rank_ == b.rank_ && a.dims_ == b.dims_;
  }

 private:
  std::array<std::size_t, kMaxRank> dims_{};
  std::size_t rank_ = 0;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.rows(); }
  std::size_t cols() const { return shape_.cols(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* ptr() { return data_.data(); }
  const double* ptr() const { return data_.data(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }
  double item() const;

  void fill(double v);
  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Trainable tensor with its accumulated gradient.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  const std::string& name() const { return name_; }
  Tensor& value() { return value_; }
  const Tensor& value() const { return value_; }
  Tensor& grad() { return grad_; }
  const Tensor& grad() const { return grad_; }
  void zero_grad() { grad_.fill(0.0); }

 private:
  std::string name_;
  Tensor value_;
  Tensor grad_;
};

class Graph;

// Handle to a node of a Graph. Cheap to copy; only valid while the graph
// lives.
class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  double item() const { return value().item(); }
  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

// Recorded sequence of primitive applications. Nodes are appended in
// evaluation order, so reverse order is a valid topological order for the
// backward sweep.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  explicit Graph(bool record_grad = true) : record_(record_grad) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Leaf whose gradient is kept in the graph (see grad()).
  Var leaf(Tensor value);
  // Leaf aliasing a parameter. Gradients accumulate into p.grad(); the same
  // parameter always maps to the same node.
  Var parameter(Parameter& p);

  // Seeds d(root)/d(root) = 1 and runs the backward sweep once.
  void backward(Var root);
  // Gradient of v after backward(); zeros when v was not reached.
  Tensor grad(Var v) const;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  // Used by primitives.
  Var emit(Tensor value, std::span<const Var> inputs, BackwardFn fn);
  Var emit(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
    return emit(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(fn));
  }
  const Tensor& value(std::size_t id) const;
  Tensor& grad_buffer(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor own_grad;
    Tensor* grad_target = nullptr;
    bool grad_ready = false;
    bool requires_grad = false;
    BackwardFn backward;
  };

  bool record_;
  std::vector<Node> nodes_;
  std::vector<std::pair<const Parameter*, std::size_t>> params_;
};

// ---- primitives ---------------------------------------------------------

// [m,k]x[k,n] -> [m,n]; [k]x[k,n] -> [n]; [m,k]x[k] -> [m].
Var matmul(Var a, Var b);
// Same shape, or [m,n] + [n] broadcast over rows.
Var add(Var a, Var b);
Var subtract(Var a, Var b);
// Same shape, or [m,n] * [n] broadcast over rows.
Var hadamard(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double shift);
// Sum of |x| over the last dimension; [n] -> scalar, [m,n] -> [m].
// Subgradient at 0 is 0.
Var l1_norm(Var a);
// Over the last dimension.
Var softmax(Var a);
Var log_softmax(Var a);
// Normalises over the last dimension, then gain * x + shift.
Var layer_norm(Var x, Var gain, Var shift, double eps = 1e-5);
Var relu(Var a);
Var log_sigmoid(Var a);
// Mean of all entries -> scalar.
Var mean(Var a);
// [m,n] -> [n].
Var mean_rows(Var a);
Var sum(Var a);
// Rank-1 inputs joined end to end.
Var concat(std::span<const Var> parts);
// Vertical concatenation: a rank-1 [n] input contributes one row, a rank-2
// [r,n] input all of its rows.
Var stack_rows(std::span<const Var> rows);
// Rows ids of table [V,n] -> [k,n].
Var embedding_lookup(Var table, std::span<const std::size_t> ids);
// Row r of [m,n] -> [n].
Var select_row(Var a, std::size_t r);
// Entry i of a rank-1 tensor -> scalar.
Var element(Var a, std::size_t i);
// softmax(K q / sqrt(n)) weighted sum of V rows. keep, if given, scales
// the weights after the softmax (dropout). weights_out receives the
// post-softmax weights before dropout.
Var scaled_dot_attention(Var query, Var keys, Var values, const Tensor* keep = nullptr,
                         Tensor* weights_out = nullptr);

// ---- gradient checking --------------------------------------------------

struct GradCheckOptions {
  double eps = 1e-5;
  double tol = 1e-4;
  double abs_floor = 1e-8;
};

struct GradCheckFailure {
  std::size_t input = 0;
  std::size_t coord = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::vector<GradCheckFailure> failures;

  bool passed() const { return failures.empty(); }
};

// f builds a scalar from leaves holding the inputs. Every coordinate's
// analytic gradient is compared with the central difference
// (f(x+eps) - f(x-eps)) / 2eps. A coordinate fails when its absolute error
// exceeds abs_floor and its relative error |a-n| / max(|a|,|n|) exceeds tol;
// max_rel_error is taken over coordinates above the floor.
using ScalarFn = std::function<Var(Graph&, std::span<const Var>)>;
GradCheckReport grad_check(const ScalarFn& f, std::vector<Tensor> inputs,
                           const GradCheckOptions& options = {});

// Same contract with the parameters perturbed in place (and restored).
GradCheckReport grad_check_parameters(const std::function<Var(Graph&)>& f,
                                      std::span<Parameter* const> params,
                                      const GradCheckOptions& options = {});

}  // namespace enzkg::diff

#endif  // ENZKG_DIFFMATH_HPP_
