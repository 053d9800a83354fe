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

#include "enzkg/diffmath.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace enzkg::diff {

Shape::Shape(std::initializer_list<std::size_t> dims) {
  if (dims.size() > kMaxRank) throw ShapeError("tensor rank above 3");
  for (std::size_t d : dims) dims_[rank_++] = d;
}

std::size_t Shape::numel() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < rank_; ++i) n *= dims_[i];
  return n;
}

std::string Shape::str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < rank_; ++i) {
    if (i) s += 'x';
    s += std::to_string(dims_[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_.str());
  }
}

Tensor Tensor::vector(std::vector<double> v) {
  Shape s{v.size()};
  return Tensor(s, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return Tensor(Shape{rows, cols}, std::move(v));
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_.str());
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Parameter::Parameter(std::string name, Tensor value)
    : name_(std::move(name)), value_(std::move(value)), grad_(value_.shape(), 0.0) {}

const Tensor& Var::value() const { return graph_->value(id_); }

// ---- graph --------------------------------------------------------------

Var Graph::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::leaf(Tensor value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = record_;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::parameter(Parameter& p) {
  for (const auto& [param, id] : params_) {
    if (param == &p) return Var(this, id);
  }
  Node n;
  n.external = &p.value();
  n.grad_target = &p.grad();
  n.requires_grad = record_;
  nodes_.push_back(std::move(n));
  params_.emplace_back(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Graph::emit(Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  Node n;
  n.owned = std::move(value);
  if (record_) {
    for (const Var& v : inputs) {
      if (nodes_[v.id()].requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
    if (n.requires_grad) n.backward = std::move(fn);
  }
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Graph::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.owned;
}

Tensor& Graph::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad_target) return *n.grad_target;
  if (!n.grad_ready) {
    n.own_grad = Tensor(value(id).shape(), 0.0);
    n.grad_ready = true;
  }
  return n.own_grad;
}

Tensor Graph::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad_target) return *n.grad_target;
  if (n.grad_ready) return n.own_grad;
  return Tensor(value(v.id()).shape(), 0.0);
}

void Graph::backward(Var root) {
  if (root.graph_ != this) throw Error("backward: variable belongs to another graph");
  if (value(root.id()).size() != 1) {
    throw ShapeError("backward: root must be scalar, got " + value(root.id()).shape().str());
  }
  if (!record_ || !nodes_[root.id()].requires_grad) return;
  grad_buffer(root.id())[0] += 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && n.grad_ready) n.backward(*this, i);
  }
}

// ---- kernels ------------------------------------------------------------

namespace {

// C[m,n] += A[m,k] B[k,n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// C[m,k] += A[m,n] B[k,n]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * n;
    double* ci = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ai[j] * bp[j];
      ci[p] += s;
    }
  }
}

// C[k,n] += A[m,k]^T B[m,n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    const double* bi = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.str() + " and " + b.str());
}

[[noreturn]] void shape_fail(const char* op, const Shape& a) {
  throw ShapeError(std::string(op) + ": unsupported shape " + a.str());
}

void same_graph(const char* op, const Var& a, const Var& b) {
  if (&a.graph() != &b.graph()) throw Error(std::string(op) + ": operands from different graphs");
}

// Broadcast test: [m,n] against [n].
bool row_broadcast(const Shape& a, const Shape& b) {
  return a.rank() == 2 && b.rank() == 1 && a[1] == b[0];
}

}  // namespace

// ---- primitives ---------------------------------------------------------

Var matmul(Var a, Var b) {
  same_graph("matmul", a, b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  std::size_t m, k, n;
  Shape out;
  if (sa.rank() == 2 && sb.rank() == 2 && sa[1] == sb[0]) {
    m = sa[0], k = sa[1], n = sb[1];
    out = Shape{m, n};
  } else if (sa.rank() == 1 && sb.rank() == 2 && sa[0] == sb[0]) {
    m = 1, k = sa[0], n = sb[1];
    out = Shape{n};
  } else if (sa.rank() == 2 && sb.rank() == 1 && sa[1] == sb[0]) {
    m = sa[0], k = sa[1], n = 1;
    out = Shape{m};
  } else {
    shape_fail("matmul", sa, sb);
  }
  Tensor c(out, 0.0);
  gemm_nn(a.value().ptr(), b.value().ptr(), c.ptr(), m, k, n);
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().emit(std::move(c), {a, b}, [=](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    if (g.requires_grad(ia)) gemm_nt(dc.ptr(), g.value(ib).ptr(), g.grad_buffer(ia).ptr(), m, n, k);
    if (g.requires_grad(ib)) gemm_tn(g.value(ia).ptr(), dc.ptr(), g.grad_buffer(ib).ptr(), m, k, n);
  });
}

Var add(Var a, Var b) {
  same_graph("add", a, b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  const bool bcast = row_broadcast(sa, sb);
  if (!(sa == sb) && !bcast) shape_fail("add", sa, sb);
  Tensor c = a.value();
  const std::size_t n = sb.numel();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b.value()[i % n];
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().emit(std::move(c), {a, b}, [=](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    if (g.requires_grad(ia)) {
      Tensor& da = g.grad_buffer(ia);
      for (std::size_t i = 0; i < dc.size(); ++i) da[i] += dc[i];
    }
    if (g.requires_grad(ib)) {
      Tensor& db = g.grad_buffer(ib);
      for (std::size_t i = 0; i < dc.size(); ++i) db[i % n] += dc[i];
    }
  });
}

Var subtract(Var a, Var b) {
  same_graph("subtract", a, b);
  if (!(a.shape() == b.shape())) shape_fail("subtract", a.shape(), b.shape());
  Tensor c = a.value();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().emit(std::move(c), {a, b}, [=](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    if (g.requires_grad(ia)) {
      Tensor& da = g.grad_buffer(ia);
      for (std::size_t i = 0; i < dc.size(); ++i) da[i] += dc[i];
    }
    if (g.requires_grad(ib)) {
      Tensor& db = g.grad_buffer(ib);
      for (std::size_t i = 0; i < dc.size(); ++i) db[i] -= dc[i];
    }
  });
}

Var hadamard(Var a, Var b) {
  same_graph("hadamard", a, b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (!(sa == sb) && !row_broadcast(sa, sb)) shape_fail("hadamard", sa, sb);
  const std::size_t n = sb.numel();
  Tensor c = a.value();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= b.value()[i % n];
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().emit(std::move(c), {a, b}, [=](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    const Tensor& av = g.value(ia);
    const Tensor& bv = g.value(ib);
    if (g.requires_grad(ia)) {
      Tensor& da = g.grad_buffer(ia);
      for (std::size_t i = 0; i < dc.size(); ++i) da[i] += dc[i] * bv[i % n];
    }
    if (g.requires_grad(ib)) {
      Tensor& db = g.grad_buffer(ib);
      for (std::size_t i = 0; i < dc.size(); ++i) db[i % n] += dc[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor c = a.value();
  for (double& x : c.data()) x *= factor;
  const std::size_t ia = a.id();
  return a.graph().emit(std::move(c), {a}, [=](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    Tensor& da = g.grad_buffer(ia);
    for (std::size_t i = 0; i < dc.size(); ++i) da[i] += factor * dc[i];
  });
}

Var add_scalar(Var a, double shift) {
  Tensor c = a.value();
  for (double& x : c.data()) x += shift;
  const std::size_t ia = a.id();
  return a.graph().emit(std::move(c), {a}, [=](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    Tensor& da = g.grad_buffer(ia);
    for (std::size_t i = 0; i < dc.size(); ++i) da[i] += dc[i];
  });
}

Var l1_norm(Var a) {
  const Shape& s = a.shape();
  if (s.rank() != 1 && s.rank() != 2) shape_fail("l1_norm", s);
  const std::size_t rows = s.rank() == 2 ? s[0] : 1;
  const std::size_t cols = s.cols();
  Tensor c(s.rank() == 2 ? Shape{rows} : Shape{}, 0.0);
  const Tensor& av = a.value();
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += std::abs(av[r * cols + j]);
    c[r] = acc;
  }
  const std::size_t ia = a.id();
  return a.graph().emit(std::move(c), {a}, [=](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    const Tensor& x = g.value(ia);
    Tensor& da = g.grad_buffer(ia);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < cols; ++j) {
        const double v = x[r * cols + j];
        const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        da[r * cols + j] += sign * dc[r];
      }
    }
  });
}

namespace {

void softmax_rows(const Tensor& x, Tensor& y) {
  const std::size_t cols = x.cols();
  const std::size_t rows = x.size() / cols;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.ptr() + r * cols;
    double* yr = y.ptr() + r * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) z += (yr[j] = std::exp(xr[j] - mx));
    for (std::size_t j = 0; j < cols; ++j) yr[j] /= z;
  }
}

}  // namespace

Var softmax(Var a) {
  const Shape& s = a.shape();
  if (s.rank() != 1 && s.rank() != 2) shape_fail("softmax", s);
  Tensor y(s, 0.0);
  softmax_rows(a.value(), y);
  const std::size_t ia = a.id();
  const std::size_t cols = s.cols();
  return a.graph().emit(std::move(y), {a}, [=](Graph& g, std::size_t self) {
    const Tensor& dy = g.grad_buffer(self);
    const Tensor& yv = g.value(self);
    Tensor& da = g.grad_buffer(ia);
    for (std::size_t r = 0; r < yv.size() / cols; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < cols; ++j) dot += yv[r * cols + j] * dy[r * cols + j];
      for (std::size_t j = 0; j < cols; ++j) {
        da[r * cols + j] += yv[r * cols + j] * (dy[r * cols + j] - dot);
      }
    }
  });
}

Var log_softmax(Var a) {
  const Shape& s = a.shape();
  if (s.rank() != 1 && s.rank() != 2) shape_fail("log_softmax", s);
  const std::size_t cols = s.cols();
  Tensor y = a.value();
  for (std::size_t r = 0; r < y.size() / cols; ++r) {
    double* yr = y.ptr() + r * cols;
    const double mx = *std::max_element(yr, yr + cols);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) z += std::exp(yr[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < cols; ++j) yr[j] -= lse;
  }
  const std::size_t ia = a.id();
  return a.graph().emit(std::move(y), {a}, [=](Graph& g, std::size_t self) {
    const Tensor& dy = g.grad_buffer(self);
    const Tensor& yv = g.value(self);
    Tensor& da = g.grad_buffer(ia);
    for (std::size_t r = 0; r < yv.size() / cols; ++r) {
      double total = 0.0;
      for (std::size_t j = 0; j < cols; ++j) total += dy[r * cols + j];
      for (std::size_t j = 0; j < cols; ++j) {
        da[r * cols + j] += dy[r * cols + j] - std::exp(yv[r * cols + j]) * total;
      }
    }
  });
}

Var layer_norm(Var x, Var gain, Var shift, double eps) {
  const Shape& s = x.shape();
  if (s.rank() != 1 && s.rank() != 2) shape_fail("layer_norm", s);
  const std::size_t n = s.cols();
  if (gain.shape().rank() != 1 || gain.shape()[0] != n) shape_fail("layer_norm", s, gain.shape());
  if (!(shift.shape() == gain.shape())) shape_fail("layer_norm", gain.shape(), shift.shape());
  const std::size_t rows = s.numel() / n;
  const Tensor& xv = x.value();
  const Tensor& gv = gain.value();
  const Tensor& bv = shift.value();
  Tensor y(s, 0.0);
  // Normalised input and per-row inverse std are kept for the backward pass.
  auto xhat = std::make_shared<std::vector<double>>(s.numel());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.ptr() + r * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += xr[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = (xr[j] - mu) * inv;
      (*xhat)[r * n + j] = h;
      y[r * n + j] = gv[j] * h + bv[j];
    }
  }
  const std::size_t ix = x.id(), ig = gain.id(), ib = shift.id();
  return x.graph().emit(std::move(y), {x, gain, shift}, [=](Graph& g, std::size_t self) {
    const Tensor& dy = g.grad_buffer(self);
    const Tensor& gv2 = g.value(ig);
    if (g.requires_grad(ig)) {
      Tensor& dg = g.grad_buffer(ig);
      for (std::size_t i = 0; i < dy.size(); ++i) dg[i % n] += dy[i] * (*xhat)[i];
    }
    if (g.requires_grad(ib)) {
      Tensor& db = g.grad_buffer(ib);
      for (std::size_t i = 0; i < dy.size(); ++i) db[i % n] += dy[i];
    }
    if (g.requires_grad(ix)) {
      Tensor& dx = g.grad_buffer(ix);
      std::vector<double> dh(n);
      for (std::size_t r = 0; r < rows; ++r) {
        double sum_dh = 0.0, sum_dh_h = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          dh[j] = dy[r * n + j] * gv2[j];
          sum_dh += dh[j];
          sum_dh_h += dh[j] * (*xhat)[r * n + j];
        }
        const double k = (*inv_std)[r] / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
          dx[r * n + j] += k * (static_cast<double>(n) * dh[j] - sum_dh -
                                (*xhat)[r * n + j] * sum_dh_h);
        }
      }
    }
  });
}

Var relu(Var a) {
  Tensor c = a.value();
  for (double& x : c.data()) x = x > 0.0 ? x : 0.0;
  const std::size_t ia = a.id();
  return a.graph().emit(std::move(c), {a}, [=](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    const Tensor& x = g.value(ia);
    Tensor& da = g.grad_buffer(ia);
    for (std::size_t i = 0; i < dc.size(); ++i) {
      if (x[i] > 0.0) da[i] += dc[i];
    }
  });
}

Var log_sigmoid(Var a) {
  Tensor c = a.value();
  for (double& x : c.data()) x = std::min(x, 0.0) - std::log1p(std::exp(-std::abs(x)));
  const std::size_t ia = a.id();
  return a.graph().emit(std::move(c), {a}, [=](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    const Tensor& x = g.value(ia);
    Tensor& da = g.grad_buffer(ia);
    for (std::size_t i = 0; i < dc.size(); ++i) {
      // d/dx log sigma(x) = sigma(-x)
      const double z = std::exp(-std::abs(x[i]));
      const double sig_neg = x[i] >= 0.0 ? z / (1.0 + z) : 1.0 / (1.0 + z);
      da[i] += dc[i] * sig_neg;
    }
  });
}

Var sum(Var a) {
  const Tensor& av = a.value();
  Tensor c = Tensor::scalar(std::accumulate(av.data().begin(), av.data().end(), 0.0));
  const std::size_t ia = a.id();
  return a.graph().emit(std::move(c), {a}, [=](Graph& g, std::size_t self) {
    const double d = g.grad_buffer(self)[0];
    for (double& x : g.grad_buffer(ia).data()) x += d;
  });
}

Var mean(Var a) {
  if (a.value().size() == 0) shape_fail("mean", a.shape());
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var mean_rows(Var a) {
  const Shape& s = a.shape();
  if (s.rank() != 2 || s[0] == 0) shape_fail("mean_rows", s);
  const std::size_t rows = s[0], cols = s[1];
  Tensor c(Shape{cols}, 0.0);
  const Tensor& av = a.value();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) c[j] += av[r * cols + j];
  }
  const double inv = 1.0 / static_cast<double>(rows);
  for (double& x : c.data()) x *= inv;
  const std::size_t ia = a.id();
  return a.graph().emit(std::move(c), {a}, [=](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    Tensor& da = g.grad_buffer(ia);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < cols; ++j) da[r * cols + j] += dc[j] * inv;
    }
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  std::vector<double> data;
  std::vector<std::size_t> ids, offsets;
  for (const Var& p : parts) {
    same_graph("concat", parts[0], p);
    if (p.shape().rank() != 1) shape_fail("concat", p.shape());
    offsets.push_back(data.size());
    ids.push_back(p.id());
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
  }
  Graph& graph = parts[0].graph();
  Var out = graph.emit(Tensor::vector(std::move(data)), parts, [ids, offsets](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!g.requires_grad(ids[k])) continue;
      Tensor& d = g.grad_buffer(ids[k]);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += dc[offsets[k] + i];
    }
  });
  return out;
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no inputs");
  const std::size_t n = rows[0].shape().cols();
  std::vector<double> data;
  std::vector<std::size_t> ids, offsets;
  for (const Var& r : rows) {
    same_graph("stack_rows", rows[0], r);
    const Shape& s = r.shape();
    if ((s.rank() != 1 && s.rank() != 2) || s.cols() != n) shape_fail("stack_rows", rows[0].shape(), s);
    ids.push_back(r.id());
    offsets.push_back(data.size());
    data.insert(data.end(), r.value().data().begin(), r.value().data().end());
  }
  const std::size_t m = data.size() / n;
  return rows[0].graph().emit(Tensor::matrix(m, n, std::move(data)), rows,
                              [ids, offsets](Graph& g, std::size_t self) {
                                const Tensor& dc = g.grad_buffer(self);
                                for (std::size_t k = 0; k < ids.size(); ++k) {
                                  if (!g.requires_grad(ids[k])) continue;
                                  Tensor& d = g.grad_buffer(ids[k]);
                                  for (std::size_t i = 0; i < d.size(); ++i) d[i] += dc[offsets[k] + i];
                                }
                              });
}

Var embedding_lookup(Var table, std::span<const std::size_t> ids) {
  const Shape& s = table.shape();
  if (s.rank() != 2) shape_fail("embedding_lookup", s);
  if (ids.empty()) throw ShapeError("embedding_lookup: empty id list");
  const std::size_t n = s[1];
  Tensor c(Shape{ids.size(), n}, 0.0);
  const Tensor& tv = table.value();
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] >= s[0]) {
      throw ShapeError("embedding_lookup: row " + std::to_string(ids[k]) + " outside " + s.str());
    }
    std::copy_n(tv.ptr() + ids[k] * n, n, c.ptr() + k * n);
  }
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  const std::size_t it = table.id();
  return table.graph().emit(std::move(c), {table}, [=](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    Tensor& dt = g.grad_buffer(it);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      double* dst = dt.ptr() + rows[k] * n;
      for (std::size_t j = 0; j < n; ++j) dst[j] += dc[k * n + j];
    }
  });
}

Var select_row(Var a, std::size_t r) {
  const Shape& s = a.shape();
  if (s.rank() != 2 || r >= s[0]) shape_fail("select_row", s);
  const std::size_t n = s[1];
  std::vector<double> row(a.value().ptr() + r * n, a.value().ptr() + (r + 1) * n);
  const std::size_t ia = a.id();
  return a.graph().emit(Tensor::vector(std::move(row)), {a}, [=](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad_buffer(self);
    Tensor& da = g.grad_buffer(ia);
    for (std::size_t j = 0; j < n; ++j) da[r * n + j] += dc[j];
  });
}

Var element(Var a, std::size_t i) {
  const Shape& s = a.shape();
  if (s.rank() != 1 || i >= s[0]) shape_fail("element", s);
  const std::size_t ia = a.id();
  return a.graph().emit(Tensor::scalar(a.value()[i]), {a}, [=](Graph& g, std::size_t self) {
    g.grad_buffer(ia)[i] += g.grad_buffer(self)[0];
  });
}

Var scaled_dot_attention(Var query, Var keys, Var values, const Tensor* keep,
                         Tensor* weights_out) {
  same_graph("scaled_dot_attention", query, keys);
  same_graph("scaled_dot_attention", query, values);
  const Shape& sq = query.shape();
  const Shape& sk = keys.shape();
  const Shape& sv = values.shape();
  if (sq.rank() != 1 || sk.rank() != 2 || sk[1] != sq[0]) {
    shape_fail("scaled_dot_attention", sq, sk);
  }
  if (sv.rank() != 2 || sv[0] != sk[0]) shape_fail("scaled_dot_attention", sk, sv);
  const std::size_t k = sk[0], d = sq[0], dv = sv[1];
  if (keep && keep->size() != k) shape_fail("scaled_dot_attention", sk, keep->shape());
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(d));

  Tensor scores(Shape{k}, 0.0);
  const Tensor& qv = query.value();
  const Tensor& kv = keys.value();
  const Tensor& vv = values.value();
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += kv[j * d + i] * qv[i];
    scores[j] = s * inv_sqrt;
  }
  auto weights = std::make_shared<Tensor>(Shape{k}, 0.0);
  softmax_rows(scores, *weights);
  if (weights_out) *weights_out = *weights;
  auto applied = std::make_shared<Tensor>(*weights);
  if (keep) {
    for (std::size_t j = 0; j < k; ++j) (*applied)[j] *= (*keep)[j];
  }
  Tensor out(Shape{dv}, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double w = (*applied)[j];
    for (std::size_t i = 0; i < dv; ++i) out[i] += w * vv[j * dv + i];
  }
  std::shared_ptr<Tensor> keep_copy = keep ? std::make_shared<Tensor>(*keep) : nullptr;
  const std::size_t iq = query.id(), ik = keys.id(), iv = values.id();
  return query.graph().emit(
      std::move(out), {query, keys, values}, [=](Graph& g, std::size_t self) {
        const Tensor& dout = g.grad_buffer(self);
        const Tensor& vals = g.value(iv);
        if (g.requires_grad(iv)) {
          Tensor& dvals = g.grad_buffer(iv);
          for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < dv; ++i) dvals[j * dv + i] += (*applied)[j] * dout[i];
          }
        }
        if (!g.requires_grad(iq) && !g.requires_grad(ik)) return;
        std::vector<double> dw(k);
        double dot = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          double s = 0.0;
          for (std::size_t i = 0; i < dv; ++i) s += vals[j * dv + i] * dout[i];
          if (keep_copy) s *= (*keep_copy)[j];
          dw[j] = s;
          dot += s * (*weights)[j];
        }
        std::vector<double> ds(k);
        for (std::size_t j = 0; j < k; ++j) ds[j] = (*weights)[j] * (dw[j] - dot) * inv_sqrt;
        const Tensor& q = g.value(iq);
        const Tensor& keys_v = g.value(ik);
        if (g.requires_grad(ik)) {
          Tensor& dk = g.grad_buffer(ik);
          for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < d; ++i) dk[j * d + i] += ds[j] * q[i];
          }
        }
        if (g.requires_grad(iq)) {
          Tensor& dq = g.grad_buffer(iq);
          for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < d; ++i) dq[i] += ds[j] * keys_v[j * d + i];
          }
        }
      });
}

// ---- gradient checking --------------------------------------------------

GradCheckReport grad_check_parameters(const std::function<Var(Graph&)>& f,
                                      std::span<Parameter* const> params,
                                      const GradCheckOptions& options) {
  for (Parameter* p : params) p->zero_grad();
  {
    Graph g;
    Var out = f(g);
    if (out.value().size() != 1) {
      throw ShapeError("grad_check: output must be scalar, got " + out.shape().str());
    }
    g.backward(out);
  }
  auto evaluate = [&]() {
    Graph g(false);
    return f(g).item();
  };
  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& value = params[pi]->value();
    const Tensor& grad = params[pi]->grad();
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double orig = value[k];
      value[k] = orig + options.eps;
      const double up = evaluate();
      value[k] = orig - options.eps;
      const double down = evaluate();
      value[k] = orig;
      const double numeric = (up - down) / (2.0 * options.eps);
      const double analytic = grad[k];
      const double abs_err = std::abs(analytic - numeric);
      ++report.checked;
      if (abs_err <= options.abs_floor) continue;
      const double rel = abs_err / std::max(std::abs(analytic), std::abs(numeric));
      report.max_rel_error = std::max(report.max_rel_error, rel);
      if (rel > options.tol) report.failures.push_back({pi, k, analytic, numeric});
    }
  }
  return report;
}

GradCheckReport grad_check(const ScalarFn& f, std::vector<Tensor> inputs,
                           const GradCheckOptions& options) {
  std::vector<Parameter> params;
  params.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    params.emplace_back("input" + std::to_string(i), std::move(inputs[i]));
  }
  std::vector<Parameter*> ptrs;
  for (auto& p : params) ptrs.push_back(&p);
  auto wrapped = [&](Graph& g) {
    std::vector<Var> leaves;
    leaves.reserve(params.size());
    for (auto& p : params) leaves.push_back(g.parameter(p));
    return f(g, leaves);
  };
  return grad_check_parameters(wrapped, ptrs, options);
}

}  // namespace enzkg::diff
