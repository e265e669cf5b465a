/*
 * Copyright 2026 The Linker Authors.
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

#include "linker/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace linker {

using detail::Node;

namespace {

thread_local Tape* g_active_tape = nullptr;
thread_local bool g_grad_enabled = true;

bool recording() { return g_active_tape != nullptr && g_grad_enabled; }

[[noreturn]] void shape_error(const std::string& op, const Shape& a,
                              const Shape& b) {
  throw ShapeMismatch(op + ": incompatible shapes " + shape_str(a) + " and " +
                      shape_str(b));
}

[[noreturn]] void shape_error(const std::string& op, const Shape& a) {
  throw ShapeMismatch(op + ": unsupported shape " + shape_str(a));
}

// Creates the output node. When any input is tracked and a tape is recording,
// the node is marked differentiable and appended to the tape; the caller
// then installs backward_fn.
std::shared_ptr<Node> make_output(Shape shape, std::vector<double> values,
                                  std::initializer_list<const Tensor*> inputs) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->leaf = false;
  if (recording()) {
    for (const Tensor* t : inputs) {
      if (t->requires_grad()) {
        node->requires_grad = true;
        break;
      }
    }
    if (node->requires_grad) g_active_tape->record(node);
  }
  return node;
}

std::shared_ptr<Node> make_output(Shape shape, std::vector<double> values,
                                  const std::vector<Tensor>& inputs) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->leaf = false;
  if (recording()) {
    for (const Tensor& t : inputs) {
      if (t.requires_grad()) {
        node->requires_grad = true;
        break;
      }
    }
    if (node->requires_grad) g_active_tape->record(node);
  }
  return node;
}

// (outer, n, inner) decomposition around an axis.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t n = 1;
  std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis,
                     const std::string& op) {
  if (axis >= shape.size()) shape_error(op + " (axis out of range)", shape);
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.n = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

Shape drop_axis(const Shape& shape, std::size_t axis) {
  Shape out;
  for (std::size_t i = 0; i < shape.size(); ++i)
    if (i != axis) out.push_back(shape[i]);
  return out;
}

// Flat index into `in` for every flat index of `out` (right-aligned).
std::vector<std::size_t> broadcast_map(const Shape& in, const Shape& out) {
  const std::size_t rank = out.size();
  std::vector<std::size_t> in_stride(rank, 0);
  {
    std::size_t stride = 1;
    for (std::size_t i = 0; i < in.size(); ++i) {
      const std::size_t in_axis = in.size() - 1 - i;
      const std::size_t out_axis = rank - 1 - i;
      in_stride[out_axis] = in[in_axis] == 1 ? 0 : stride;
      stride *= in[in_axis];
    }
  }
  const std::size_t total = shape_numel(out);
  std::vector<std::size_t> map(total);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t offset = 0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    map[flat] = offset;
    for (std::size_t d = rank; d-- > 0;) {
      ++idx[d];
      offset += in_stride[d];
      if (idx[d] < out[d]) break;
      offset -= in_stride[d] * idx[d];
      idx[d] = 0;
    }
  }
  return map;
}

template <class Fwd, class Bwd>
Tensor unary_op(const Tensor& x, Fwd fwd, Bwd dydx) {
  std::vector<double> out(x.numel());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(in[i]);
  auto node = make_output(x.shape(), std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn, dydx](Node& self) {
      if (!xn->requires_grad) return;
      auto& g = xn->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] += self.grad[i] * dydx(xn->value[i], self.value[i]);
    };
  }
  return Tensor::from_node(node);
}

// Same-shape binary op; dfa/dfb return partials given (a, b, y).
template <class Fwd, class DA, class DB>
Tensor binary_same(const Tensor& a, const Tensor& b, Fwd fwd, DA dfa, DB dfb) {
  std::vector<double> out(a.numel());
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i], bv[i]);
  auto node = make_output(a.shape(), std::move(out), {&a, &b});
  if (node->requires_grad) {
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    node->backward_fn = [an, bn, dfa, dfb](Node& self) {
      if (an->requires_grad) {
        auto& g = an->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i)
          g[i] += self.grad[i] * dfa(an->value[i], bn->value[i], self.value[i]);
      }
      if (bn->requires_grad) {
        auto& g = bn->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i)
          g[i] += self.grad[i] * dfb(an->value[i], bn->value[i], self.value[i]);
      }
    };
  }
  return Tensor::from_node(node);
}

template <class Fwd, class DA, class DB>
Tensor binary_op(const Tensor& a, const Tensor& b, Fwd fwd, DA dfa, DB dfb) {
  if (a.shape() == b.shape()) return binary_same(a, b, fwd, dfa, dfb);
  const Shape out = broadcast_shape(a.shape(), b.shape());
  const Tensor ab = a.shape() == out ? a : broadcast_to(a, out);
  const Tensor bb = b.shape() == out ? b : broadcast_to(b, out);
  return binary_same(ab, bb, fwd, dfa, dfb);
}

}  // namespace

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

// ---- Tensor ----------------------------------------------------------------

Tensor::Tensor() : node_(std::make_shared<Node>()) {
  node_->shape = {};
  node_->value = {0.0};
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeMismatch("Tensor: shape " + shape_str(shape) + " needs " +
                        std::to_string(shape_numel(shape)) + " values, got " +
                        std::to_string(values.size()));
  }
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({}, {value}, requires_grad);
}

Tensor Tensor::from_node(std::shared_ptr<Node> node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) shape_error("dim", shape());
  return node_->shape[axis];
}

std::span<double> Tensor::mutable_data() {
  if (!node_->leaf) {
    throw std::logic_error("mutable_data: tensor is not a leaf");
  }
  return node_->value;
}

double Tensor::item() const {
  if (numel() != 1) shape_error("item", shape());
  return node_->value[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  if (index.size() != rank()) shape_error("at", shape());
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= node_->shape[axis]) shape_error("at (index out of range)", shape());
    flat = flat * node_->shape[axis] + i;
    ++axis;
  }
  return node_->value[flat];
}

void Tensor::set_requires_grad(bool on) {
  if (!node_->leaf) {
    throw std::logic_error("set_requires_grad: tensor is not a leaf");
  }
  node_->requires_grad = on;
}

std::vector<double> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<double>(numel(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad.clear(); }

Tensor Tensor::clone() const {
  return Tensor(node_->shape, node_->value, node_->leaf && node_->requires_grad);
}

Tensor Tensor::detach() const { return Tensor(node_->shape, node_->value); }

// ---- Tape -------------------------------------------------------------------

Tape::Tape() : previous_(g_active_tape) { g_active_tape = this; }

Tape::~Tape() { g_active_tape = previous_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(std::shared_ptr<Node> node) {
  nodes_.push_back(std::move(node));
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  if (tape == nullptr) throw NoTape("backward: no active tape on this thread");
  if (loss.numel() != 1) shape_error("backward (loss must be scalar)", loss.shape());
  if (!loss.requires_grad()) return;
  if (loss.is_leaf()) {
    loss.node()->grad_buffer()[0] += 1.0;
    return;
  }
  for (const auto& n : tape->nodes()) n->grad.clear();
  loss.node()->grad_buffer()[0] = 1.0;
  const auto& nodes = tape->nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    Node& n = **it;
    if (n.grad.empty() || !n.backward_fn) continue;
    n.backward_fn(n);
  }
}

// ---- broadcasting -----------------------------------------------------------

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < a.size() ? a[a.size() - 1 - i] : 1;
    const std::size_t db = i < b.size() ? b[b.size() - 1 - i] : 1;
    if (da != db && da != 1 && db != 1) shape_error("broadcast", a, b);
    out[rank - 1 - i] = std::max(da, db);
  }
  return out;
}

Tensor broadcast_to(const Tensor& x, const Shape& shape) {
  if (broadcast_shape(x.shape(), shape) != shape) {
    shape_error("broadcast_to", x.shape(), shape);
  }
  auto map = std::make_shared<std::vector<std::size_t>>(
      broadcast_map(x.shape(), shape));
  std::vector<double> out(map->size());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[(*map)[i]];
  auto node = make_output(shape, std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn, map](Node& self) {
      auto& g = xn->grad_buffer();
      for (std::size_t i = 0; i < map->size(); ++i) g[(*map)[i]] += self.grad[i];
    };
  }
  return Tensor::from_node(node);
}

// ---- elementwise --------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x + y; },
      [](double, double, double) { return 1.0; },
      [](double, double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x - y; },
      [](double, double, double) { return 1.0; },
      [](double, double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x * y; },
      [](double, double y, double) { return y; },
      [](double x, double, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x / y; },
      [](double, double y, double) { return 1.0 / y; },
      [](double, double y, double out) { return -out / y; });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor scale(const Tensor& x, double factor) {
  return unary_op(
      x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary_op(
      x, [value](double v) { return v + value; },
      [](double, double) { return 1.0; });
}

Tensor pow(const Tensor& x, double exponent) {
  if (exponent == 1.0) {
    return unary_op(
        x, [](double v) { return v; }, [](double, double) { return 1.0; });
  }
  return unary_op(
      x, [exponent](double v) { return std::pow(v, exponent); },
      [exponent](double v, double) {
        return exponent == 0.0 ? 0.0 : exponent * std::pow(v, exponent - 1.0);
      });
}

Tensor exp(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Tensor sqrt(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::sqrt(v); },
      [](double, double y) { return 0.5 / y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(
      x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
  return unary_op(
      x, [](double v) { return v > 0 ? v : 0.0; },
      [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  return unary_op(
      x, [lo, hi](double v) { return std::min(std::max(v, lo), hi); },
      [lo, hi](double v, double) { return v >= lo && v <= hi ? 1.0 : 0.0; });
}

// ---- shape ops ----------------------------------------------------------------

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) shape_error("reshape", x.shape(), shape);
  std::vector<double> out(x.data().begin(), x.data().end());
  auto node = make_output(std::move(shape), std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn](Node& self) {
      auto& g = xn->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    };
  }
  return Tensor::from_node(node);
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& order) {
  const Shape& in = x.shape();
  if (order.size() != in.size()) shape_error("permute", in);
  {
    std::vector<bool> seen(order.size(), false);
    for (std::size_t o : order) {
      if (o >= order.size() || seen[o]) shape_error("permute (bad order)", in);
      seen[o] = true;
    }
  }
  Shape out_shape(in.size());
  for (std::size_t i = 0; i < order.size(); ++i) out_shape[i] = in[order[i]];
  std::vector<std::size_t> in_stride(in.size(), 1);
  for (std::size_t i = in.size(); i-- > 1;) in_stride[i - 1] = in_stride[i] * in[i];
  // Permuted strides walked in output order.
  Shape stride_of_out(in.size());
  for (std::size_t i = 0; i < order.size(); ++i) stride_of_out[i] = in_stride[order[i]];
  const std::size_t total = x.numel();
  auto map = std::make_shared<std::vector<std::size_t>>(total);
  std::vector<std::size_t> idx(in.size(), 0);
  std::size_t offset = 0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    (*map)[flat] = offset;
    for (std::size_t d = out_shape.size(); d-- > 0;) {
      ++idx[d];
      offset += stride_of_out[d];
      if (idx[d] < out_shape[d]) break;
      offset -= stride_of_out[d] * idx[d];
      idx[d] = 0;
    }
  }
  std::vector<double> out(total);
  auto xv = x.data();
  for (std::size_t i = 0; i < total; ++i) out[i] = xv[(*map)[i]];
  auto node = make_output(out_shape, std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn, map](Node& self) {
      auto& g = xn->grad_buffer();
      for (std::size_t i = 0; i < map->size(); ++i) g[(*map)[i]] += self.grad[i];
    };
  }
  return Tensor::from_node(node);
}

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) shape_error("transpose", x.shape());
  return permute(x, {1, 0});
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeMismatch("concat: no inputs");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) shape_error("concat (axis out of range)", first);
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size()) shape_error("concat", first, s);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (i != axis && s[i] != first[i]) shape_error("concat", first, s);
    out_shape[axis] += s[axis];
  }
  const AxisSplit outer = split_axis(out_shape, axis, "concat");
  std::vector<double> out(shape_numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Tensor& p : parts) {
    offsets.push_back(off);
    const std::size_t chunk = p.shape()[axis] * outer.inner;
    auto pv = p.data();
    for (std::size_t o = 0; o < outer.outer; ++o) {
      std::copy_n(pv.begin() + o * chunk, chunk,
                  out.begin() + o * outer.n * outer.inner + off * outer.inner);
    }
    off += p.shape()[axis];
  }
  auto node = make_output(out_shape, std::move(out), parts);
  if (node->requires_grad) {
    std::vector<std::shared_ptr<Node>> pn;
    for (const Tensor& p : parts) pn.push_back(p.node_ptr());
    node->backward_fn = [pn, offsets, outer, axis](Node& self) {
      for (std::size_t k = 0; k < pn.size(); ++k) {
        if (!pn[k]->requires_grad) continue;
        const std::size_t chunk = pn[k]->shape[axis] * outer.inner;
        auto& g = pn[k]->grad_buffer();
        for (std::size_t o = 0; o < outer.outer; ++o) {
          const std::size_t src = o * outer.n * outer.inner + offsets[k] * outer.inner;
          for (std::size_t i = 0; i < chunk; ++i)
            g[o * chunk + i] += self.grad[src + i];
        }
      }
    };
  }
  return Tensor::from_node(node);
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start,
             std::size_t length) {
  const AxisSplit s = split_axis(x.shape(), axis, "slice");
  if (start + length > s.n) shape_error("slice (range out of bounds)", x.shape());
  Shape out_shape = x.shape();
  out_shape[axis] = length;
  std::vector<double> out(shape_numel(out_shape));
  auto xv = x.data();
  const std::size_t chunk = length * s.inner;
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(xv.begin() + (o * s.n + start) * s.inner, chunk,
                out.begin() + o * chunk);
  }
  auto node = make_output(out_shape, std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn, s, start, chunk](Node& self) {
      auto& g = xn->grad_buffer();
      for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t i = 0; i < chunk; ++i)
          g[(o * s.n + start) * s.inner + i] += self.grad[o * chunk + i];
    };
  }
  return Tensor::from_node(node);
}

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& rows) {
  if (x.rank() != 2) shape_error("gather_rows", x.shape());
  const std::size_t n = x.dim(0);
  const std::size_t d = x.dim(1);
  std::vector<double> out(rows.size() * d);
  auto xv = x.data();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= n) shape_error("gather_rows (row index out of range)", x.shape());
    std::copy_n(xv.begin() + rows[r] * d, d, out.begin() + r * d);
  }
  auto node = make_output({rows.size(), d}, std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn, rows, d](Node& self) {
      auto& g = xn->grad_buffer();
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t j = 0; j < d; ++j) g[rows[r] * d + j] += self.grad[r * d + j];
    };
  }
  return Tensor::from_node(node);
}

Tensor pad2d(const Tensor& x, std::size_t pad_bottom, std::size_t pad_right) {
  if (x.rank() != 3) shape_error("pad2d", x.shape());
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t ho = h + pad_bottom, wo = w + pad_right;
  std::vector<double> out(c * ho * wo, 0.0);
  auto xv = x.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h; ++i)
      std::copy_n(xv.begin() + (ch * h + i) * w, w, out.begin() + (ch * ho + i) * wo);
  auto node = make_output({c, ho, wo}, std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn, c, h, w, ho, wo](Node& self) {
      auto& g = xn->grad_buffer();
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < h; ++i)
          for (std::size_t j = 0; j < w; ++j)
            g[(ch * h + i) * w + j] += self.grad[(ch * ho + i) * wo + j];
    };
  }
  return Tensor::from_node(node);
}

// ---- matmul -------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    shape_error("matmul", a.shape(), b.shape());
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aip * bv[p * n + j];
    }
  auto node = make_output({m, n}, std::move(out), {&a, &b});
  if (node->requires_grad) {
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    node->backward_fn = [an, bn, m, k, n](Node& self) {
      const auto& g = self.grad;
      if (an->requires_grad) {
        auto& ga = an->grad_buffer();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bn->value[p * n + j];
            ga[i * k + p] += acc;
          }
      }
      if (bn->requires_grad) {
        auto& gb = bn->grad_buffer();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = an->value[i * k + p];
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
          }
      }
    };
  }
  return Tensor::from_node(node);
}

// ---- reductions ---------------------------------------------------------------

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  auto node = make_output({}, {acc}, {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn](Node& self) {
      auto& g = xn->grad_buffer();
      for (double& v : g) v += self.grad[0];
    };
  }
  return Tensor::from_node(node);
}

Tensor sum(const Tensor& x, std::size_t axis) {
  const AxisSplit s = split_axis(x.shape(), axis, "sum");
  std::vector<double> out(s.outer * s.inner, 0.0);
  auto xv = x.data();
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t i = 0; i < s.n; ++i)
      for (std::size_t in = 0; in < s.inner; ++in)
        out[o * s.inner + in] += xv[(o * s.n + i) * s.inner + in];
  auto node = make_output(drop_axis(x.shape(), axis), std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn, s](Node& self) {
      auto& g = xn->grad_buffer();
      for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t i = 0; i < s.n; ++i)
          for (std::size_t in = 0; in < s.inner; ++in)
            g[(o * s.n + i) * s.inner + in] += self.grad[o * s.inner + in];
    };
  }
  return Tensor::from_node(node);
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) shape_error("mean (empty)", x.shape());
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor mean(const Tensor& x, std::size_t axis) {
  const AxisSplit s = split_axis(x.shape(), axis, "mean");
  if (s.n == 0) shape_error("mean (empty axis)", x.shape());
  return scale(sum(x, axis), 1.0 / static_cast<double>(s.n));
}

Tensor max(const Tensor& x, std::size_t axis) {
  const AxisSplit s = split_axis(x.shape(), axis, "max");
  if (s.n == 0) shape_error("max (empty axis)", x.shape());
  std::vector<double> out(s.outer * s.inner);
  auto arg = std::make_shared<std::vector<std::size_t>>(out.size());
  auto xv = x.data();
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t in = 0; in < s.inner; ++in) {
      std::size_t best = o * s.n * s.inner + in;
      for (std::size_t i = 1; i < s.n; ++i) {
        const std::size_t idx = (o * s.n + i) * s.inner + in;
        if (xv[idx] > xv[best]) best = idx;
      }
      out[o * s.inner + in] = xv[best];
      (*arg)[o * s.inner + in] = best;
    }
  auto node = make_output(drop_axis(x.shape(), axis), std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn, arg](Node& self) {
      auto& g = xn->grad_buffer();
      for (std::size_t i = 0; i < arg->size(); ++i) g[(*arg)[i]] += self.grad[i];
    };
  }
  return Tensor::from_node(node);
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const AxisSplit s = split_axis(x.shape(), axis, "softmax");
  std::vector<double> out(x.numel());
  auto xv = x.data();
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.n * s.inner + in;
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < s.n; ++i) hi = std::max(hi, xv[base + i * s.inner]);
      double z = 0.0;
      for (std::size_t i = 0; i < s.n; ++i) {
        const double e = std::exp(xv[base + i * s.inner] - hi);
        out[base + i * s.inner] = e;
        z += e;
      }
      for (std::size_t i = 0; i < s.n; ++i) out[base + i * s.inner] /= z;
    }
  auto node = make_output(x.shape(), std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn, s](Node& self) {
      auto& g = xn->grad_buffer();
      for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t in = 0; in < s.inner; ++in) {
          const std::size_t base = o * s.n * s.inner + in;
          double dot = 0.0;
          for (std::size_t i = 0; i < s.n; ++i) {
            const std::size_t k = base + i * s.inner;
            dot += self.grad[k] * self.value[k];
          }
          for (std::size_t i = 0; i < s.n; ++i) {
            const std::size_t k = base + i * s.inner;
            g[k] += self.value[k] * (self.grad[k] - dot);
          }
        }
    };
  }
  return Tensor::from_node(node);
}

Tensor l2_normalize(const Tensor& x, std::size_t axis, double eps) {
  const AxisSplit s = split_axis(x.shape(), axis, "l2_normalize");
  std::vector<double> out(x.numel());
  auto norms = std::make_shared<std::vector<double>>(s.outer * s.inner);
  auto xv = x.data();
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.n * s.inner + in;
      double ss = 0.0;
      for (std::size_t i = 0; i < s.n; ++i) {
        const double v = xv[base + i * s.inner];
        ss += v * v;
      }
      const double norm = std::sqrt(ss + eps);
      (*norms)[o * s.inner + in] = norm;
      for (std::size_t i = 0; i < s.n; ++i)
        out[base + i * s.inner] = xv[base + i * s.inner] / norm;
    }
  auto node = make_output(x.shape(), std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn, s, norms](Node& self) {
      auto& g = xn->grad_buffer();
      for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t in = 0; in < s.inner; ++in) {
          const std::size_t base = o * s.n * s.inner + in;
          const double norm = (*norms)[o * s.inner + in];
          double dot = 0.0;
          for (std::size_t i = 0; i < s.n; ++i) {
            const std::size_t k = base + i * s.inner;
            dot += self.grad[k] * self.value[k];
          }
          for (std::size_t i = 0; i < s.n; ++i) {
            const std::size_t k = base + i * s.inner;
            g[k] += (self.grad[k] - self.value[k] * dot) / norm;
          }
        }
    };
  }
  return Tensor::from_node(node);
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  if (x.rank() == 0) shape_error("layer_norm", x.shape());
  const std::size_t width = x.shape().back();
  if (gain.numel() != width || bias.numel() != width) {
    shape_error("layer_norm", x.shape(), gain.shape());
  }
  const std::size_t rows = x.numel() / width;
  std::vector<double> out(x.numel());
  auto xhat = std::make_shared<std::vector<double>>(x.numel());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  auto xv = x.data();
  auto gv = gain.data();
  auto bv = bias.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * width;
    double mu = 0.0;
    for (std::size_t j = 0; j < width; ++j) mu += row[j];
    mu /= static_cast<double>(width);
    double var = 0.0;
    for (std::size_t j = 0; j < width; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(width);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (std::size_t j = 0; j < width; ++j) {
      const double h = (row[j] - mu) * is;
      (*xhat)[r * width + j] = h;
      out[r * width + j] = h * gv[j] + bv[j];
    }
  }
  auto node = make_output(x.shape(), std::move(out), {&x, &gain, &bias});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    auto gn = gain.node_ptr();
    auto bn = bias.node_ptr();
    node->backward_fn = [xn, gn, bn, xhat, inv_std, rows, width](Node& self) {
      const double w = static_cast<double>(width);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* g = self.grad.data() + r * width;
        const double* h = xhat->data() + r * width;
        if (gn->requires_grad) {
          auto& gg = gn->grad_buffer();
          for (std::size_t j = 0; j < width; ++j) gg[j] += g[j] * h[j];
        }
        if (bn->requires_grad) {
          auto& gb = bn->grad_buffer();
          for (std::size_t j = 0; j < width; ++j) gb[j] += g[j];
        }
        if (xn->requires_grad) {
          auto& gx = xn->grad_buffer();
          double mean_d = 0.0, mean_dh = 0.0;
          for (std::size_t j = 0; j < width; ++j) {
            const double d = g[j] * gn->value[j];
            mean_d += d;
            mean_dh += d * h[j];
          }
          mean_d /= w;
          mean_dh /= w;
          for (std::size_t j = 0; j < width; ++j) {
            const double d = g[j] * gn->value[j];
            gx[r * width + j] += (*inv_std)[r] * (d - mean_d - h[j] * mean_dh);
          }
        }
      }
    };
  }
  return Tensor::from_node(node);
}

// ---- convolution family --------------------------------------------------------

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              Conv2dOptions options) {
  if (x.rank() != 3 || weight.rank() != 4 || weight.dim(1) != x.dim(0)) {
    shape_error("conv2d", x.shape(), weight.shape());
  }
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  if (bias.numel() != cout) shape_error("conv2d (bias)", weight.shape(), bias.shape());
  const std::size_t stride = options.stride == 0 ? 1 : options.stride;
  const long ph = options.pad_h < 0 ? static_cast<long>((kh - 1) / 2) : options.pad_h;
  const long pw = options.pad_w < 0 ? static_cast<long>((kw - 1) / 2) : options.pad_w;
  const long span_h = static_cast<long>(h) + 2 * ph - static_cast<long>(kh);
  const long span_w = static_cast<long>(w) + 2 * pw - static_cast<long>(kw);
  if (span_h < 0 || span_w < 0) shape_error("conv2d (kernel larger than input)", x.shape(), weight.shape());
  const std::size_t ho = static_cast<std::size_t>(span_h) / stride + 1;
  const std::size_t wo = static_cast<std::size_t>(span_w) / stride + 1;

  std::vector<double> out(cout * ho * wo);
  auto xv = x.data();
  auto wv = weight.data();
  auto bv = bias.data();
  for (std::size_t co = 0; co < cout; ++co) {
    double* o = out.data() + co * ho * wo;
    std::fill(o, o + ho * wo, bv[co]);
    for (std::size_t ci = 0; ci < cin; ++ci)
      for (std::size_t a = 0; a < kh; ++a)
        for (std::size_t b = 0; b < kw; ++b) {
          const double wt = wv[((co * cin + ci) * kh + a) * kw + b];
          if (wt == 0.0) continue;
          for (std::size_t i = 0; i < ho; ++i) {
            const long yi = static_cast<long>(i * stride + a) - ph;
            if (yi < 0 || yi >= static_cast<long>(h)) continue;
            const double* xrow = xv.data() + (ci * h + static_cast<std::size_t>(yi)) * w;
            double* orow = o + i * wo;
            for (std::size_t j = 0; j < wo; ++j) {
              const long xj = static_cast<long>(j * stride + b) - pw;
              if (xj < 0 || xj >= static_cast<long>(w)) continue;
              orow[j] += wt * xrow[xj];
            }
          }
        }
  }
  auto node = make_output({cout, ho, wo}, std::move(out), {&x, &weight, &bias});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    auto wn = weight.node_ptr();
    auto bn = bias.node_ptr();
    node->backward_fn = [=](Node& self) {
      const auto& g = self.grad;
      if (bn->requires_grad) {
        auto& gb = bn->grad_buffer();
        for (std::size_t co = 0; co < cout; ++co)
          for (std::size_t k = 0; k < ho * wo; ++k) gb[co] += g[co * ho * wo + k];
      }
      std::vector<double>* gx = xn->requires_grad ? &xn->grad_buffer() : nullptr;
      std::vector<double>* gw = wn->requires_grad ? &wn->grad_buffer() : nullptr;
      if (gx == nullptr && gw == nullptr) return;
      for (std::size_t co = 0; co < cout; ++co)
        for (std::size_t ci = 0; ci < cin; ++ci)
          for (std::size_t a = 0; a < kh; ++a)
            for (std::size_t b = 0; b < kw; ++b) {
              const std::size_t widx = ((co * cin + ci) * kh + a) * kw + b;
              const double wt = wn->value[widx];
              double acc = 0.0;
              for (std::size_t i = 0; i < ho; ++i) {
                const long yi = static_cast<long>(i * stride + a) - ph;
                if (yi < 0 || yi >= static_cast<long>(h)) continue;
                const std::size_t xbase = (ci * h + static_cast<std::size_t>(yi)) * w;
                const double* grow = g.data() + (co * ho + i) * wo;
                for (std::size_t j = 0; j < wo; ++j) {
                  const long xj = static_cast<long>(j * stride + b) - pw;
                  if (xj < 0 || xj >= static_cast<long>(w)) continue;
                  acc += grow[j] * xn->value[xbase + static_cast<std::size_t>(xj)];
                  if (gx) (*gx)[xbase + static_cast<std::size_t>(xj)] += grow[j] * wt;
                }
              }
              if (gw) (*gw)[widx] += acc;
            }
    };
  }
  return Tensor::from_node(node);
}

Tensor max_pool2d(const Tensor& x, std::size_t window) {
  if (x.rank() != 3 || window == 0 || x.dim(1) % window || x.dim(2) % window) {
    shape_error("max_pool2d (spatial dims must be divisible by window)", x.shape());
  }
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t ho = h / window, wo = w / window;
  std::vector<double> out(c * ho * wo);
  auto arg = std::make_shared<std::vector<std::size_t>>(out.size());
  auto xv = x.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < ho; ++i)
      for (std::size_t j = 0; j < wo; ++j) {
        std::size_t best = (ch * h + i * window) * w + j * window;
        for (std::size_t a = 0; a < window; ++a)
          for (std::size_t b = 0; b < window; ++b) {
            const std::size_t idx = (ch * h + i * window + a) * w + j * window + b;
            if (xv[idx] > xv[best]) best = idx;
          }
        const std::size_t o = (ch * ho + i) * wo + j;
        out[o] = xv[best];
        (*arg)[o] = best;
      }
  auto node = make_output({c, ho, wo}, std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn, arg](Node& self) {
      auto& g = xn->grad_buffer();
      for (std::size_t i = 0; i < arg->size(); ++i) g[(*arg)[i]] += self.grad[i];
    };
  }
  return Tensor::from_node(node);
}

Tensor up_sample2d(const Tensor& x, std::size_t factor) {
  if (x.rank() != 3 || factor == 0) shape_error("up_sample2d", x.shape());
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t ho = h * factor, wo = w * factor;
  std::vector<double> out(c * ho * wo);
  auto xv = x.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < ho; ++i)
      for (std::size_t j = 0; j < wo; ++j)
        out[(ch * ho + i) * wo + j] = xv[(ch * h + i / factor) * w + j / factor];
  auto node = make_output({c, ho, wo}, std::move(out), {&x});
  if (node->requires_grad) {
    auto xn = x.node_ptr();
    node->backward_fn = [xn, c, h, w, ho, wo, factor](Node& self) {
      auto& g = xn->grad_buffer();
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < ho; ++i)
          for (std::size_t j = 0; j < wo; ++j)
            g[(ch * h + i / factor) * w + j / factor] += self.grad[(ch * ho + i) * wo + j];
    };
  }
  return Tensor::from_node(node);
}

}  // namespace linker
