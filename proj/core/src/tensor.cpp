#include "ger/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ger::ad {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const EMat>;
using MMap = Eigen::Map<EMat>;

CMap cmap(const Tensor& t) { return CMap(t.v.data(), t.rows, t.cols); }
MMap mmap(Tensor& t) { return MMap(t.v.data(), t.rows, t.cols); }

[[noreturn]] void fail(Op op, const std::string& what) {
  throw std::invalid_argument(std::string(op_name(op)) + ": " + what);
}

std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows) + "x" + std::to_string(t.cols);
}

}  // namespace

Tensor::Tensor(std::size_t r, std::size_t c, std::vector<double> vals)
    : rows(r), cols(c), v(std::move(vals)) {
  if (v.size() != r * c) {
    throw std::invalid_argument("Tensor: values length " + std::to_string(v.size()) +
                                " does not match shape " + std::to_string(r) + "x" +
                                std::to_string(c));
  }
}

Tensor Tensor::full(std::size_t r, std::size_t c, double x) {
  Tensor t(r, c);
  std::fill(t.v.begin(), t.v.end(), x);
  return t;
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor Tensor::randn(std::size_t r, std::size_t c, std::mt19937_64& rng, double stddev) {
  Tensor t(r, c);
  std::normal_distribution<double> d(0.0, stddev);
  for (auto& x : t.v) x = d(rng);
  return t;
}

bool Tensor::all_finite() const {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

const char* op_name(Op op) {
  switch (op) {
    case Op::Input: return "input";
    case Op::GatherRows: return "gather_rows";
    case Op::MatMul: return "matmul";
    case Op::Transpose: return "transpose";
    case Op::Add: return "add";
    case Op::Scale: return "scale";
    case Op::ScalarMulVar: return "scalar_mul";
    case Op::Concat: return "concat";
    case Op::Slice: return "slice";
    case Op::RowSoftmax: return "row_softmax";
    case Op::LeakyRelu: return "leaky_relu";
    case Op::Relu: return "relu";
    case Op::MeanAxis: return "mean_axis";
    case Op::LogSumExp: return "logsumexp";
    case Op::AddOuter: return "add_outer";
    case Op::Diag: return "diag";
  }
  return "?";
}

std::size_t Var::rows() const { return g->value(*this).rows; }
std::size_t Var::cols() const { return g->value(*this).cols; }
const Tensor& Var::value() const { return g->value(*this); }
const Tensor& Var::grad() const { return g->grad(*this); }

// --- tape ---------------------------------------------------------------

Var Graph::push(Node n) {
  for (std::size_t in : n.inputs) {
    if (in >= nodes_.size()) fail(n.op, "input id out of range");
    if (nodes_[in].needs_grad) n.needs_grad = true;
  }
  if (n.tracked) n.needs_grad = true;
  nodes_.push_back(std::move(n));
  std::size_t id = nodes_.size() - 1;
  eval(id);
  return Var{this, id};
}

Var Graph::input(Tensor value, bool tracked, std::string label) {
  Node n;
  n.op = Op::Input;
  n.val = std::move(value);
  n.tracked = tracked;
  n.label = std::move(label);
  return push(std::move(n));
}

void Graph::set_leaf(Var leaf, const Tensor& value) {
  Node& n = nodes_.at(leaf.id);
  if (n.op != Op::Input) throw std::invalid_argument("set_leaf: node is not a leaf");
  if (!n.val.same_shape(value)) throw std::invalid_argument("set_leaf: shape mismatch");
  n.val = value;
  values_fresh_ = false;
}

void Graph::set_leaf_values(Var leaf, std::span<const double> values) {
  Node& n = nodes_.at(leaf.id);
  if (n.op != Op::Input) throw std::invalid_argument("set_leaf: node is not a leaf");
  if (values.size() != n.val.size()) throw std::invalid_argument("set_leaf: size mismatch");
  std::copy(values.begin(), values.end(), n.val.v.begin());
  values_fresh_ = false;
}

Var Graph::matmul(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.cols != tb.rows)
    fail(Op::MatMul, "inner dimensions disagree: " + shape_str(ta) + " * " + shape_str(tb));
  Node n;
  n.op = Op::MatMul;
  n.inputs = {a.id, b.id};
  return push(std::move(n));
}

Var Graph::transpose(Var a) {
  Node n;
  n.op = Op::Transpose;
  n.inputs = {a.id};
  return push(std::move(n));
}

Var Graph::add(Var a, Var b) {
  if (!value(a).same_shape(value(b)))
    fail(Op::Add, "shape mismatch: " + shape_str(value(a)) + " vs " + shape_str(value(b)));
  Node n;
  n.op = Op::Add;
  n.inputs = {a.id, b.id};
  return push(std::move(n));
}

Var Graph::scale(Var a, double c) {
  Node n;
  n.op = Op::Scale;
  n.inputs = {a.id};
  n.scalar = c;
  return push(std::move(n));
}

Var Graph::scalar_mul(Var s, Var a) {
  if (value(s).size() != 1) fail(Op::ScalarMulVar, "scalar operand must be 1x1");
  Node n;
  n.op = Op::ScalarMulVar;
  n.inputs = {s.id, a.id};
  return push(std::move(n));
}

Var Graph::concat(const std::vector<Var>& parts, int axis) {
  if (parts.empty()) fail(Op::Concat, "no parts");
  if (axis != 0 && axis != 1) fail(Op::Concat, "axis must be 0 or 1");
  const Tensor& first = value(parts[0]);
  for (const Var& p : parts) {
    const Tensor& t = value(p);
    if (axis == 0 ? t.cols != first.cols : t.rows != first.rows)
      fail(Op::Concat, "part shapes disagree off-axis");
  }
  Node n;
  n.op = Op::Concat;
  n.axis = axis;
  for (const Var& p : parts) n.inputs.push_back(p.id);
  return push(std::move(n));
}

Var Graph::slice(Var a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
  const Tensor& t = value(a);
  if (r0 >= r1 || c0 >= c1 || r1 > t.rows || c1 > t.cols)
    fail(Op::Slice, "range [" + std::to_string(r0) + "," + std::to_string(r1) + ")x[" +
                        std::to_string(c0) + "," + std::to_string(c1) + ") invalid for " +
                        shape_str(t));
  Node n;
  n.op = Op::Slice;
  n.inputs = {a.id};
  n.r0 = r0; n.r1 = r1; n.c0 = c0; n.c1 = c1;
  return push(std::move(n));
}

Var Graph::gather_rows(Var table, std::vector<std::size_t> indices) {
  const Tensor& t = value(table);
  if (indices.empty()) fail(Op::GatherRows, "no indices");
  for (std::size_t i : indices)
    if (i >= t.rows) fail(Op::GatherRows, "row index " + std::to_string(i) + " out of range");
  Node n;
  n.op = Op::GatherRows;
  n.inputs = {table.id};
  n.indices = std::move(indices);
  return push(std::move(n));
}

Var Graph::row_softmax(Var a) {
  Node n;
  n.op = Op::RowSoftmax;
  n.inputs = {a.id};
  return push(std::move(n));
}

Var Graph::row_softmax_masked(Var a, std::vector<std::uint8_t> mask) {
  const Tensor& t = value(a);
  if (mask.size() != t.size()) fail(Op::RowSoftmax, "mask size mismatch");
  for (std::size_t r = 0; r < t.rows; ++r) {
    bool live = false;
    for (std::size_t c = 0; c < t.cols; ++c) live |= mask[r * t.cols + c] != 0;
    if (!live) fail(Op::RowSoftmax, "row " + std::to_string(r) + " fully masked");
  }
  Node n;
  n.op = Op::RowSoftmax;
  n.inputs = {a.id};
  n.mask = std::move(mask);
  return push(std::move(n));
}

Var Graph::leaky_relu(Var a, double negative_slope) {
  Node n;
  n.op = Op::LeakyRelu;
  n.inputs = {a.id};
  n.scalar = negative_slope;
  return push(std::move(n));
}

Var Graph::relu(Var a) {
  Node n;
  n.op = Op::Relu;
  n.inputs = {a.id};
  return push(std::move(n));
}

Var Graph::mean_axis(Var a, int axis) {
  if (axis != 0 && axis != 1) fail(Op::MeanAxis, "axis must be 0 or 1");
  Node n;
  n.op = Op::MeanAxis;
  n.inputs = {a.id};
  n.axis = axis;
  return push(std::move(n));
}

Var Graph::logsumexp(Var a, int axis) {
  if (axis != 0 && axis != 1) fail(Op::LogSumExp, "axis must be 0 or 1");
  Node n;
  n.op = Op::LogSumExp;
  n.inputs = {a.id};
  n.axis = axis;
  return push(std::move(n));
}

Var Graph::add_outer(Var col, Var row) {
  if (value(col).cols != 1) fail(Op::AddOuter, "first operand must be a column");
  if (value(row).rows != 1) fail(Op::AddOuter, "second operand must be a row");
  Node n;
  n.op = Op::AddOuter;
  n.inputs = {col.id, row.id};
  return push(std::move(n));
}

Var Graph::diag(Var a) {
  const Tensor& t = value(a);
  if (t.rows != t.cols) fail(Op::Diag, "matrix must be square, got " + shape_str(t));
  Node n;
  n.op = Op::Diag;
  n.inputs = {a.id};
  return push(std::move(n));
}

// --- forward ---------------------------------------------------------------

void Graph::eval(std::size_t i) {
  Node& n = nodes_[i];
  switch (n.op) {
    case Op::Input:
      break;
    case Op::GatherRows: {
      const Tensor& t = nodes_[n.inputs[0]].val;
      n.val = Tensor(n.indices.size(), t.cols);
      for (std::size_t r = 0; r < n.indices.size(); ++r)
        std::copy_n(&t.v[n.indices[r] * t.cols], t.cols, &n.val.v[r * t.cols]);
      break;
    }
    case Op::MatMul: {
      const Tensor& a = nodes_[n.inputs[0]].val;
      const Tensor& b = nodes_[n.inputs[1]].val;
      n.val = Tensor(a.rows, b.cols);
      mmap(n.val).noalias() = cmap(a) * cmap(b);
      break;
    }
    case Op::Transpose: {
      const Tensor& a = nodes_[n.inputs[0]].val;
      n.val = Tensor(a.cols, a.rows);
      mmap(n.val) = cmap(a).transpose();
      break;
    }
    case Op::Add: {
      const Tensor& a = nodes_[n.inputs[0]].val;
      const Tensor& b = nodes_[n.inputs[1]].val;
      n.val = Tensor(a.rows, a.cols);
      for (std::size_t k = 0; k < a.size(); ++k) n.val.v[k] = a.v[k] + b.v[k];
      break;
    }
    case Op::Scale: {
      const Tensor& a = nodes_[n.inputs[0]].val;
      n.val = Tensor(a.rows, a.cols);
      for (std::size_t k = 0; k < a.size(); ++k) n.val.v[k] = n.scalar * a.v[k];
      break;
    }
    case Op::ScalarMulVar: {
      const double s = nodes_[n.inputs[0]].val.v[0];
      const Tensor& a = nodes_[n.inputs[1]].val;
      n.val = Tensor(a.rows, a.cols);
      for (std::size_t k = 0; k < a.size(); ++k) n.val.v[k] = s * a.v[k];
      break;
    }
    case Op::Concat: {
      if (n.axis == 0) {
        std::size_t rows = 0;
        const std::size_t cols = nodes_[n.inputs[0]].val.cols;
        for (std::size_t in : n.inputs) rows += nodes_[in].val.rows;
        n.val = Tensor(rows, cols);
        std::size_t r = 0;
        for (std::size_t in : n.inputs) {
          const Tensor& p = nodes_[in].val;
          std::copy(p.v.begin(), p.v.end(), &n.val.v[r * cols]);
          r += p.rows;
        }
      } else {
        std::size_t cols = 0;
        const std::size_t rows = nodes_[n.inputs[0]].val.rows;
        for (std::size_t in : n.inputs) cols += nodes_[in].val.cols;
        n.val = Tensor(rows, cols);
        std::size_t c = 0;
        for (std::size_t in : n.inputs) {
          const Tensor& p = nodes_[in].val;
          for (std::size_t r = 0; r < rows; ++r)
            std::copy_n(&p.v[r * p.cols], p.cols, &n.val.v[r * cols + c]);
          c += p.cols;
        }
      }
      break;
    }
    case Op::Slice: {
      const Tensor& a = nodes_[n.inputs[0]].val;
      n.val = Tensor(n.r1 - n.r0, n.c1 - n.c0);
      for (std::size_t r = 0; r < n.val.rows; ++r)
        std::copy_n(&a.v[(n.r0 + r) * a.cols + n.c0], n.val.cols, &n.val.v[r * n.val.cols]);
      break;
    }
    case Op::RowSoftmax: {
      const Tensor& a = nodes_[n.inputs[0]].val;
      n.val = Tensor(a.rows, a.cols);
      const bool masked = !n.mask.empty();
      for (std::size_t r = 0; r < a.rows; ++r) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < a.cols; ++c) {
          if (masked && !n.mask[r * a.cols + c]) continue;
          mx = std::max(mx, a.at(r, c));
        }
        double denom = 0.0;
        for (std::size_t c = 0; c < a.cols; ++c) {
          if (masked && !n.mask[r * a.cols + c]) continue;
          denom += std::exp(a.at(r, c) - mx);
        }
        for (std::size_t c = 0; c < a.cols; ++c) {
          if (masked && !n.mask[r * a.cols + c]) {
            n.val.at(r, c) = 0.0;
          } else {
            n.val.at(r, c) = std::exp(a.at(r, c) - mx) / denom;
          }
        }
      }
      break;
    }
    case Op::LeakyRelu: {
      const Tensor& a = nodes_[n.inputs[0]].val;
      n.val = Tensor(a.rows, a.cols);
      for (std::size_t k = 0; k < a.size(); ++k)
        n.val.v[k] = a.v[k] > 0.0 ? a.v[k] : n.scalar * a.v[k];
      break;
    }
    case Op::Relu: {
      const Tensor& a = nodes_[n.inputs[0]].val;
      n.val = Tensor(a.rows, a.cols);
      for (std::size_t k = 0; k < a.size(); ++k) n.val.v[k] = a.v[k] > 0.0 ? a.v[k] : 0.0;
      break;
    }
    case Op::MeanAxis: {
      const Tensor& a = nodes_[n.inputs[0]].val;
      if (n.axis == 0) {
        n.val = Tensor(1, a.cols);
        for (std::size_t c = 0; c < a.cols; ++c) {
          double s = 0.0;
          for (std::size_t r = 0; r < a.rows; ++r) s += a.at(r, c);
          n.val.at(0, c) = s / static_cast<double>(a.rows);
        }
      } else {
        n.val = Tensor(a.rows, 1);
        for (std::size_t r = 0; r < a.rows; ++r) {
          double s = 0.0;
          for (std::size_t c = 0; c < a.cols; ++c) s += a.at(r, c);
          n.val.at(r, 0) = s / static_cast<double>(a.cols);
        }
      }
      break;
    }
    case Op::LogSumExp: {
      const Tensor& a = nodes_[n.inputs[0]].val;
      if (n.axis == 1) {
        n.val = Tensor(a.rows, 1);
        for (std::size_t r = 0; r < a.rows; ++r) {
          double mx = a.at(r, 0);
          for (std::size_t c = 1; c < a.cols; ++c) mx = std::max(mx, a.at(r, c));
          double s = 0.0;
          for (std::size_t c = 0; c < a.cols; ++c) s += std::exp(a.at(r, c) - mx);
          n.val.at(r, 0) = mx + std::log(s);
        }
      } else {
        n.val = Tensor(1, a.cols);
        for (std::size_t c = 0; c < a.cols; ++c) {
          double mx = a.at(0, c);
          for (std::size_t r = 1; r < a.rows; ++r) mx = std::max(mx, a.at(r, c));
          double s = 0.0;
          for (std::size_t r = 0; r < a.rows; ++r) s += std::exp(a.at(r, c) - mx);
          n.val.at(0, c) = mx + std::log(s);
        }
      }
      break;
    }
    case Op::AddOuter: {
      const Tensor& col = nodes_[n.inputs[0]].val;
      const Tensor& row = nodes_[n.inputs[1]].val;
      n.val = Tensor(col.rows, row.cols);
      for (std::size_t r = 0; r < col.rows; ++r)
        for (std::size_t c = 0; c < row.cols; ++c) n.val.at(r, c) = col.at(r, 0) + row.at(0, c);
      break;
    }
    case Op::Diag: {
      const Tensor& a = nodes_[n.inputs[0]].val;
      n.val = Tensor(a.rows, 1);
      for (std::size_t r = 0; r < a.rows; ++r) n.val.at(r, 0) = a.at(r, r);
      break;
    }
  }
}

void Graph::forward() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) eval(i);
  values_fresh_ = true;
}

// --- backward ----------------------------------------------------------------

void Graph::backprop(std::size_t i) {
  Node& n = nodes_[i];
  if (!n.needs_grad || n.op == Op::Input) return;
  if (n.grad.size() == 0) return;  // not on any path from the seeded output
  auto in_grad = [&](std::size_t slot) -> Tensor& {
    Node& p = nodes_[n.inputs[slot]];
    if (p.grad.size() == 0) p.grad = Tensor(p.val.rows, p.val.cols);
    return p.grad;
  };
  auto wants = [&](std::size_t slot) { return nodes_[n.inputs[slot]].needs_grad; };

  switch (n.op) {
    case Op::Input:
      break;
    case Op::GatherRows: {
      if (!wants(0)) break;
      Tensor& gt = in_grad(0);
      for (std::size_t r = 0; r < n.indices.size(); ++r)
        for (std::size_t c = 0; c < gt.cols; ++c)
          gt.at(n.indices[r], c) += n.grad.at(r, c);
      break;
    }
    case Op::MatMul: {
      const Tensor& a = nodes_[n.inputs[0]].val;
      const Tensor& b = nodes_[n.inputs[1]].val;
      if (wants(0)) mmap(in_grad(0)).noalias() += cmap(n.grad) * cmap(b).transpose();
      if (wants(1)) mmap(in_grad(1)).noalias() += cmap(a).transpose() * cmap(n.grad);
      break;
    }
    case Op::Transpose: {
      if (!wants(0)) break;
      mmap(in_grad(0)) += cmap(n.grad).transpose();
      break;
    }
    case Op::Add: {
      for (std::size_t s = 0; s < 2; ++s) {
        if (!wants(s)) continue;
        Tensor& g = in_grad(s);
        for (std::size_t k = 0; k < g.size(); ++k) g.v[k] += n.grad.v[k];
      }
      break;
    }
    case Op::Scale: {
      if (!wants(0)) break;
      Tensor& g = in_grad(0);
      for (std::size_t k = 0; k < g.size(); ++k) g.v[k] += n.scalar * n.grad.v[k];
      break;
    }
    case Op::ScalarMulVar: {
      const double s = nodes_[n.inputs[0]].val.v[0];
      const Tensor& a = nodes_[n.inputs[1]].val;
      if (wants(0)) {
        double acc = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) acc += n.grad.v[k] * a.v[k];
        in_grad(0).v[0] += acc;
      }
      if (wants(1)) {
        Tensor& g = in_grad(1);
        for (std::size_t k = 0; k < g.size(); ++k) g.v[k] += s * n.grad.v[k];
      }
      break;
    }
    case Op::Concat: {
      if (n.axis == 0) {
        std::size_t r = 0;
        for (std::size_t s = 0; s < n.inputs.size(); ++s) {
          const Tensor& p = nodes_[n.inputs[s]].val;
          if (wants(s)) {
            Tensor& g = in_grad(s);
            for (std::size_t k = 0; k < p.size(); ++k) g.v[k] += n.grad.v[r * p.cols + k];
          }
          r += p.rows;
        }
      } else {
        std::size_t c = 0;
        for (std::size_t s = 0; s < n.inputs.size(); ++s) {
          const Tensor& p = nodes_[n.inputs[s]].val;
          if (wants(s)) {
            Tensor& g = in_grad(s);
            for (std::size_t r = 0; r < p.rows; ++r)
              for (std::size_t cc = 0; cc < p.cols; ++cc)
                g.at(r, cc) += n.grad.at(r, c + cc);
          }
          c += p.cols;
        }
      }
      break;
    }
    case Op::Slice: {
      if (!wants(0)) break;
      Tensor& g = in_grad(0);
      for (std::size_t r = 0; r < n.val.rows; ++r)
        for (std::size_t c = 0; c < n.val.cols; ++c)
          g.at(n.r0 + r, n.c0 + c) += n.grad.at(r, c);
      break;
    }
    case Op::RowSoftmax: {
      if (!wants(0)) break;
      Tensor& g = in_grad(0);
      const Tensor& y = n.val;
      const bool masked = !n.mask.empty();
      for (std::size_t r = 0; r < y.rows; ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < y.cols; ++c) dot += n.grad.at(r, c) * y.at(r, c);
        for (std::size_t c = 0; c < y.cols; ++c) {
          if (masked && !n.mask[r * y.cols + c]) continue;
          g.at(r, c) += y.at(r, c) * (n.grad.at(r, c) - dot);
        }
      }
      break;
    }
    case Op::LeakyRelu: {
      if (!wants(0)) break;
      Tensor& g = in_grad(0);
      const Tensor& a = nodes_[n.inputs[0]].val;
      for (std::size_t k = 0; k < g.size(); ++k)
        g.v[k] += (a.v[k] > 0.0 ? 1.0 : n.scalar) * n.grad.v[k];
      break;
    }
    case Op::Relu: {
      if (!wants(0)) break;
      Tensor& g = in_grad(0);
      const Tensor& a = nodes_[n.inputs[0]].val;
      for (std::size_t k = 0; k < g.size(); ++k)
        g.v[k] += (a.v[k] > 0.0 ? 1.0 : 0.0) * n.grad.v[k];
      break;
    }
    case Op::MeanAxis: {
      if (!wants(0)) break;
      Tensor& g = in_grad(0);
      if (n.axis == 0) {
        const double inv = 1.0 / static_cast<double>(g.rows);
        for (std::size_t r = 0; r < g.rows; ++r)
          for (std::size_t c = 0; c < g.cols; ++c) g.at(r, c) += inv * n.grad.at(0, c);
      } else {
        const double inv = 1.0 / static_cast<double>(g.cols);
        for (std::size_t r = 0; r < g.rows; ++r)
          for (std::size_t c = 0; c < g.cols; ++c) g.at(r, c) += inv * n.grad.at(r, 0);
      }
      break;
    }
    case Op::LogSumExp: {
      if (!wants(0)) break;
      Tensor& g = in_grad(0);
      const Tensor& a = nodes_[n.inputs[0]].val;
      if (n.axis == 1) {
        for (std::size_t r = 0; r < a.rows; ++r)
          for (std::size_t c = 0; c < a.cols; ++c)
            g.at(r, c) += n.grad.at(r, 0) * std::exp(a.at(r, c) - n.val.at(r, 0));
      } else {
        for (std::size_t r = 0; r < a.rows; ++r)
          for (std::size_t c = 0; c < a.cols; ++c)
            g.at(r, c) += n.grad.at(0, c) * std::exp(a.at(r, c) - n.val.at(0, c));
      }
      break;
    }
    case Op::AddOuter: {
      if (wants(0)) {
        Tensor& g = in_grad(0);
        for (std::size_t r = 0; r < n.grad.rows; ++r) {
          double s = 0.0;
          for (std::size_t c = 0; c < n.grad.cols; ++c) s += n.grad.at(r, c);
          g.at(r, 0) += s;
        }
      }
      if (wants(1)) {
        Tensor& g = in_grad(1);
        for (std::size_t c = 0; c < n.grad.cols; ++c) {
          double s = 0.0;
          for (std::size_t r = 0; r < n.grad.rows; ++r) s += n.grad.at(r, c);
          g.at(0, c) += s;
        }
      }
      break;
    }
    case Op::Diag: {
      if (!wants(0)) break;
      Tensor& g = in_grad(0);
      for (std::size_t r = 0; r < n.val.rows; ++r) g.at(r, r) += n.grad.at(r, 0);
      break;
    }
  }
}

void Graph::backward(Var out) {
  backward(out, Tensor::full(value(out).rows, value(out).cols, 1.0));
}

void Graph::backward(Var out, const Tensor& seed) {
  if (!values_fresh_)
    throw std::logic_error("backward: leaf values changed since last forward()");
  Node& o = nodes_.at(out.id);
  if (!o.val.same_shape(seed)) throw std::invalid_argument("backward: seed shape mismatch");
  // leaf grads accumulate across calls; intermediate adjoints are per-call
  for (Node& n : nodes_)
    if (n.op != Op::Input && n.grad.size() != 0) n.grad = Tensor();
  if (o.grad.size() == 0) o.grad = Tensor(o.val.rows, o.val.cols);
  for (std::size_t k = 0; k < seed.size(); ++k) o.grad.v[k] += seed.v[k];
  for (std::size_t i = out.id + 1; i-- > 0;) backprop(i);
}

void Graph::zero_grad() {
  for (Node& n : nodes_) n.grad = Tensor();
}

const Tensor& Graph::value(Var v) const { return nodes_.at(v.id).val; }

const std::string& Graph::label(Var v) const { return nodes_.at(v.id).label; }

const Tensor& Graph::grad(Var v) {
  Node& n = nodes_.at(v.id);
  if (n.grad.size() == 0) n.grad = Tensor(n.val.rows, n.val.cols);
  return n.grad;
}

std::vector<Var> Graph::tracked_leaves() {
  std::vector<Var> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].op == Op::Input && nodes_[i].tracked) out.push_back(Var{this, i});
  return out;
}

// --- grad_check ----------------------------------------------------------------

GradCheckReport grad_check(Graph& g, Var output, double tolerance, double step) {
  GradCheckReport report;
  report.tolerance = tolerance;

  g.forward();
  g.zero_grad();
  g.backward(output);

  std::vector<Var> leaves = g.tracked_leaves();
  std::vector<Tensor> analytic;
  analytic.reserve(leaves.size());
  for (Var l : leaves) analytic.push_back(g.grad(l));

  auto objective = [&]() {
    g.forward();
    const Tensor& out = g.value(output);
    double s = 0.0;
    for (double x : out.v) s += x;
    return s;
  };

  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Var leaf = leaves[li];
    Tensor saved = g.value(leaf);
    GradCheckEntry entry;
    entry.name = g.label(leaf).empty() ? "leaf" + std::to_string(leaf.id) : g.label(leaf);
    Tensor probe = saved;
    for (std::size_t k = 0; k < saved.size(); ++k) {
      probe.v[k] = saved.v[k] + step;
      g.set_leaf(leaf, probe);
      const double fp = objective();
      probe.v[k] = saved.v[k] - step;
      g.set_leaf(leaf, probe);
      const double fm = objective();
      probe.v[k] = saved.v[k];
      const double numeric = (fp - fm) / (2.0 * step);
      const double a = analytic[li].v[k];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), 1e-6});
      entry.max_abs_err = std::max(entry.max_abs_err, abs_err);
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    g.set_leaf(leaf, saved);
    entry.ok = entry.max_rel_err <= tolerance;
    report.all_ok = report.all_ok && entry.ok;
    report.entries.push_back(std::move(entry));
  }
  g.forward();
  return report;
}

}  // namespace ger::ad
