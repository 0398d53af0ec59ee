#pragma once

// Reverse-mode autodiff over dense 2-d tensors. A Graph is a tape of
// primitive ops built define-by-run: creating a node evaluates it eagerly,
// and the whole tape can be re-executed after leaf values change (this is
// what the finite-difference checker relies on). Backward walks the tape in
// reverse creation order, which is a reverse topological order by
// construction. Double precision throughout; a Graph is single-threaded,
// distinct Graphs are independent.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace ger::ad {

struct Tensor {
  std::size_t rows{0};
  std::size_t cols{0};
  std::vector<double> v;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  Tensor(std::size_t r, std::size_t c, std::vector<double> vals);

  static Tensor zeros(std::size_t r, std::size_t c) { return Tensor(r, c); }
  static Tensor full(std::size_t r, std::size_t c, double x);
  static Tensor identity(std::size_t n);
  static Tensor randn(std::size_t r, std::size_t c, std::mt19937_64& rng, double stddev);

  std::size_t size() const { return rows * cols; }
  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;
};

enum class Op : std::uint8_t {
  Input,
  GatherRows,
  MatMul,
  Transpose,
  Add,
  Scale,
  ScalarMulVar,
  Concat,
  Slice,
  RowSoftmax,
  LeakyRelu,
  Relu,
  MeanAxis,
  LogSumExp,
  AddOuter,
  Diag,
};

const char* op_name(Op op);

class Graph;

// Handle to a node on a Graph's tape.
struct Var {
  Graph* g{nullptr};
  std::size_t id{0};

  std::size_t rows() const;
  std::size_t cols() const;
  const Tensor& value() const;
  const Tensor& grad() const;
};

struct Node {
  Op op{Op::Input};
  std::vector<std::size_t> inputs;
  Tensor val;
  Tensor grad;
  bool tracked{false};     // leaf whose grad the caller wants
  bool needs_grad{false};  // tracked, or fed (transitively) by a tracked leaf
  std::string label;       // leaves only, used in diagnostics

  // op attributes
  double scalar{0.0};
  int axis{0};
  std::size_t r0{0}, r1{0}, c0{0}, c1{0};
  std::vector<std::size_t> indices;   // GatherRows
  std::vector<std::uint8_t> mask;     // RowSoftmax; empty = all entries live
};

class Graph {
 public:
  // --- leaves -------------------------------------------------------------
  Var input(Tensor value, bool tracked = false, std::string label = {});
  void set_leaf(Var leaf, const Tensor& value);
  void set_leaf_values(Var leaf, std::span<const double> values);

  // --- primitives ----------------------------------------------------------
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var scale(Var a, double c);
  Var scalar_mul(Var s, Var a);  // s is 1x1
  Var concat(const std::vector<Var>& parts, int axis);
  Var slice(Var a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1);
  Var gather_rows(Var table, std::vector<std::size_t> indices);
  Var row_softmax(Var a);
  // masked row-softmax: mask is row-major over a's shape, nonzero = live.
  // Masked entries are exactly 0 in the output; each row needs >=1 live entry.
  Var row_softmax_masked(Var a, std::vector<std::uint8_t> mask);
  Var leaky_relu(Var a, double negative_slope);
  Var relu(Var a);
  Var mean_axis(Var a, int axis);
  Var logsumexp(Var a, int axis);
  Var add_outer(Var col, Var row);  // out[i][j] = col[i][0] + row[0][j]
  Var diag(Var a);                  // n x n -> n x 1

  // --- execution -----------------------------------------------------------
  // Re-evaluates every node in tape order from current leaf values.
  void forward();
  // Accumulates adjoints from `out`, seeded with `seed` (ones if omitted).
  // Requires values to be fresh (construction or a forward() since the last
  // leaf mutation); throws otherwise.
  void backward(Var out);
  void backward(Var out, const Tensor& seed);
  void zero_grad();

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v);
  const std::string& label(Var v) const;
  std::size_t node_count() const { return nodes_.size(); }
  std::vector<Var> tracked_leaves();

 private:
  friend struct Var;
  std::vector<Node> nodes_;
  bool values_fresh_{true};

  Var push(Node n);
  void eval(std::size_t i);
  void backprop(std::size_t i);
  const Node& node(std::size_t i) const { return nodes_[i]; }
};

// --- gradient verification --------------------------------------------------

struct GradCheckEntry {
  std::string name;
  double max_rel_err{0.0};
  double max_abs_err{0.0};
  bool ok{true};
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance{0.0};
  bool all_ok{true};
};

// Compares analytic gradients of sum(output) w.r.t. every tracked leaf
// against central finite differences (re-running the tape per probe).
// Relative error uses a 1e-6 magnitude floor so zero gradients compare
// cleanly against finite-difference noise.
GradCheckReport grad_check(Graph& g, Var output, double tolerance, double step = 1e-5);

}  // namespace ger::ad
