#include "ger/tensor.hpp"

#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace ger;
using ger::test::central_diff;
using ger::test::max_rel_err;
using ger::test::rand_away_from_zero;

TEST_CASE("matmul shape rule") {
  ad::Graph g;
  ad::Var a = g.input(ad::Tensor::full(2, 3, 1.0));
  ad::Var b = g.input(ad::Tensor::full(3, 1, 2.0));
  ad::Var c = g.matmul(a, b);
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 1);
  CHECK(c.value().at(0, 0) == doctest::Approx(6.0));

  ad::Var bad = g.input(ad::Tensor(2, 3));
  CHECK_THROWS_WITH_AS(g.matmul(a, bad), doctest::Contains("matmul"), std::invalid_argument);
}

TEST_CASE("row softmax normalizes") {
  std::mt19937_64 rng(11);
  ad::Graph g;
  ad::Var x = g.input(ad::Tensor::randn(7, 9, rng, 3.0));
  ad::Var y = g.row_softmax(x);
  for (std::size_t r = 0; r < 7; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 9; ++c) {
      const double p = y.value().at(r, c);
      CHECK(p > 0.0);
      CHECK(p < 1.0);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("leaky relu values") {
  ad::Graph g;
  ad::Var x = g.input(ad::Tensor(1, 3, {-1.0, 0.0, 2.0}));
  ad::Var y = g.leaky_relu(x, 0.01);
  CHECK(y.value().v[0] == doctest::Approx(-0.01));
  CHECK(y.value().v[1] == doctest::Approx(0.0));
  CHECK(y.value().v[2] == doctest::Approx(2.0));
}

TEST_CASE("d(x*x)/dx = 2x") {
  ad::Graph g;
  ad::Var x = g.input(ad::Tensor::full(1, 1, 3.0), true);
  ad::Var y = g.matmul(x, x);
  g.backward(y);
  CHECK(g.grad(x).v[0] == doctest::Approx(6.0));
}

TEST_CASE("softmax row sums have zero gradient") {
  std::mt19937_64 rng(5);
  ad::Graph g;
  ad::Var x = g.input(ad::Tensor::randn(4, 6, rng, 1.0), true);
  ad::Var y = g.row_softmax(x);
  g.backward(y);  // seed of ones = gradient of the per-row sums
  for (double v : g.grad(x).v) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("composite of matmul, leaky_relu, softmax matches finite differences") {
  std::mt19937_64 rng(17);
  ad::Graph g;
  ad::Var w1 = g.input(rand_away_from_zero(4, 5, rng), true);
  ad::Var w2 = g.input(rand_away_from_zero(5, 5, rng), true);
  ad::Var w3 = g.input(rand_away_from_zero(5, 3, rng), true);
  ad::Var x = g.input(rand_away_from_zero(2, 4, rng), true);
  ad::Var s = g.input(ad::Tensor::full(1, 1, 0.7), true);
  ad::Var h = g.leaky_relu(g.matmul(x, w1), 0.01);
  ad::Var out = g.row_softmax(g.scalar_mul(s, g.matmul(g.matmul(h, w2), w3)));
  // softmax row sums are constant, so compose one more mix to get signal
  ad::Var final_out = g.matmul(out, g.transpose(w3));

  g.backward(final_out);
  for (ad::Var leaf : {w1, w2, w3, x, s}) {
    const ad::Tensor numeric = central_diff(g, leaf, final_out);
    CHECK(max_rel_err(g.grad(leaf), numeric) < 1e-4);
  }
}

TEST_CASE("grad_check: linear layer is exact to 1e-6") {
  std::mt19937_64 rng(23);
  ad::Graph g;
  ad::Var w = g.input(ad::Tensor::randn(6, 4, rng, 0.5), true, "w");
  ad::Var b = g.input(ad::Tensor::randn(3, 4, rng, 0.5), true, "b");
  ad::Var x = g.input(ad::Tensor::randn(3, 6, rng, 0.5));
  ad::Var y = g.add(g.matmul(x, w), b);
  const ad::GradCheckReport report = ad::grad_check(g, y, 1e-6);
  CHECK(report.all_ok);
  for (const auto& e : report.entries) CHECK(e.max_rel_err < 1e-6);
}

TEST_CASE("grad_check: constant function has zero gradients both ways") {
  ad::Graph g;
  ad::Var x = g.input(ad::Tensor::full(2, 2, 1.5), true);
  ad::Var c = g.input(ad::Tensor::full(2, 2, 4.0));
  ad::Var y = g.scale(c, 2.0);  // no path from x
  (void)x;
  const ad::GradCheckReport report = ad::grad_check(g, y, 1e-6);
  CHECK(report.all_ok);
  CHECK(report.entries.size() == 1);
  CHECK(report.entries[0].max_abs_err == doctest::Approx(0.0));
}

namespace {

// one randomized graph per primitive; returns the output node
ad::Var build_primitive_case(ad::Graph& g, int which, std::mt19937_64& rng) {
  using ger::test::rand_away_from_zero;
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  const std::size_t r = dim(rng), c = dim(rng), k = dim(rng);
  switch (which) {
    case 0: return g.matmul(g.input(rand_away_from_zero(r, k, rng), true),
                            g.input(rand_away_from_zero(k, c, rng), true));
    case 1: return g.transpose(g.input(rand_away_from_zero(r, c, rng), true));
    case 2: {
      ad::Var a = g.input(rand_away_from_zero(r, c, rng), true);
      ad::Var b = g.input(rand_away_from_zero(r, c, rng), true);
      return g.add(a, b);
    }
    case 3: return g.scale(g.input(rand_away_from_zero(r, c, rng), true), -1.7);
    case 4: return g.scalar_mul(g.input(rand_away_from_zero(1, 1, rng), true),
                                g.input(rand_away_from_zero(r, c, rng), true));
    case 5: {
      std::vector<ad::Var> parts;
      for (int i = 0; i < 3; ++i) parts.push_back(g.input(rand_away_from_zero(r, c, rng), true));
      return g.concat(parts, rng() & 1 ? 1 : 0);
    }
    case 6: {
      ad::Var a = g.input(rand_away_from_zero(r + 2, c + 2, rng), true);
      return g.slice(a, 1, r + 2, 1, c + 2);
    }
    case 7: {
      ad::Var t = g.input(rand_away_from_zero(r + 1, c, rng), true);
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < r + 3; ++i) idx.push_back(rng() % (r + 1));
      return g.gather_rows(t, idx);
    }
    case 8: {
      // row softmax composed with a mixing matmul so the objective is not
      // constant
      ad::Var x = g.input(rand_away_from_zero(r, c, rng), true);
      ad::Var m = g.input(rand_away_from_zero(c, 2, rng));
      return g.matmul(g.row_softmax(x), m);
    }
    case 9: {
      const std::size_t n = r + 1;
      ad::Var x = g.input(rand_away_from_zero(n, n, rng), true);
      std::vector<std::uint8_t> mask(n * n, 0);
      for (std::size_t i = 0; i < n; ++i) {
        mask[i * n + i] = 1;
        mask[i * n + (i + 1) % n] = 1;
      }
      ad::Var m = g.input(rand_away_from_zero(n, 2, rng));
      return g.matmul(g.row_softmax_masked(x, mask), m);
    }
    case 10: return g.leaky_relu(g.input(rand_away_from_zero(r, c, rng), true), 0.01);
    case 11: return g.relu(g.input(rand_away_from_zero(r, c, rng), true));
    case 12: return g.mean_axis(g.input(rand_away_from_zero(r, c, rng), true), rng() & 1);
    case 13: return g.logsumexp(g.input(rand_away_from_zero(r, c, rng), true), rng() & 1);
    case 14: return g.add_outer(g.input(rand_away_from_zero(r, 1, rng), true),
                                g.input(rand_away_from_zero(1, c, rng), true));
    default: {
      const std::size_t n = r + 1;
      return g.diag(g.input(rand_away_from_zero(n, n, rng), true));
    }
  }
}

}  // namespace

TEST_CASE("every primitive passes gradient checks over random shapes") {
  int cases = 0;
  for (int which = 0; which < 16; ++which) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      std::mt19937_64 rng(seed * 131 + which);
      ad::Graph g;
      ad::Var out = build_primitive_case(g, which, rng);
      const ad::GradCheckReport report = ad::grad_check(g, out, 1e-4);
      INFO("primitive case ", which, " seed ", seed);
      CHECK(report.all_ok);
      ++cases;
    }
  }
  CHECK(cases >= 100);
}

TEST_CASE("backward is linear in the seed") {
  std::mt19937_64 rng(31);
  ad::Graph g;
  ad::Var x = g.input(rand_away_from_zero(3, 4, rng), true);
  ad::Var w = g.input(rand_away_from_zero(4, 2, rng), true);
  ad::Var y = g.leaky_relu(g.matmul(x, w), 0.01);

  g.backward(y);
  const ad::Tensor g1 = g.grad(x);

  g.zero_grad();
  const double alpha = 3.25;
  g.backward(y, ad::Tensor::full(y.rows(), y.cols(), alpha));
  const ad::Tensor g2 = g.grad(x);
  for (std::size_t i = 0; i < g1.size(); ++i)
    CHECK(std::abs(g2.v[i] - alpha * g1.v[i]) < 1e-10);
}

TEST_CASE("repeated backward accumulates until cleared") {
  ad::Graph g;
  ad::Var x = g.input(ad::Tensor::full(1, 1, 2.0), true);
  ad::Var y = g.scale(x, 5.0);
  g.backward(y);
  g.backward(y);
  CHECK(g.grad(x).v[0] == doctest::Approx(10.0));
  g.zero_grad();
  g.backward(y);
  CHECK(g.grad(x).v[0] == doctest::Approx(5.0));
}

TEST_CASE("backward before forward refresh is an error") {
  ad::Graph g;
  ad::Var x = g.input(ad::Tensor::full(2, 2, 1.0), true);
  ad::Var y = g.relu(x);
  g.set_leaf(x, ad::Tensor::full(2, 2, -1.0));
  CHECK_THROWS_AS(g.backward(y), std::logic_error);
  g.forward();
  g.backward(y);  // fine after re-running
}

TEST_CASE("masked softmax: masked entries are exactly zero, rows sum to one") {
  std::mt19937_64 rng(41);
  ad::Graph g;
  const std::size_t n = 5;
  ad::Var x = g.input(ad::Tensor::randn(n, n, rng, 2.0));
  std::vector<std::uint8_t> mask(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    mask[i * n + i] = 1;
    mask[i * n + (i + 2) % n] = 1;
  }
  ad::Var y = g.row_softmax_masked(x, mask);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!mask[i * n + j]) CHECK(y.value().at(i, j) == 0.0);
      sum += y.value().at(i, j);
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("fully masked row is rejected") {
  ad::Graph g;
  ad::Var x = g.input(ad::Tensor(2, 2));
  std::vector<std::uint8_t> mask = {1, 1, 0, 0};
  CHECK_THROWS_AS(g.row_softmax_masked(x, mask), std::invalid_argument);
}
