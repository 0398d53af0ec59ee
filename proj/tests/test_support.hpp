#pragma once

#include "ger/tensor.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include <unistd.h>

namespace ger::test {

// Central-difference gradient of sum(output) w.r.t. one leaf, written against
// the tape's re-execution only; stays independent of Graph::backward.
inline ad::Tensor central_diff(ad::Graph& g, ad::Var leaf, ad::Var output, double step = 1e-5) {
  const ad::Tensor saved = g.value(leaf);
  ad::Tensor grad(saved.rows, saved.cols);
  ad::Tensor probe = saved;
  auto objective = [&]() {
    g.forward();
    double s = 0.0;
    for (double x : g.value(output).v) s += x;
    return s;
  };
  for (std::size_t i = 0; i < saved.size(); ++i) {
    probe.v[i] = saved.v[i] + step;
    g.set_leaf(leaf, probe);
    const double fp = objective();
    probe.v[i] = saved.v[i] - step;
    g.set_leaf(leaf, probe);
    const double fm = objective();
    probe.v[i] = saved.v[i];
    grad.v[i] = (fp - fm) / (2.0 * step);
  }
  g.set_leaf(leaf, saved);
  g.forward();
  return grad;
}

inline double max_rel_err(const ad::Tensor& a, const ad::Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double err = std::abs(a.v[i] - b.v[i]) /
                       std::max({std::abs(a.v[i]), std::abs(b.v[i]), 1e-6});
    worst = std::max(worst, err);
  }
  return worst;
}

// random values bounded away from activation kinks
inline ad::Tensor rand_away_from_zero(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  ad::Tensor t(r, c);
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  for (auto& x : t.v) x = (rng() & 1 ? 1.0 : -1.0) * mag(rng);
  return t;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() /
           ("ger_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace ger::test
