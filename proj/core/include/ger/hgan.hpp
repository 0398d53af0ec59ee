#pragma once

#include "ger/hier_graph.hpp"
#include "ger/tensor.hpp"

#include <cstddef>
#include <vector>

namespace ger {

// Per-layer attention parameters bound onto a Graph: one d x d projection and
// one 2d x 1 score vector per head (d/K wide in concat mode).
struct HganLayerVars {
  std::vector<ad::Var> w;
  std::vector<ad::Var> a;
};

struct HganOptions {
  double leaky_slope{0.01};
  bool concat_heads{false};  // paper formulation averages heads; concat is a
                             // configuration variant, not a fidelity claim
};

// Masked attention for one head: alpha[i][j] = softmax_j over N_i and the
// self loop of LeakyReLU([h_i W || h_j W] a); exactly 0 on non-edges.
ad::Var hgan_attention(ad::Graph& g, ad::Var H, const HierarchicalGraph& graph, ad::Var w,
                       ad::Var a, double leaky_slope);

// h'_i = relu( (1/K) sum_k sum_j alpha^k_ij h_j W^k )   (average mode)
ad::Var hgan_layer_forward(ad::Graph& g, ad::Var H, const HierarchicalGraph& graph,
                           const HganLayerVars& layer, const HganOptions& opt);

struct EdgeAttention {
  std::size_t layer;
  std::size_t node_i;
  std::size_t node_j;
  double weight;  // head-averaged alpha_ij
};

// L sequential layers; the central row of the result is the fine-grained
// embedding. When `attention_out` is given, head-averaged alpha values for
// every live (i, j) pair, self loops included, are appended per layer.
ad::Var hgan_stack_forward(ad::Graph& g, ad::Var H0, const HierarchicalGraph& graph,
                           const std::vector<HganLayerVars>& layers, const HganOptions& opt,
                           std::vector<EdgeAttention>* attention_out = nullptr);

// Runs the stack purely for its attention maps.
std::vector<EdgeAttention> extract_attention(ad::Graph& g, ad::Var H0,
                                             const HierarchicalGraph& graph,
                                             const std::vector<HganLayerVars>& layers,
                                             const HganOptions& opt);

}  // namespace ger
