#include "ger/hgan.hpp"

#include <stdexcept>

namespace ger {

ad::Var hgan_attention(ad::Graph& g, ad::Var H, const HierarchicalGraph& graph, ad::Var w,
                       ad::Var a, double leaky_slope) {
  const std::size_t n = graph.nodes.size();
  if (H.rows() != n)
    throw std::invalid_argument("hgan_attention: node state rows " + std::to_string(H.rows()) +
                                " do not match graph size " + std::to_string(n));
  const std::size_t dh = w.cols();
  if (a.rows() != 2 * dh || a.cols() != 1)
    throw std::invalid_argument("hgan_attention: score vector must be " +
                                std::to_string(2 * dh) + "x1");

  ad::Var hw = g.matmul(H, w);                                // n x dh
  ad::Var a_self = g.slice(a, 0, dh, 0, 1);                   // dh x 1
  ad::Var a_neigh = g.slice(a, dh, 2 * dh, 0, 1);             // dh x 1
  ad::Var s_self = g.matmul(hw, a_self);                      // n x 1
  ad::Var s_neigh = g.matmul(hw, a_neigh);                    // n x 1
  ad::Var scores = g.leaky_relu(g.add_outer(s_self, g.transpose(s_neigh)), leaky_slope);
  return g.row_softmax_masked(scores, attention_mask(graph));
}

ad::Var hgan_layer_forward(ad::Graph& g, ad::Var H, const HierarchicalGraph& graph,
                           const HganLayerVars& layer, const HganOptions& opt) {
  if (layer.w.empty() || layer.w.size() != layer.a.size())
    throw std::invalid_argument("hgan_layer_forward: malformed head parameters");
  const std::size_t heads = layer.w.size();

  std::vector<ad::Var> head_out;
  head_out.reserve(heads);
  for (std::size_t k = 0; k < heads; ++k) {
    ad::Var alpha = hgan_attention(g, H, graph, layer.w[k], layer.a[k], opt.leaky_slope);
    head_out.push_back(g.matmul(alpha, g.matmul(H, layer.w[k])));
  }

  ad::Var agg = head_out[0];
  if (opt.concat_heads) {
    if (heads > 1) agg = g.concat(head_out, 1);
  } else {
    for (std::size_t k = 1; k < heads; ++k) agg = g.add(agg, head_out[k]);
    if (heads > 1) agg = g.scale(agg, 1.0 / static_cast<double>(heads));
  }
  return g.relu(agg);
}

namespace {

void collect_attention(ad::Graph& g, ad::Var H, const HierarchicalGraph& graph,
                       const HganLayerVars& layer, double slope, std::size_t layer_idx,
                       std::vector<EdgeAttention>* out) {
  const std::size_t n = graph.nodes.size();
  const std::size_t heads = layer.w.size();
  std::vector<double> mean(n * n, 0.0);
  for (std::size_t k = 0; k < heads; ++k) {
    ad::Var alpha = hgan_attention(g, H, graph, layer.w[k], layer.a[k], slope);
    const ad::Tensor& av = alpha.value();
    for (std::size_t i = 0; i < n * n; ++i) mean[i] += av.v[i];
  }
  const auto mask = attention_mask(graph);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (mask[i * n + j])
        out->push_back({layer_idx, i, j, mean[i * n + j] / static_cast<double>(heads)});
}

}  // namespace

ad::Var hgan_stack_forward(ad::Graph& g, ad::Var H0, const HierarchicalGraph& graph,
                           const std::vector<HganLayerVars>& layers, const HganOptions& opt,
                           std::vector<EdgeAttention>* attention_out) {
  ad::Var h = H0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (attention_out) collect_attention(g, h, graph, layers[l], opt.leaky_slope, l, attention_out);
    h = hgan_layer_forward(g, h, graph, layers[l], opt);
  }
  return h;
}

std::vector<EdgeAttention> extract_attention(ad::Graph& g, ad::Var H0,
                                             const HierarchicalGraph& graph,
                                             const std::vector<HganLayerVars>& layers,
                                             const HganOptions& opt) {
  std::vector<EdgeAttention> out;
  hgan_stack_forward(g, H0, graph, layers, opt, &out);
  return out;
}

}  // namespace ger
