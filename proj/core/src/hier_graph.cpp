#include "ger/hier_graph.hpp"

#include <stdexcept>

namespace ger {

namespace {

void add_edge(HierarchicalGraph& g, std::size_t a, std::size_t b) {
  g.edges.emplace_back(a, b);
  g.neighbors[a].push_back(b);
  g.neighbors[b].push_back(a);
}

void add_leaves(HierarchicalGraph& g, const KnowledgeUnit& u, std::size_t t) {
  g.nodes.push_back({NodeRole::Subject, t, u.s_start, u.s_end});
  g.nodes.push_back({NodeRole::Predicate, t, u.p_start, u.p_end});
  g.nodes.push_back({NodeRole::Object, t, u.o_start, u.o_end});
}

}  // namespace

HierarchicalGraph build_hierarchical(const UnitSet& aligned_units) {
  HierarchicalGraph g;
  g.hierarchical = true;
  g.n_triplets = aligned_units.units.size();
  const std::size_t n = 1 + 4 * g.n_triplets;
  g.nodes.reserve(n);
  g.nodes.push_back({NodeRole::Central, 0, 0, 0});
  g.neighbors.resize(n);
  for (std::size_t t = 0; t < g.n_triplets; ++t) {
    const std::size_t hub = 1 + 4 * t;
    g.nodes.push_back({NodeRole::Hub, t, 0, 0});
    add_leaves(g, aligned_units.units[t], t);
    add_edge(g, 0, hub);
    add_edge(g, hub, hub + 1);
    add_edge(g, hub, hub + 2);
    add_edge(g, hub, hub + 3);
    add_edge(g, hub + 1, hub + 2);
    add_edge(g, hub + 1, hub + 3);
    add_edge(g, hub + 2, hub + 3);
  }
  return g;
}

HierarchicalGraph build_flat(const UnitSet& aligned_units) {
  HierarchicalGraph g;
  g.hierarchical = false;
  g.n_triplets = aligned_units.units.size();
  const std::size_t n = 1 + 3 * g.n_triplets;
  g.nodes.reserve(n);
  g.nodes.push_back({NodeRole::Central, 0, 0, 0});
  g.neighbors.resize(n);
  for (std::size_t t = 0; t < g.n_triplets; ++t) {
    const std::size_t s = 1 + 3 * t;
    add_leaves(g, aligned_units.units[t], t);
    add_edge(g, 0, s);
    add_edge(g, 0, s + 1);
    add_edge(g, 0, s + 2);
    add_edge(g, s, s + 1);
    add_edge(g, s, s + 2);
    add_edge(g, s + 1, s + 2);
  }
  return g;
}

std::vector<std::uint8_t> attention_mask(const HierarchicalGraph& g) {
  const std::size_t n = g.nodes.size();
  std::vector<std::uint8_t> mask(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) mask[i * n + i] = 1;
  for (const auto& [a, b] : g.edges) {
    mask[a * n + b] = 1;
    mask[b * n + a] = 1;
  }
  return mask;
}

ad::Var init_nodes(ad::Graph& g, const HierarchicalGraph& graph, ad::Var Y,
                   std::pair<std::size_t, std::size_t> central_span, ad::Var w_triple) {
  const std::size_t L = Y.rows();
  auto span_mean = [&](std::size_t a, std::size_t b) {
    if (a >= b || b > L)
      throw std::invalid_argument("init_nodes: empty or out-of-range span [" +
                                  std::to_string(a) + "," + std::to_string(b) + ")");
    ad::Var rows = g.slice(Y, a, b, 0, Y.cols());
    return b - a == 1 ? rows : g.mean_axis(rows, 0);
  };

  ad::Var central = span_mean(central_span.first, central_span.second);
  std::vector<ad::Var> rows;
  rows.reserve(graph.nodes.size());
  rows.push_back(central);

  for (std::size_t t = 0; t < graph.n_triplets; ++t) {
    const std::size_t base = graph.hierarchical ? 1 + 4 * t + 1 : 1 + 3 * t;
    ad::Var hs = span_mean(graph.nodes[base].span_start, graph.nodes[base].span_end);
    ad::Var hp = span_mean(graph.nodes[base + 1].span_start, graph.nodes[base + 1].span_end);
    ad::Var ho = span_mean(graph.nodes[base + 2].span_start, graph.nodes[base + 2].span_end);
    if (graph.hierarchical) {
      ad::Var hub = g.matmul(g.concat({hs, hp, ho}, 1), w_triple);
      rows.push_back(hub);
    }
    rows.push_back(hs);
    rows.push_back(hp);
    rows.push_back(ho);
  }
  return rows.size() == 1 ? rows[0] : g.concat(rows, 0);
}

}  // namespace ger
