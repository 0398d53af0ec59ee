#pragma once

#include "ger/tensor.hpp"
#include "ger/triplets.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace ger {

enum class NodeRole { Central, Hub, Subject, Predicate, Object };

struct GraphNode {
  NodeRole role{NodeRole::Central};
  std::size_t triplet{0};                    // owning triplet (unused for the central node)
  std::size_t span_start{0}, span_end{0};    // TokenizedContext positions; leaves only
};

// Mention/entity centered knowledge graph. Node order is fixed: central
// first, then per triplet either (hub, S, P, O) or (S, P, O) in the flat
// variant. Edges are undirected.
struct HierarchicalGraph {
  std::vector<GraphNode> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::vector<std::size_t>> neighbors;
  std::size_t n_triplets{0};
  bool hierarchical{true};

  std::size_t degree(std::size_t i) const { return neighbors[i].size(); }
};

// Central node plus one hub per triplet; the hub carries the triplet's
// S/P/O leaves, which also form a clique. Central degree is N rather than
// the flat variant's 3N.
HierarchicalGraph build_hierarchical(const UnitSet& aligned_units);

// Ablation graph: S/P/O leaves attach to the central node directly; the
// intra-triplet cliques are kept.
HierarchicalGraph build_flat(const UnitSet& aligned_units);

// Attention mask over node pairs: live for j in N_i and the diagonal.
std::vector<std::uint8_t> attention_mask(const HierarchicalGraph& g);

// Initial node states, row per node in roster order. Central and leaf nodes
// average the encoder rows of their spans; each hub is [h_s || h_p || h_o]
// times the 3d x d mixing matrix. Fully differentiable through Y and
// w_triple.
ad::Var init_nodes(ad::Graph& g, const HierarchicalGraph& graph, ad::Var Y,
                   std::pair<std::size_t, std::size_t> central_span, ad::Var w_triple);

}  // namespace ger
