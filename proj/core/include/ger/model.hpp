#pragma once

#include "ger/checkpoint.hpp"
#include "ger/encoder.hpp"
#include "ger/hgan.hpp"
#include "ger/hier_graph.hpp"
#include "ger/tensor.hpp"
#include "ger/tokenize.hpp"
#include "ger/triplets.hpp"
#include "ger/vocab.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ger {

// How one encoder side turns an input into its d-vector.
//   Fused        v_sen + lambda * v_graph
//   SentenceOnly v_sen (the bi-encoder baseline; Fused with lambda fixed 0)
//   GraphOnly    central node state after the full stack
//   NodeMean     v_sen + lambda * mean of all initial node states
//   FlatGat      Fused, but over the hubless flat adjacency
enum class EncoderMode { Fused, SentenceOnly, GraphOnly, NodeMean, FlatGat };

const char* mode_name(EncoderMode m);
EncoderMode mode_from_name(const std::string& name);

struct ModelConfig {
  std::size_t dim{64};
  std::size_t max_len{128};
  std::size_t enc_blocks{2};
  std::size_t enc_heads{4};
  std::size_t enc_ff_mult{4};
  std::size_t hgan_layers{3};
  std::size_t hgan_heads{8};
  bool hgan_concat{false};
  std::size_t max_triplets{16};
  double lambda_init{0.5};
  double leaky_slope{0.01};
  EncoderMode mode_mention{EncoderMode::Fused};
  EncoderMode mode_entity{EncoderMode::Fused};
  std::size_t vocab_size{0};

  void validate() const;
};

// Parameters of one encoder side. The two sides are fully disjoint.
struct HganLayerParams {
  std::vector<ad::Tensor> w;  // per head
  std::vector<ad::Tensor> a;  // per head, 2*dh x 1
};

struct SideParams {
  EncoderParams enc;
  ad::Tensor w_triple;                 // 3d x d
  std::vector<HganLayerParams> hgan;
  ad::Tensor lambda_;                  // 1x1

  void init(const ModelConfig& cfg, std::mt19937_64& rng);

  template <typename Fn>
  void for_each(Fn&& fn) {
    enc.for_each(fn);
    fn("w_triple", w_triple);
    for (std::size_t l = 0; l < hgan.size(); ++l)
      for (std::size_t k = 0; k < hgan[l].w.size(); ++k) {
        const std::string p = "hgan/l" + std::to_string(l) + "/h" + std::to_string(k) + "/";
        fn(p + "w", hgan[l].w[k]);
        fn(p + "a", hgan[l].a[k]);
      }
    fn("lambda", lambda_);
  }
};

struct Model {
  ModelConfig cfg;
  SideParams mention;
  SideParams entity;

  static Model init(const ModelConfig& cfg, std::uint64_t seed);

  // Registry order is stable: every mention tensor (m/...), then every
  // entity tensor (e/...). Checkpoints carry these plus cfg/* echo entries.
  ParamRegistry registry();
  void save(const std::string& path);
  static Model load(const std::string& path);
};

// Per-graph leaves for one side, in the same order as the registry.
struct BoundSide {
  BoundEncoder enc;
  ad::Var w_triple;
  std::vector<HganLayerVars> hgan;
  ad::Var lambda_;
  std::vector<ad::Var> leaves;  // registry-ordered
};

BoundSide bind_side(ad::Graph& g, SideParams& side, bool tracked, const std::string& prefix);

struct RepresentTrace {
  std::vector<double> cls_attention;           // final-block [CLS] row, head-averaged
  std::vector<EdgeAttention> hgan_attention;   // filled for graph-bearing modes
  HierarchicalGraph graph;
};

// Eqs of the encoder side composed end to end for the requested mode.
// `aligned_units` must already be in TokenizedContext coordinates.
ad::Var represent(ad::Graph& g, const BoundSide& side, const ModelConfig& cfg,
                  const TokenizedContext& tc, const UnitSet& aligned_units, EncoderMode mode,
                  RepresentTrace* trace = nullptr);

// v = v_sen + lambda * v_graph
ad::Var fuse(ad::Graph& g, ad::Var v_sen, ad::Var v_graph, ad::Var lambda);

// Raw inner product of two equal-length vectors.
double score(const ad::Tensor& v_m, const ad::Tensor& v_e);

// --- preprocessing shared by training, indexing and retrieval ---------------

struct PreparedInput {
  TokenizedContext tc;
  UnitSet units;  // aligned
};

PreparedInput prepare_mention(const std::string& context_left, const std::string& mention,
                              const std::string& context_right, const Vocabulary& vocab,
                              const ModelConfig& cfg, const RuleConfig& rules,
                              const UnitSet* preextracted_raw = nullptr);
PreparedInput prepare_entity(const std::string& title, const std::string& description,
                             const Vocabulary& vocab, const ModelConfig& cfg,
                             const RuleConfig& rules, const UnitSet* preextracted_raw = nullptr);

// Convenience: bind + represent on a fresh graph with frozen parameters.
ad::Tensor represent_value(Model& model, SideParams& side, const PreparedInput& in,
                           EncoderMode mode, RepresentTrace* trace = nullptr);

}  // namespace ger
