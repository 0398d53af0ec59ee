#pragma once

#include "ger/tensor.hpp"
#include "ger/tokenize.hpp"

#include <cstddef>
#include <random>
#include <string>
#include <vector>

namespace ger {

// Compact trainable stand-in for a pretrained masked LM: learned token and
// position embeddings followed by a few residual self-attention blocks.
struct EncoderBlockParams {
  ad::Tensor wq, wk, wv, wo;  // d x d
  ad::Tensor w1, w2;          // d x f, f x d
};

struct EncoderParams {
  ad::Tensor tok_emb;  // |V| x d
  ad::Tensor pos_emb;  // max_len x d
  std::vector<EncoderBlockParams> blocks;

  void init(std::size_t vocab_size, std::size_t max_len, std::size_t dim, std::size_t n_blocks,
            std::size_t ff_mult, std::mt19937_64& rng);

  template <typename Fn>
  void for_each(Fn&& fn) {
    fn("tok_emb", tok_emb);
    fn("pos_emb", pos_emb);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::string p = "blk" + std::to_string(i) + "/";
      fn(p + "wq", blocks[i].wq);
      fn(p + "wk", blocks[i].wk);
      fn(p + "wv", blocks[i].wv);
      fn(p + "wo", blocks[i].wo);
      fn(p + "w1", blocks[i].w1);
      fn(p + "w2", blocks[i].w2);
    }
  }
};

struct BoundEncoderBlock {
  ad::Var wq, wk, wv, wo, w1, w2;
};

struct BoundEncoder {
  ad::Var tok_emb, pos_emb;
  std::vector<BoundEncoderBlock> blocks;
};

BoundEncoder bind_encoder(ad::Graph& g, const EncoderParams& p, bool tracked,
                          const std::string& label_prefix);

struct EncodeResult {
  ad::Var Y;             // L x d per-token embeddings
  ad::Var sentence_vec;  // row 0 of Y
  // head-averaged final-block attention from position 0 to every position;
  // filled only when requested
  std::vector<double> cls_attention;
};

// Deterministic given parameters and input; differentiable w.r.t. every
// bound parameter.
EncodeResult encode(ad::Graph& g, const BoundEncoder& enc, const TokenizedContext& tc,
                    std::size_t heads, bool capture_cls_attention = false);

}  // namespace ger
