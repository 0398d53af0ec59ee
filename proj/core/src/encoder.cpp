#include "ger/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace ger {

void EncoderParams::init(std::size_t vocab_size, std::size_t max_len, std::size_t dim,
                         std::size_t n_blocks, std::size_t ff_mult, std::mt19937_64& rng) {
  // fan-in scaling; there is no layer normalization to rescue a bad scale
  const double emb_std = 1.0 / std::sqrt(static_cast<double>(dim));
  const double w_std = 1.0 / std::sqrt(static_cast<double>(dim));
  const double ff_std = 1.0 / std::sqrt(static_cast<double>(dim * ff_mult));
  tok_emb = ad::Tensor::randn(vocab_size, dim, rng, emb_std);
  pos_emb = ad::Tensor::randn(max_len, dim, rng, emb_std);
  blocks.resize(n_blocks);
  for (auto& b : blocks) {
    b.wq = ad::Tensor::randn(dim, dim, rng, w_std);
    b.wk = ad::Tensor::randn(dim, dim, rng, w_std);
    b.wv = ad::Tensor::randn(dim, dim, rng, w_std);
    b.wo = ad::Tensor::randn(dim, dim, rng, w_std);
    b.w1 = ad::Tensor::randn(dim, dim * ff_mult, rng, w_std);
    b.w2 = ad::Tensor::randn(dim * ff_mult, dim, rng, ff_std);
  }
}

BoundEncoder bind_encoder(ad::Graph& g, const EncoderParams& p, bool tracked,
                          const std::string& label_prefix) {
  BoundEncoder b;
  b.tok_emb = g.input(p.tok_emb, tracked, label_prefix + "tok_emb");
  b.pos_emb = g.input(p.pos_emb, tracked, label_prefix + "pos_emb");
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    const std::string pre = label_prefix + "blk" + std::to_string(i) + "/";
    BoundEncoderBlock blk;
    blk.wq = g.input(p.blocks[i].wq, tracked, pre + "wq");
    blk.wk = g.input(p.blocks[i].wk, tracked, pre + "wk");
    blk.wv = g.input(p.blocks[i].wv, tracked, pre + "wv");
    blk.wo = g.input(p.blocks[i].wo, tracked, pre + "wo");
    blk.w1 = g.input(p.blocks[i].w1, tracked, pre + "w1");
    blk.w2 = g.input(p.blocks[i].w2, tracked, pre + "w2");
    b.blocks.push_back(blk);
  }
  return b;
}

EncodeResult encode(ad::Graph& g, const BoundEncoder& enc, const TokenizedContext& tc,
                    std::size_t heads, bool capture_cls_attention) {
  const std::size_t L = tc.ids.size();
  const std::size_t vocab = enc.tok_emb.rows();
  const std::size_t d = enc.tok_emb.cols();
  if (L == 0) throw std::invalid_argument("encode: empty input");
  if (L > enc.pos_emb.rows())
    throw std::invalid_argument("encode: input length " + std::to_string(L) +
                                " exceeds positional table " + std::to_string(enc.pos_emb.rows()));
  if (heads == 0 || d % heads != 0)
    throw std::invalid_argument("encode: dim must be divisible by head count");

  std::vector<std::size_t> ids;
  ids.reserve(L);
  for (int id : tc.ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab)
      throw std::invalid_argument("encode: token id " + std::to_string(id) +
                                  " out of range for vocabulary of " + std::to_string(vocab));
    ids.push_back(static_cast<std::size_t>(id));
  }

  const std::size_t dh = d / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  ad::Var x = g.add(g.gather_rows(enc.tok_emb, ids), g.slice(enc.pos_emb, 0, L, 0, d));

  EncodeResult res;
  for (std::size_t bi = 0; bi < enc.blocks.size(); ++bi) {
    const BoundEncoderBlock& blk = enc.blocks[bi];
    ad::Var q = g.matmul(x, blk.wq);
    ad::Var k = g.matmul(x, blk.wk);
    ad::Var v = g.matmul(x, blk.wv);

    std::vector<ad::Var> head_out;
    head_out.reserve(heads);
    const bool last = bi + 1 == enc.blocks.size();
    std::vector<double> cls_attn(last && capture_cls_attention ? L : 0, 0.0);

    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t c0 = h * dh, c1 = (h + 1) * dh;
      ad::Var qh = g.slice(q, 0, L, c0, c1);
      ad::Var kh = g.slice(k, 0, L, c0, c1);
      ad::Var vh = g.slice(v, 0, L, c0, c1);
      ad::Var probs = g.row_softmax(g.scale(g.matmul(qh, g.transpose(kh)), inv_sqrt));
      if (!cls_attn.empty()) {
        const ad::Tensor& pv = probs.value();
        for (std::size_t j = 0; j < L; ++j) cls_attn[j] += pv.at(0, j);
      }
      head_out.push_back(g.matmul(probs, vh));
    }
    if (!cls_attn.empty()) {
      for (double& a : cls_attn) a /= static_cast<double>(heads);
      res.cls_attention = std::move(cls_attn);
    }

    ad::Var attn = g.matmul(heads == 1 ? head_out[0] : g.concat(head_out, 1), blk.wo);
    ad::Var x1 = g.add(x, attn);
    ad::Var ff = g.matmul(g.relu(g.matmul(x1, blk.w1)), blk.w2);
    x = g.add(x1, ff);
  }

  res.Y = x;
  res.sentence_vec = g.slice(x, 0, 1, 0, d);
  return res;
}

}  // namespace ger
