#include "ger/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ger {

const char* mode_name(EncoderMode m) {
  switch (m) {
    case EncoderMode::Fused: return "fused";
    case EncoderMode::SentenceOnly: return "sentence_only";
    case EncoderMode::GraphOnly: return "graph_only";
    case EncoderMode::NodeMean: return "node_mean";
    case EncoderMode::FlatGat: return "flat_gat";
  }
  return "?";
}

EncoderMode mode_from_name(const std::string& name) {
  if (name == "fused") return EncoderMode::Fused;
  if (name == "sentence_only") return EncoderMode::SentenceOnly;
  if (name == "graph_only") return EncoderMode::GraphOnly;
  if (name == "node_mean") return EncoderMode::NodeMean;
  if (name == "flat_gat") return EncoderMode::FlatGat;
  throw std::invalid_argument("unknown encoder mode '" + name +
                              "' (expected fused|sentence_only|graph_only|node_mean|flat_gat)");
}

void ModelConfig::validate() const {
  if (dim == 0 || max_len < 8 || enc_blocks == 0 || enc_heads == 0 || hgan_heads == 0)
    throw std::invalid_argument("ModelConfig: dim/max_len/blocks/heads must be positive");
  if (dim % enc_heads != 0)
    throw std::invalid_argument("ModelConfig: dim must be divisible by enc_heads");
  if (hgan_concat && dim % hgan_heads != 0)
    throw std::invalid_argument("ModelConfig: dim must be divisible by hgan_heads in concat mode");
  if (vocab_size == 0) throw std::invalid_argument("ModelConfig: vocab_size is unset");
}

void SideParams::init(const ModelConfig& cfg, std::mt19937_64& rng) {
  enc.init(cfg.vocab_size, cfg.max_len, cfg.dim, cfg.enc_blocks, cfg.enc_ff_mult, rng);
  w_triple = ad::Tensor::randn(3 * cfg.dim, cfg.dim, rng,
                               1.0 / std::sqrt(3.0 * static_cast<double>(cfg.dim)));
  hgan.resize(cfg.hgan_layers);
  const std::size_t dh = cfg.hgan_concat ? cfg.dim / cfg.hgan_heads : cfg.dim;
  const double w_std = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
  const double a_std = 1.0 / std::sqrt(2.0 * static_cast<double>(dh));
  for (auto& layer : hgan) {
    layer.w.clear();
    layer.a.clear();
    for (std::size_t k = 0; k < cfg.hgan_heads; ++k) {
      layer.w.push_back(ad::Tensor::randn(cfg.dim, dh, rng, w_std));
      layer.a.push_back(ad::Tensor::randn(2 * dh, 1, rng, a_std));
    }
  }
  lambda_ = ad::Tensor::full(1, 1, cfg.lambda_init);
}

Model Model::init(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Model m;
  m.cfg = cfg;
  std::mt19937_64 rng_m(seed);
  std::mt19937_64 rng_e(seed ^ 0x9e3779b97f4a7c15ull);
  m.mention.init(cfg, rng_m);
  m.entity.init(cfg, rng_e);
  return m;
}

ParamRegistry Model::registry() {
  ParamRegistry reg;
  mention.for_each([&](const std::string& n, ad::Tensor& t) { reg.add("m/" + n, &t); });
  entity.for_each([&](const std::string& n, ad::Tensor& t) { reg.add("e/" + n, &t); });
  return reg;
}

namespace {

ad::Tensor cfg_scalar(double x) { return ad::Tensor::full(1, 1, x); }

double cfg_read(const NamedTensors& entries, const std::string& name) {
  for (const auto& [n, t] : entries)
    if (n == name) return t.v.at(0);
  throw std::runtime_error("checkpoint is missing config entry " + name);
}

}  // namespace

void Model::save(const std::string& path) {
  NamedTensors out;
  out.emplace_back("cfg/dim", cfg_scalar(static_cast<double>(cfg.dim)));
  out.emplace_back("cfg/max_len", cfg_scalar(static_cast<double>(cfg.max_len)));
  out.emplace_back("cfg/enc_blocks", cfg_scalar(static_cast<double>(cfg.enc_blocks)));
  out.emplace_back("cfg/enc_heads", cfg_scalar(static_cast<double>(cfg.enc_heads)));
  out.emplace_back("cfg/enc_ff_mult", cfg_scalar(static_cast<double>(cfg.enc_ff_mult)));
  out.emplace_back("cfg/hgan_layers", cfg_scalar(static_cast<double>(cfg.hgan_layers)));
  out.emplace_back("cfg/hgan_heads", cfg_scalar(static_cast<double>(cfg.hgan_heads)));
  out.emplace_back("cfg/hgan_concat", cfg_scalar(cfg.hgan_concat ? 1.0 : 0.0));
  out.emplace_back("cfg/max_triplets", cfg_scalar(static_cast<double>(cfg.max_triplets)));
  out.emplace_back("cfg/lambda_init", cfg_scalar(cfg.lambda_init));
  out.emplace_back("cfg/leaky_slope", cfg_scalar(cfg.leaky_slope));
  out.emplace_back("cfg/mode_mention", cfg_scalar(static_cast<double>(cfg.mode_mention)));
  out.emplace_back("cfg/mode_entity", cfg_scalar(static_cast<double>(cfg.mode_entity)));
  out.emplace_back("cfg/vocab_size", cfg_scalar(static_cast<double>(cfg.vocab_size)));
  mention.for_each([&](const std::string& n, ad::Tensor& t) { out.emplace_back("m/" + n, t); });
  entity.for_each([&](const std::string& n, ad::Tensor& t) { out.emplace_back("e/" + n, t); });
  save_tensors(path, out);
}

Model Model::load(const std::string& path) {
  const NamedTensors entries = load_tensors(path);
  ModelConfig cfg;
  cfg.dim = static_cast<std::size_t>(cfg_read(entries, "cfg/dim"));
  cfg.max_len = static_cast<std::size_t>(cfg_read(entries, "cfg/max_len"));
  cfg.enc_blocks = static_cast<std::size_t>(cfg_read(entries, "cfg/enc_blocks"));
  cfg.enc_heads = static_cast<std::size_t>(cfg_read(entries, "cfg/enc_heads"));
  cfg.enc_ff_mult = static_cast<std::size_t>(cfg_read(entries, "cfg/enc_ff_mult"));
  cfg.hgan_layers = static_cast<std::size_t>(cfg_read(entries, "cfg/hgan_layers"));
  cfg.hgan_heads = static_cast<std::size_t>(cfg_read(entries, "cfg/hgan_heads"));
  cfg.hgan_concat = cfg_read(entries, "cfg/hgan_concat") != 0.0;
  cfg.max_triplets = static_cast<std::size_t>(cfg_read(entries, "cfg/max_triplets"));
  cfg.lambda_init = cfg_read(entries, "cfg/lambda_init");
  cfg.leaky_slope = cfg_read(entries, "cfg/leaky_slope");
  cfg.mode_mention = static_cast<EncoderMode>(static_cast<int>(cfg_read(entries, "cfg/mode_mention")));
  cfg.mode_entity = static_cast<EncoderMode>(static_cast<int>(cfg_read(entries, "cfg/mode_entity")));
  cfg.vocab_size = static_cast<std::size_t>(cfg_read(entries, "cfg/vocab_size"));

  Model m = Model::init(cfg, 0);
  m.registry().load_from(entries);
  return m;
}

BoundSide bind_side(ad::Graph& g, SideParams& side, bool tracked, const std::string& prefix) {
  BoundSide b;
  side.for_each([&](const std::string& n, ad::Tensor& t) {
    b.leaves.push_back(g.input(t, tracked, prefix + n));
  });
  // leaves hold every parameter in for_each order; rebuild structured views
  std::size_t i = 0;
  b.enc.tok_emb = b.leaves[i++];
  b.enc.pos_emb = b.leaves[i++];
  for (std::size_t bi = 0; bi < side.enc.blocks.size(); ++bi) {
    BoundEncoderBlock blk;
    blk.wq = b.leaves[i++];
    blk.wk = b.leaves[i++];
    blk.wv = b.leaves[i++];
    blk.wo = b.leaves[i++];
    blk.w1 = b.leaves[i++];
    blk.w2 = b.leaves[i++];
    b.enc.blocks.push_back(blk);
  }
  b.w_triple = b.leaves[i++];
  for (std::size_t l = 0; l < side.hgan.size(); ++l) {
    HganLayerVars lv;
    for (std::size_t k = 0; k < side.hgan[l].w.size(); ++k) {
      lv.w.push_back(b.leaves[i++]);
      lv.a.push_back(b.leaves[i++]);
    }
    b.hgan.push_back(std::move(lv));
  }
  b.lambda_ = b.leaves[i++];
  return b;
}

ad::Var fuse(ad::Graph& g, ad::Var v_sen, ad::Var v_graph, ad::Var lambda) {
  if (v_sen.rows() != v_graph.rows() || v_sen.cols() != v_graph.cols())
    throw std::invalid_argument("fuse: sentence and graph vectors disagree in shape");
  return g.add(v_sen, g.scalar_mul(lambda, v_graph));
}

double score(const ad::Tensor& v_m, const ad::Tensor& v_e) {
  if (v_m.size() != v_e.size())
    throw std::invalid_argument("score: dimension mismatch " + std::to_string(v_m.size()) +
                                " vs " + std::to_string(v_e.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < v_m.size(); ++i) s += v_m.v[i] * v_e.v[i];
  return s;
}

ad::Var represent(ad::Graph& g, const BoundSide& side, const ModelConfig& cfg,
                  const TokenizedContext& tc, const UnitSet& aligned_units, EncoderMode mode,
                  RepresentTrace* trace) {
  const bool want_attn = trace != nullptr;
  EncodeResult enc = encode(g, side.enc, tc, cfg.enc_heads, want_attn);
  if (trace) trace->cls_attention = std::move(enc.cls_attention);

  if (mode == EncoderMode::SentenceOnly) return enc.sentence_vec;

  HierarchicalGraph graph = mode == EncoderMode::FlatGat ? build_flat(aligned_units)
                                                         : build_hierarchical(aligned_units);
  ad::Var h0 = init_nodes(g, graph, enc.Y, {tc.span_start, tc.span_end}, side.w_triple);

  if (mode == EncoderMode::NodeMean) {
    ad::Var pooled = graph.nodes.size() == 1 ? h0 : g.mean_axis(h0, 0);
    if (trace) trace->graph = std::move(graph);
    return fuse(g, enc.sentence_vec, pooled, side.lambda_);
  }

  HganOptions opt{cfg.leaky_slope, cfg.hgan_concat};
  ad::Var hl = hgan_stack_forward(g, h0, graph, side.hgan, opt,
                                  want_attn ? &trace->hgan_attention : nullptr);
  ad::Var central = g.slice(hl, 0, 1, 0, hl.cols());
  if (trace) trace->graph = std::move(graph);

  if (mode == EncoderMode::GraphOnly) return central;
  return fuse(g, enc.sentence_vec, central, side.lambda_);  // Fused and FlatGat
}

PreparedInput prepare_mention(const std::string& context_left, const std::string& mention,
                              const std::string& context_right, const Vocabulary& vocab,
                              const ModelConfig& cfg, const RuleConfig& rules,
                              const UnitSet* preextracted_raw) {
  PreparedInput out;
  out.tc = tokenize_mention(context_left, mention, context_right, vocab, cfg.max_len);
  UnitSet raw;
  if (preextracted_raw) {
    raw = *preextracted_raw;
  } else {
    raw = extract_triplets(mention_raw_tokens(context_left, mention, context_right), rules);
  }
  out.units = align_units(raw, out.tc);
  if (out.units.units.size() > cfg.max_triplets) out.units.units.resize(cfg.max_triplets);
  return out;
}

PreparedInput prepare_entity(const std::string& title, const std::string& description,
                             const Vocabulary& vocab, const ModelConfig& cfg,
                             const RuleConfig& rules, const UnitSet* preextracted_raw) {
  PreparedInput out;
  out.tc = tokenize_entity(title, description, vocab, cfg.max_len);
  UnitSet raw;
  if (preextracted_raw) {
    raw = *preextracted_raw;
  } else {
    raw = extract_triplets(entity_raw_tokens(description), rules);
  }
  out.units = align_units(raw, out.tc);
  if (out.units.units.size() > cfg.max_triplets) out.units.units.resize(cfg.max_triplets);
  return out;
}

ad::Tensor represent_value(Model& model, SideParams& side, const PreparedInput& in,
                           EncoderMode mode, RepresentTrace* trace) {
  ad::Graph g;
  BoundSide bound = bind_side(g, side, false, "");
  ad::Var v = represent(g, bound, model.cfg, in.tc, in.units, mode, trace);
  return v.value();
}

}  // namespace ger
