// Command-line surface for the graph-enhanced entity retrieval pipeline:
// corpus generation, triplet extraction, bi-encoder training, entity-index
// construction, top-k retrieval, recall evaluation, encoder-mode ablations,
// and attention inspection.

#include "ger/checkpoint.hpp"
#include "ger/eval.hpp"
#include "ger/index.hpp"
#include "ger/loss.hpp"
#include "ger/model.hpp"
#include "ger/records.hpp"
#include "ger/synth.hpp"
#include "ger/train.hpp"
#include "ger/triplets.hpp"

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>

namespace {

using json = nlohmann::json;
using namespace ger;

struct ModelFlags {
  std::size_t dim = 64;
  std::size_t max_len = 128;
  std::size_t enc_blocks = 2;
  std::size_t enc_heads = 4;
  std::size_t layers = 3;  // HGAN
  std::size_t heads = 8;   // HGAN
  std::size_t max_triplets = 16;
  double lambda_init = 0.5;
  std::string mode_mention = "fused";
  std::string mode_entity = "fused";
  bool hgan_concat = false;
};

struct TrainFlags {
  double lr = 1e-3;
  double weight_decay = 0.01;
  double clip = 1.0;
  double warmup = 0.1;
  std::size_t epochs = 5;
  std::size_t batch = 16;
  std::uint64_t seed = 42;
  double ratio = 1.0;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--dim", f.dim, "Embedding width");
  cmd->add_option("--max-len", f.max_len, "Maximum encoder input length");
  cmd->add_option("--enc-blocks", f.enc_blocks, "Text-encoder blocks");
  cmd->add_option("--enc-heads", f.enc_heads, "Text-encoder attention heads");
  cmd->add_option("--layers", f.layers, "Graph attention layers");
  cmd->add_option("--heads", f.heads, "Graph attention heads");
  cmd->add_option("--max-triplets", f.max_triplets, "Knowledge units kept per context");
  cmd->add_option("--lambda-init", f.lambda_init, "Initial fusion weight");
  cmd->add_option("--mode-mention", f.mode_mention,
                  "fused|sentence_only|graph_only|node_mean|flat_gat");
  cmd->add_option("--mode-entity", f.mode_entity,
                  "fused|sentence_only|graph_only|node_mean|flat_gat");
  cmd->add_flag("--hgan-concat", f.hgan_concat, "Concatenate attention heads instead of averaging");
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--lr", f.lr, "Learning rate");
  cmd->add_option("--weight-decay", f.weight_decay, "Decoupled weight decay");
  cmd->add_option("--clip", f.clip, "Gradient-norm clip");
  cmd->add_option("--warmup", f.warmup, "Warmup fraction of total steps");
  cmd->add_option("--epochs", f.epochs, "Training epochs");
  cmd->add_option("--batch", f.batch, "Batch size");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--ratio", f.ratio, "Training-data fraction in (0,1]");
}

ModelConfig model_config(const ModelFlags& f, std::size_t vocab_size) {
  ModelConfig cfg;
  cfg.dim = f.dim;
  cfg.max_len = f.max_len;
  cfg.enc_blocks = f.enc_blocks;
  cfg.enc_heads = f.enc_heads;
  cfg.hgan_layers = f.layers;
  cfg.hgan_heads = f.heads;
  cfg.hgan_concat = f.hgan_concat;
  cfg.max_triplets = f.max_triplets;
  cfg.lambda_init = f.lambda_init;
  cfg.mode_mention = mode_from_name(f.mode_mention);
  cfg.mode_entity = mode_from_name(f.mode_entity);
  cfg.vocab_size = vocab_size;
  cfg.validate();
  return cfg;
}

TrainConfig train_config(const TrainFlags& f) {
  TrainConfig cfg;
  cfg.lr = f.lr;
  cfg.weight_decay = f.weight_decay;
  cfg.clip_norm = f.clip;
  cfg.warmup_frac = f.warmup;
  cfg.epochs = f.epochs;
  cfg.batch_size = f.batch;
  cfg.seed = f.seed;
  cfg.ratio = f.ratio;
  cfg.validate();
  return cfg;
}

std::set<std::string> id_set(const std::vector<EntityRecord>& entities) {
  std::set<std::string> s;
  for (const auto& e : entities) s.insert(e.id);
  return s;
}

std::map<std::string, std::size_t> mention_context_lengths(
    const std::vector<MentionRecord>& mentions) {
  std::map<std::string, std::size_t> out;
  for (const auto& m : mentions)
    out[m.id] = mention_raw_tokens(m.context_left, m.mention, m.context_right).size();
  return out;
}

std::map<std::string, std::size_t> entity_context_lengths(
    const std::vector<EntityRecord>& entities) {
  std::map<std::string, std::size_t> out;
  for (const auto& e : entities) out[e.id] = entity_raw_tokens(e.description).size();
  return out;
}

std::map<std::string, UnitSet> load_triplet_file(const std::string& path,
                                                 const std::map<std::string, std::size_t>& lens) {
  TripletLoadResult res = load_triplets(path, lens);
  for (const auto& d : res.diagnostics) std::cerr << "warning: " << d << "\n";
  return std::move(res.units);
}

void print_recall(const RecallTable& t, const std::string& label) {
  std::printf("%-32s", label.c_str());
  for (std::size_t i = 0; i < t.ks.size(); ++i) std::printf("  R@%-4zu", t.ks[i]);
  std::printf("\n%-32s", "");
  for (double r : t.recall) std::printf("  %6.2f", 100.0 * r);
  std::printf("\n");
}

RuleConfig rules_from(const std::string& verbs_path, std::size_t max_triplets) {
  RuleConfig rules = RuleConfig::defaults();
  if (!verbs_path.empty()) rules.verb_lexicon = RuleConfig::load_verb_lexicon(verbs_path);
  rules.max_triplets = max_triplets;
  return rules;
}

// --- subcommands -------------------------------------------------------------

int cmd_gen_corpus(const std::string& out_dir, SynthConfig cfg) {
  std::filesystem::create_directories(out_dir);
  SynthCorpus corpus = generate_corpus(cfg);
  namespace fs = std::filesystem;
  save_mentions((fs::path(out_dir) / "train_mentions.jsonl").string(), corpus.train_mentions);
  save_entities((fs::path(out_dir) / "train_entities.jsonl").string(), corpus.train_entities);
  save_mentions((fs::path(out_dir) / "eval_mentions.jsonl").string(), corpus.eval_mentions);
  save_entities((fs::path(out_dir) / "eval_entities.jsonl").string(), corpus.eval_entities);
  std::printf("wrote %zu train pairs, %zu eval entities, %zu eval mentions under %s\n",
              corpus.train_mentions.size(), corpus.eval_entities.size(),
              corpus.eval_mentions.size(), out_dir.c_str());
  return 0;
}

int cmd_extract(const std::string& in_path, const std::string& side, const std::string& out_path,
                const std::string& verbs_path, std::size_t max_triplets) {
  const RuleConfig rules = rules_from(verbs_path, max_triplets);
  std::ofstream os(out_path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + out_path);

  std::size_t contexts = 0, units = 0;
  auto emit = [&](const std::string& id, const UnitSet& us) {
    ++contexts;
    for (const auto& u : us.units) {
      json j{{"context_id", id}, {"s_start", u.s_start}, {"s_end", u.s_end},
             {"p_start", u.p_start}, {"p_end", u.p_end}, {"o_start", u.o_start},
             {"o_end", u.o_end}};
      os << j.dump() << '\n';
      ++units;
    }
  };

  if (side == "mention") {
    for (const auto& m : load_mentions(in_path))
      emit(m.id, extract_triplets(mention_raw_tokens(m.context_left, m.mention, m.context_right),
                                  rules));
  } else if (side == "entity") {
    for (const auto& e : load_entities(in_path))
      emit(e.id, extract_triplets(entity_raw_tokens(e.description), rules));
  } else {
    throw std::runtime_error("--side must be mention or entity");
  }
  if (contexts == 0) std::cerr << "warning: " << in_path << " holds no records\n";
  std::printf("extracted %zu units over %zu contexts into %s\n", units, contexts,
              out_path.c_str());
  return 0;
}

int cmd_train(const std::string& mentions_path, const std::string& entities_path,
              const std::string& mention_triplets_path, const std::string& entity_triplets_path,
              const std::string& eval_mentions_path, const std::string& eval_entities_path,
              const std::string& ckpt_path, const std::string& vocab_path,
              const std::string& metrics_path, const std::string& verbs_path,
              const ModelFlags& mf, const TrainFlags& tf) {
  const auto mentions = load_mentions(mentions_path);
  const auto entities = load_entities(entities_path);
  const RuleConfig rules = rules_from(verbs_path, mf.max_triplets);

  std::vector<MentionRecord> eval_mentions;
  std::vector<EntityRecord> eval_entities;
  if (!eval_entities_path.empty()) {
    eval_entities = load_entities(eval_entities_path);
    zero_shot_guard(id_set(entities), id_set(eval_entities));
    if (!eval_mentions_path.empty()) eval_mentions = load_mentions(eval_mentions_path);
  }

  Vocabulary vocab = build_vocabulary(mentions, entities);
  vocab.save(vocab_path);

  Model model = Model::init(model_config(mf, vocab.size()), tf.seed);

  std::map<std::string, UnitSet> mtrip, etrip;
  const std::map<std::string, UnitSet>* mtrip_p = nullptr;
  const std::map<std::string, UnitSet>* etrip_p = nullptr;
  if (!mention_triplets_path.empty()) {
    mtrip = load_triplet_file(mention_triplets_path, mention_context_lengths(mentions));
    mtrip_p = &mtrip;
  }
  if (!entity_triplets_path.empty()) {
    etrip = load_triplet_file(entity_triplets_path, entity_context_lengths(entities));
    etrip_p = &etrip;
  }

  Dataset data = prepare_dataset(mentions, entity_by_id(entities), vocab, model.cfg, rules,
                                 mtrip_p, etrip_p);
  Dataset eval_data;
  const Dataset* eval_p = nullptr;
  if (!eval_mentions.empty()) {
    eval_data = prepare_dataset(eval_mentions, entity_by_id(eval_entities), vocab, model.cfg,
                                rules);
    eval_p = &eval_data;
  }

  std::ofstream metrics;
  std::ostream* metrics_p = nullptr;
  if (!metrics_path.empty()) {
    metrics.open(metrics_path, std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot open " + metrics_path);
    metrics_p = &metrics;
  }

  TrainResult res = train(model, data, train_config(tf), metrics_p, eval_p);
  model.save(ckpt_path);
  std::printf("trained %zu steps, loss %.6f -> %.6f, checkpoint %s\n", res.steps,
              res.initial_loss, res.final_loss, ckpt_path.c_str());
  return 0;
}

int cmd_encode_entities(const std::string& entities_path, const std::string& ckpt_path,
                        const std::string& vocab_path, const std::string& out_path,
                        const std::string& entity_triplets_path, const std::string& verbs_path) {
  const auto entities = load_entities(entities_path);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  Model model = Model::load(ckpt_path);
  const RuleConfig rules = rules_from(verbs_path, model.cfg.max_triplets);

  std::map<std::string, UnitSet> etrip;
  const std::map<std::string, UnitSet>* etrip_p = nullptr;
  if (!entity_triplets_path.empty()) {
    etrip = load_triplet_file(entity_triplets_path, entity_context_lengths(entities));
    etrip_p = &etrip;
  }

  EntityIndex index = build_index(entities, model, vocab, rules,
                                  fingerprint_hex(file_fingerprint(ckpt_path)), etrip_p);
  save_index(out_path, index);
  std::printf("encoded %zu entities (d=%zu) into %s\n", index.size(), index.vectors.cols,
              out_path.c_str());
  return 0;
}

void check_fingerprint(const EntityIndex& index, const std::string& ckpt_path) {
  const std::string fp = fingerprint_hex(file_fingerprint(ckpt_path));
  if (index.checkpoint_fingerprint != fp)
    throw std::runtime_error("index was built from checkpoint " + index.checkpoint_fingerprint +
                             " but " + ckpt_path + " has fingerprint " + fp);
}

int cmd_retrieve(const std::string& mentions_path, const std::string& index_path,
                 const std::string& ckpt_path, const std::string& vocab_path, std::size_t k,
                 const std::string& out_path, const std::string& verbs_path) {
  const auto mentions = load_mentions(mentions_path);
  EntityIndex index = load_index(index_path);
  check_fingerprint(index, ckpt_path);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  Model model = Model::load(ckpt_path);
  const RuleConfig rules = rules_from(verbs_path, model.cfg.max_triplets);

  std::ofstream os(out_path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + out_path);
  for (const auto& m : mentions) {
    RetrievalResult r = retrieve(m, model, vocab, rules, index, k);
    for (std::size_t rank = 0; rank < r.top.size(); ++rank) {
      json j{{"mention_id", m.id},
             {"rank", rank},
             {"entity_id", r.top[rank].id},
             {"score", r.top[rank].score}};
      os << j.dump() << '\n';
    }
  }
  std::printf("retrieved top-%zu for %zu mentions into %s\n", k, mentions.size(),
              out_path.c_str());
  return 0;
}

int cmd_eval(const std::string& mentions_path, const std::string& entities_path,
             const std::string& index_path, const std::string& train_entities_path,
             const std::string& ckpt_path, const std::string& vocab_path,
             std::vector<std::size_t> ks, bool attention_rank,
             std::vector<std::size_t> boundaries, const std::string& verbs_path) {
  const auto mentions = load_mentions(mentions_path);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  Model model = Model::load(ckpt_path);
  const RuleConfig rules = rules_from(verbs_path, model.cfg.max_triplets);

  EntityIndex index;
  if (!index_path.empty()) {
    index = load_index(index_path);
    check_fingerprint(index, ckpt_path);
  } else if (!entities_path.empty()) {
    index = build_index(load_entities(entities_path), model, vocab, rules,
                        fingerprint_hex(file_fingerprint(ckpt_path)));
  } else {
    throw std::runtime_error("eval needs --entities or --index");
  }

  // zero-shot precondition: eval entities must be unseen in training
  const auto train_entities = load_entities(train_entities_path);
  std::set<std::string> eval_ids(index.ids.begin(), index.ids.end());
  zero_shot_guard(id_set(train_entities), eval_ids);

  std::sort(ks.begin(), ks.end());
  const std::size_t kmax = std::min(ks.back(), index.size());

  std::vector<RetrievalResult> results;
  std::map<std::string, std::string> gold;
  for (const auto& m : mentions) {
    results.push_back(retrieve(m, model, vocab, rules, index, kmax));
    gold[m.id] = m.gold_entity_id;
  }
  print_recall(recall_at(results, gold, ks, index), "recall over " +
                                                        std::to_string(mentions.size()) +
                                                        " mentions");

  if (attention_rank) {
    if (boundaries.empty()) {
      const std::size_t q = model.cfg.max_len / 4;
      boundaries = {0, q, 2 * q, 3 * q, model.cfg.max_len};
    }
    AttentionRankTable t = attention_rank_analysis(mentions, model, vocab, rules, index,
                                                   std::min<std::size_t>(kmax, index.size()),
                                                   boundaries);
    std::printf("\nattention rank of best mention token (k=%zu)\n", t.k);
    std::printf("%-12s %8s %8s\n", "bucket", "count", "recall");
    for (const auto& row : t.rows)
      std::printf("[%3zu,%3zu)   %8zu %8.2f\n", row.lo, row.hi, row.count, 100.0 * row.recall);
  }
  return 0;
}

int cmd_ablate(const std::string& mentions_path, const std::string& entities_path,
               const std::string& eval_mentions_path, const std::string& eval_entities_path,
               std::vector<std::size_t> ks, const ModelFlags& mf, const TrainFlags& tf,
               const std::string& verbs_path) {
  const auto mentions = load_mentions(mentions_path);
  const auto entities = load_entities(entities_path);
  const auto eval_mentions = load_mentions(eval_mentions_path);
  const auto eval_entities = load_entities(eval_entities_path);
  zero_shot_guard(id_set(entities), id_set(eval_entities));

  Vocabulary vocab = build_vocabulary(mentions, entities);
  const RuleConfig rules = rules_from(verbs_path, mf.max_triplets);
  std::sort(ks.begin(), ks.end());

  std::map<std::pair<std::string, std::string>, RecallTable> cache;
  auto run_cell = [&](const std::string& mode_m, const std::string& mode_e) -> const RecallTable& {
    const auto key = std::make_pair(mode_m, mode_e);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    ModelFlags cell = mf;
    cell.mode_mention = mode_m;
    cell.mode_entity = mode_e;
    Model model = Model::init(model_config(cell, vocab.size()), tf.seed);
    Dataset data = prepare_dataset(mentions, entity_by_id(entities), vocab, model.cfg, rules);
    train(model, data, train_config(tf));

    EntityIndex index = build_index(eval_entities, model, vocab, rules, "ablate");
    const std::size_t kmax = std::min(ks.back(), index.size());
    std::vector<RetrievalResult> results;
    std::map<std::string, std::string> gold;
    for (const auto& m : eval_mentions) {
      results.push_back(retrieve(m, model, vocab, rules, index, kmax));
      gold[m.id] = m.gold_entity_id;
    }
    return cache.emplace(key, recall_at(results, gold, ks, index)).first->second;
  };

  std::printf("%-34s", "mention x entity encoder");
  for (std::size_t k : ks) std::printf("  R@%-4zu", k);
  std::printf("\n");
  auto row = [&](const std::string& label, const std::string& mm, const std::string& me) {
    const RecallTable& t = run_cell(mm, me);
    std::printf("%-34s", label.c_str());
    for (double r : t.recall) std::printf("  %6.2f", 100.0 * r);
    std::printf("\n");
    std::fflush(stdout);
  };

  // symmetric mode sweep
  for (const char* mode : {"fused", "sentence_only", "graph_only", "node_mean", "flat_gat"})
    row(mode, mode, mode);
  // asymmetric dual-encoder grid
  std::printf("\n");
  row("sentence_only x sentence_only", "sentence_only", "sentence_only");
  row("fused x sentence_only", "fused", "sentence_only");
  row("sentence_only x fused", "sentence_only", "fused");
  row("fused x fused", "fused", "fused");
  return 0;
}

int cmd_inspect_attention(const std::string& mentions_path, const std::string& mention_id,
                          const std::string& ckpt_path, const std::string& vocab_path,
                          const std::string& out_path, const std::string& graph_out_path,
                          const std::string& verbs_path) {
  const auto mentions = load_mentions(mentions_path);
  const MentionRecord* target = nullptr;
  for (const auto& m : mentions)
    if (mention_id.empty() || m.id == mention_id) {
      target = &m;
      break;
    }
  if (!target) throw std::runtime_error("mention id " + mention_id + " not found");

  Vocabulary vocab = Vocabulary::load(vocab_path);
  Model model = Model::load(ckpt_path);
  const RuleConfig rules = rules_from(verbs_path, model.cfg.max_triplets);

  PreparedInput in = prepare_mention(target->context_left, target->mention,
                                     target->context_right, vocab, model.cfg, rules);
  RepresentTrace trace;
  represent_value(model, model.mention, in, model.cfg.mode_mention, &trace);

  std::ofstream os(out_path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + out_path);
  for (const auto& e : trace.hgan_attention) {
    json j{{"layer", e.layer}, {"node_i", e.node_i}, {"node_j", e.node_j}, {"weight", e.weight}};
    os << j.dump() << '\n';
  }

  if (!graph_out_path.empty()) {
    std::ofstream gs(graph_out_path, std::ios::trunc);
    if (!gs) throw std::runtime_error("cannot open " + graph_out_path);
    const char* role_names[] = {"central", "hub", "subject", "predicate", "object"};
    for (std::size_t i = 0; i < trace.graph.nodes.size(); ++i) {
      const GraphNode& n = trace.graph.nodes[i];
      std::string text;
      for (std::size_t p = n.span_start; p < n.span_end; ++p) {
        if (!text.empty()) text += ' ';
        text += vocab.token_of(in.tc.ids[p]);
      }
      json j{{"node", i},
             {"role", role_names[static_cast<int>(n.role)]},
             {"triplet", n.triplet},
             {"span", {n.span_start, n.span_end}},
             {"text", text}};
      gs << j.dump() << '\n';
    }
    for (const auto& [a, b] : trace.graph.edges) {
      json j{{"edge", {a, b}}};
      gs << j.dump() << '\n';
    }
  }
  std::printf("dumped %zu attention entries for mention %s into %s\n",
              trace.hgan_attention.size(), target->id.c_str(), out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-enhanced zero-shot entity retrieval"};
  app.require_subcommand(1);

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Generate a seeded synthetic distractor corpus");
  std::string gen_out = "corpus";
  SynthConfig gen_cfg;
  gen->add_option("--out-dir", gen_out, "Output directory");
  gen->add_option("--train-pairs", gen_cfg.train_pairs, "Training pairs");
  gen->add_option("--eval-entities", gen_cfg.eval_entities, "Disjoint eval entities");
  gen->add_option("--eval-pairs", gen_cfg.eval_pairs, "Eval mentions");
  gen->add_option("--seed", gen_cfg.seed, "Random seed");
  gen->add_option("--barren-fraction", gen_cfg.barren_fraction,
                  "Fraction of contexts without extractable triplets");

  // extract
  auto* ext = app.add_subcommand("extract", "Extract SPO knowledge units from a corpus file");
  std::string ext_in, ext_out, ext_side = "mention", ext_verbs;
  std::size_t ext_max = 16;
  ext->add_option("--in", ext_in, "Input records (jsonl)")->required();
  ext->add_option("--out", ext_out, "Output triplet file (jsonl)")->required();
  ext->add_option("--side", ext_side, "mention|entity");
  ext->add_option("--verbs", ext_verbs, "Verb lexicon file (one stem per line)");
  ext->add_option("--max-triplets", ext_max, "Units kept per context");

  // train
  auto* tr = app.add_subcommand("train", "Train the bi-encoder");
  std::string tr_mentions, tr_entities, tr_mtrip, tr_etrip, tr_eval_m, tr_eval_e;
  std::string tr_ckpt = "checkpoint.bin", tr_vocab = "vocab.txt", tr_metrics, tr_verbs;
  ModelFlags tr_mf;
  TrainFlags tr_tf;
  tr->add_option("--train-mentions", tr_mentions, "Training mentions (jsonl)")->required();
  tr->add_option("--entities", tr_entities, "Training entities (jsonl)")->required();
  tr->add_option("--mention-triplets", tr_mtrip, "Pre-extracted mention triplets");
  tr->add_option("--entity-triplets", tr_etrip, "Pre-extracted entity triplets");
  tr->add_option("--eval-mentions", tr_eval_m, "Validation mentions");
  tr->add_option("--eval-entities", tr_eval_e, "Validation entities (zero-shot checked)");
  tr->add_option("--checkpoint-out", tr_ckpt, "Checkpoint path");
  tr->add_option("--vocab-out", tr_vocab, "Vocabulary path");
  tr->add_option("--metrics-out", tr_metrics, "Metrics log (jsonl)");
  tr->add_option("--verbs", tr_verbs, "Verb lexicon file");
  add_model_flags(tr, tr_mf);
  add_train_flags(tr, tr_tf);

  // encode-entities
  auto* enc = app.add_subcommand("encode-entities", "Encode and cache all entity vectors");
  std::string enc_entities, enc_ckpt, enc_vocab, enc_out = "entities.idx", enc_etrip, enc_verbs;
  enc->add_option("--entities", enc_entities, "Entity records (jsonl)")->required();
  enc->add_option("--checkpoint", enc_ckpt, "Checkpoint path")->required();
  enc->add_option("--vocab", enc_vocab, "Vocabulary path")->required();
  enc->add_option("--out", enc_out, "Index output path");
  enc->add_option("--entity-triplets", enc_etrip, "Pre-extracted entity triplets");
  enc->add_option("--verbs", enc_verbs, "Verb lexicon file");

  // retrieve
  auto* ret = app.add_subcommand("retrieve", "Top-k retrieval against a cached index");
  std::string ret_mentions, ret_index, ret_ckpt, ret_vocab, ret_out = "results.jsonl", ret_verbs;
  std::size_t ret_k = 64;
  ret->add_option("--mentions", ret_mentions, "Mention records (jsonl)")->required();
  ret->add_option("--index", ret_index, "Entity index")->required();
  ret->add_option("--checkpoint", ret_ckpt, "Checkpoint path")->required();
  ret->add_option("--vocab", ret_vocab, "Vocabulary path")->required();
  ret->add_option("--k", ret_k, "Candidates per mention");
  ret->add_option("--out", ret_out, "Results output (jsonl)");
  ret->add_option("--verbs", ret_verbs, "Verb lexicon file");

  // eval
  auto* ev = app.add_subcommand("eval", "Recall@k evaluation (zero-shot guarded)");
  std::string ev_mentions, ev_entities, ev_index, ev_train_entities, ev_ckpt, ev_vocab, ev_verbs;
  std::vector<std::size_t> ev_ks = {1, 8, 32, 64};
  std::vector<std::size_t> ev_bounds;
  bool ev_attn = false;
  ev->add_option("--mentions", ev_mentions, "Eval mentions (jsonl)")->required();
  ev->add_option("--entities", ev_entities, "Eval entities (jsonl), encoded on the fly");
  ev->add_option("--index", ev_index, "Pre-built entity index");
  ev->add_option("--train-entities", ev_train_entities, "Training entities for the guard")
      ->required();
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint path")->required();
  ev->add_option("--vocab", ev_vocab, "Vocabulary path")->required();
  ev->add_option("--k-list", ev_ks, "Recall cutoffs")->delimiter(',');
  ev->add_flag("--attention-rank", ev_attn, "Group mentions by [CLS]-attention rank");
  ev->add_option("--boundaries", ev_bounds, "Attention-rank bucket boundaries")->delimiter(',');
  ev->add_option("--verbs", ev_verbs, "Verb lexicon file");

  // ablate
  auto* ab = app.add_subcommand("ablate", "Train and evaluate the encoder-mode grid");
  std::string ab_mentions, ab_entities, ab_eval_m, ab_eval_e, ab_verbs;
  std::vector<std::size_t> ab_ks = {1, 8, 32, 64};
  ModelFlags ab_mf;
  TrainFlags ab_tf;
  ab->add_option("--train-mentions", ab_mentions, "Training mentions")->required();
  ab->add_option("--entities", ab_entities, "Training entities")->required();
  ab->add_option("--eval-mentions", ab_eval_m, "Eval mentions")->required();
  ab->add_option("--eval-entities", ab_eval_e, "Eval entities")->required();
  ab->add_option("--k-list", ab_ks, "Recall cutoffs")->delimiter(',');
  ab->add_option("--verbs", ab_verbs, "Verb lexicon file");
  add_model_flags(ab, ab_mf);
  add_train_flags(ab, ab_tf);

  // inspect-attention
  auto* ia = app.add_subcommand("inspect-attention", "Dump per-layer graph attention");
  std::string ia_mentions, ia_id, ia_ckpt, ia_vocab, ia_out = "attention.jsonl", ia_graph,
              ia_verbs;
  ia->add_option("--mentions", ia_mentions, "Mention records (jsonl)")->required();
  ia->add_option("--mention-id", ia_id, "Mention to inspect (first record when omitted)");
  ia->add_option("--checkpoint", ia_ckpt, "Checkpoint path")->required();
  ia->add_option("--vocab", ia_vocab, "Vocabulary path")->required();
  ia->add_option("--out", ia_out, "Attention dump (jsonl)");
  ia->add_option("--graph-out", ia_graph, "Node/edge dump (jsonl)");
  ia->add_option("--verbs", ia_verbs, "Verb lexicon file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_corpus(gen_out, gen_cfg);
    if (ext->parsed()) return cmd_extract(ext_in, ext_side, ext_out, ext_verbs, ext_max);
    if (tr->parsed())
      return cmd_train(tr_mentions, tr_entities, tr_mtrip, tr_etrip, tr_eval_m, tr_eval_e,
                       tr_ckpt, tr_vocab, tr_metrics, tr_verbs, tr_mf, tr_tf);
    if (enc->parsed())
      return cmd_encode_entities(enc_entities, enc_ckpt, enc_vocab, enc_out, enc_etrip,
                                 enc_verbs);
    if (ret->parsed())
      return cmd_retrieve(ret_mentions, ret_index, ret_ckpt, ret_vocab, ret_k, ret_out,
                          ret_verbs);
    if (ev->parsed())
      return cmd_eval(ev_mentions, ev_entities, ev_index, ev_train_entities, ev_ckpt, ev_vocab,
                      ev_ks, ev_attn, ev_bounds, ev_verbs);
    if (ab->parsed())
      return cmd_ablate(ab_mentions, ab_entities, ab_eval_m, ab_eval_e, ab_ks, ab_mf, ab_tf,
                        ab_verbs);
    if (ia->parsed())
      return cmd_inspect_attention(ia_mentions, ia_id, ia_ckpt, ia_vocab, ia_out, ia_graph,
                                   ia_verbs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
