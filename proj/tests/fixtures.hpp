#pragma once

#include "ger/model.hpp"
#include "ger/records.hpp"
#include "ger/synth.hpp"
#include "ger/train.hpp"

namespace ger::test {

struct TinyWorld {
  SynthCorpus corpus;
  Vocabulary vocab;
  RuleConfig rules = RuleConfig::defaults();
  Model model;
  Dataset train_data;
  Dataset eval_data;
};

inline ModelConfig tiny_config(std::size_t vocab_size) {
  ModelConfig cfg;
  cfg.dim = 16;
  cfg.max_len = 64;
  cfg.enc_blocks = 1;
  cfg.enc_heads = 2;
  cfg.enc_ff_mult = 2;
  cfg.hgan_layers = 2;
  cfg.hgan_heads = 2;
  cfg.vocab_size = vocab_size;
  return cfg;
}

inline TinyWorld make_tiny_world(std::size_t train_pairs = 24, std::size_t eval_entities = 12,
                                 std::uint64_t seed = 42) {
  TinyWorld w;
  SynthConfig sc;
  sc.train_pairs = train_pairs;
  sc.eval_entities = eval_entities;
  sc.eval_pairs = eval_entities;
  sc.seed = seed;
  w.corpus = generate_corpus(sc);
  w.vocab = build_vocabulary(w.corpus.train_mentions, w.corpus.train_entities);
  w.model = Model::init(tiny_config(w.vocab.size()), seed);
  w.train_data = prepare_dataset(w.corpus.train_mentions, entity_by_id(w.corpus.train_entities),
                                 w.vocab, w.model.cfg, w.rules);
  w.eval_data = prepare_dataset(w.corpus.eval_mentions, entity_by_id(w.corpus.eval_entities),
                                w.vocab, w.model.cfg, w.rules);
  return w;
}

}  // namespace ger::test
