#pragma once

#include "ger/records.hpp"

#include <cstdint>
#include <vector>

namespace ger {

// Seeded generator for distractor-style corpora. Entities are (adjective,
// noun) pairs; mention contexts repeat salient distractor words drawn from a
// *confusable* entity's profile, so a bag-of-context sentence embedding is
// pulled toward the wrong entity while the mention tokens pinpoint the right
// one. Train and eval entity sets use disjoint (adjective, noun) combinations
// (and id spaces), but every token type occurs in the train split.
struct SynthConfig {
  std::size_t train_pairs{600};
  std::size_t eval_entities{220};
  std::size_t eval_pairs{220};  // <= eval_entities, one mention per entity
  std::uint64_t seed{7};
  double barren_fraction{0.04};  // contexts with no extractable triplets
};

struct SynthCorpus {
  std::vector<MentionRecord> train_mentions;
  std::vector<EntityRecord> train_entities;
  std::vector<MentionRecord> eval_mentions;
  std::vector<EntityRecord> eval_entities;
};

SynthCorpus generate_corpus(const SynthConfig& cfg);

}  // namespace ger
