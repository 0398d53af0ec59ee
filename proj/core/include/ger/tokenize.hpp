#pragma once

#include "ger/vocab.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace ger {

enum class ContextKind { Mention, Entity };

// One encoder input. For mentions the layout is
//   [CLS] c_l [MS] m [ME] c_r        with span = the mention tokens,
// for entities
//   [CLS] title [ENT] description    with span = the title tokens.
// raw_to_pos maps raw-context token indices (mention side: left+mention+right
// concatenated; entity side: description only) to positions in `ids`, with -1
// for tokens lost to truncation. Knowledge-unit spans are re-indexed through
// this map.
struct TokenizedContext {
  ContextKind kind{ContextKind::Mention};
  std::vector<int> ids;
  std::size_t span_start{0};
  std::size_t span_end{0};
  std::vector<long> raw_to_pos;

  std::size_t length() const { return ids.size(); }
};

// Over-length inputs keep the mention and its markers and truncate context
// symmetrically, dropping the tokens farthest from the mention.
TokenizedContext tokenize_mention(const std::string& context_left, const std::string& mention,
                                  const std::string& context_right, const Vocabulary& vocab,
                                  std::size_t max_len);

// Over-length descriptions are truncated from the tail; the title is kept
// whole.
TokenizedContext tokenize_entity(const std::string& title, const std::string& description,
                                 const Vocabulary& vocab, std::size_t max_len);

// Raw token sequences as seen by the triplet extractor (and indexed by
// raw_to_pos).
std::vector<std::string> mention_raw_tokens(const std::string& context_left,
                                            const std::string& mention,
                                            const std::string& context_right);
std::vector<std::string> entity_raw_tokens(const std::string& description);

}  // namespace ger
