#pragma once

#include "ger/index.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace ger {

struct RecallTable {
  std::vector<std::size_t> ks;
  std::vector<double> recall;  // aligned with ks, non-decreasing
  std::size_t mentions{0};
};

// Fraction of mentions whose gold entity appears in the top k, per k. Every
// gold id must be present in the index (zero-shot target KB); the mention set
// must be non-empty.
RecallTable recall_at(const std::vector<RetrievalResult>& results,
                      const std::map<std::string, std::string>& gold,
                      const std::vector<std::size_t>& ks, const EntityIndex& index);

// Passes iff the train and eval entity id sets are disjoint and the eval set
// is non-empty; throws naming the offending ids otherwise.
void zero_shot_guard(const std::set<std::string>& train_entity_ids,
                     const std::set<std::string>& eval_entity_ids);

// --- encoder-attention rank grouping -----------------------------------------

struct AttentionRankRow {
  std::size_t lo{0}, hi{0};  // rank bucket [lo, hi)
  std::size_t count{0};
  double recall{0.0};  // recall@k within the bucket
};

struct AttentionRankTable {
  std::vector<AttentionRankRow> rows;
  std::size_t k{0};
};

// Ranks every input position of a mention by the final-block head-averaged
// attention it receives from position 0 (rank 0 = highest; ties broken by
// position). Each sample lands in the bucket of its best (lowest) ranked
// mention token. boundaries = bucket starts plus final end, must cover
// [0, max_len).
AttentionRankTable attention_rank_analysis(const std::vector<MentionRecord>& mentions,
                                           Model& model, const Vocabulary& vocab,
                                           const RuleConfig& rules, const EntityIndex& index,
                                           std::size_t k,
                                           const std::vector<std::size_t>& boundaries);

// Best mention-token attention rank for one mention (helper shared with the
// table builder; exposed for tests).
std::size_t mention_attention_rank(const std::vector<double>& cls_attention,
                                   std::size_t span_start, std::size_t span_end);

}  // namespace ger
