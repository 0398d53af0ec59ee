#include "ger/eval.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ger {

RecallTable recall_at(const std::vector<RetrievalResult>& results,
                      const std::map<std::string, std::string>& gold,
                      const std::vector<std::size_t>& ks, const EntityIndex& index) {
  if (results.empty()) throw std::invalid_argument("recall_at: empty mention set");
  if (ks.empty()) throw std::invalid_argument("recall_at: empty k list");

  for (const auto& r : results) {
    auto it = gold.find(r.mention_id);
    if (it == gold.end())
      throw std::invalid_argument("recall_at: no gold entity for mention " + r.mention_id);
    if (index.row_of(it->second) < 0)
      throw std::invalid_argument("recall_at: gold entity " + it->second + " for mention " +
                                  r.mention_id + " is missing from the index");
  }

  RecallTable table;
  table.ks = ks;
  table.mentions = results.size();
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (const auto& r : results) {
      const std::string& g = gold.at(r.mention_id);
      const std::size_t limit = std::min(k, r.top.size());
      for (std::size_t i = 0; i < limit; ++i) {
        if (r.top[i].id == g) {
          ++hits;
          break;
        }
      }
    }
    table.recall.push_back(static_cast<double>(hits) / static_cast<double>(results.size()));
  }
  return table;
}

void zero_shot_guard(const std::set<std::string>& train_entity_ids,
                     const std::set<std::string>& eval_entity_ids) {
  if (eval_entity_ids.empty())
    throw std::invalid_argument("zero_shot_guard: eval entity set is empty");
  std::vector<std::string> overlap;
  std::set_intersection(train_entity_ids.begin(), train_entity_ids.end(),
                        eval_entity_ids.begin(), eval_entity_ids.end(),
                        std::back_inserter(overlap));
  if (!overlap.empty()) {
    std::string msg = "zero_shot_guard: train and eval entities overlap:";
    for (const auto& id : overlap) msg += " " + id;
    throw std::runtime_error(msg);
  }
}

std::size_t mention_attention_rank(const std::vector<double>& cls_attention,
                                   std::size_t span_start, std::size_t span_end) {
  const std::size_t L = cls_attention.size();
  if (span_start >= span_end || span_end > L)
    throw std::invalid_argument("mention_attention_rank: bad span");
  std::vector<std::size_t> order(L);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cls_attention[a] > cls_attention[b];
  });
  for (std::size_t rank = 0; rank < L; ++rank) {
    if (order[rank] >= span_start && order[rank] < span_end) return rank;
  }
  return L;  // unreachable: the span is non-empty
}

AttentionRankTable attention_rank_analysis(const std::vector<MentionRecord>& mentions,
                                           Model& model, const Vocabulary& vocab,
                                           const RuleConfig& rules, const EntityIndex& index,
                                           std::size_t k,
                                           const std::vector<std::size_t>& boundaries) {
  if (mentions.empty()) throw std::invalid_argument("attention_rank_analysis: empty mention set");
  if (boundaries.size() < 2 || boundaries.front() != 0)
    throw std::invalid_argument("attention_rank_analysis: boundaries must start at 0");
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (boundaries[i] <= boundaries[i - 1])
      throw std::invalid_argument("attention_rank_analysis: boundaries must increase");
  if (boundaries.back() < model.cfg.max_len)
    throw std::invalid_argument("attention_rank_analysis: boundaries do not cover max_len " +
                                std::to_string(model.cfg.max_len));

  AttentionRankTable table;
  table.k = k;
  for (std::size_t b = 0; b + 1 < boundaries.size(); ++b)
    table.rows.push_back({boundaries[b], boundaries[b + 1], 0, 0.0});
  std::vector<std::size_t> hits(table.rows.size(), 0);

  for (const auto& m : mentions) {
    PreparedInput in = prepare_mention(m.context_left, m.mention, m.context_right, vocab,
                                       model.cfg, rules);
    RepresentTrace trace;
    const ad::Tensor v =
        represent_value(model, model.mention, in, model.cfg.mode_mention, &trace);
    const std::size_t rank =
        mention_attention_rank(trace.cls_attention, in.tc.span_start, in.tc.span_end);

    std::size_t bucket = table.rows.size() - 1;
    for (std::size_t b = 0; b < table.rows.size(); ++b) {
      if (rank >= table.rows[b].lo && rank < table.rows[b].hi) {
        bucket = b;
        break;
      }
    }
    table.rows[bucket].count += 1;

    RetrievalResult r = retrieve_vector(m.id, v, index, std::min(k, index.size()));
    for (const auto& se : r.top) {
      if (se.id == m.gold_entity_id) {
        hits[bucket] += 1;
        break;
      }
    }
  }

  for (std::size_t b = 0; b < table.rows.size(); ++b) {
    if (table.rows[b].count > 0)
      table.rows[b].recall =
          static_cast<double>(hits[b]) / static_cast<double>(table.rows[b].count);
  }
  return table;
}

}  // namespace ger
