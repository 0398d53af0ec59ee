#pragma once

#include "ger/tokenize.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ger {

// Subject / predicate / object spans, end-exclusive, over the raw
// (pre-special-token) context tokens. Spans are non-empty and mutually
// disjoint.
struct KnowledgeUnit {
  std::size_t s_start{0}, s_end{0};
  std::size_t p_start{0}, p_end{0};
  std::size_t o_start{0}, o_end{0};

  bool operator==(const KnowledgeUnit&) const = default;
  bool valid(std::size_t context_len) const;
};

struct UnitSet {
  std::string context_id;
  std::vector<KnowledgeUnit> units;  // sorted by (s_start, p_start, o_start)
};

// Verb-centered rule grammar. A token is a verb when it is a lexicon stem or
// an -s/-ed/-ing inflection of one. Predicates are maximal verb groups;
// subjects come from the noun-chunk coordination chain immediately left of
// the group (one unit per coordinated chunk); the object is the nearest
// chunk to the right. Clauses split on punctuation, and on coordinating
// conjunctions only when a verb group sits on both sides.
struct RuleConfig {
  std::set<std::string> verb_lexicon;
  std::size_t max_triplets{16};

  static RuleConfig defaults();
  static std::set<std::string> load_verb_lexicon(const std::string& path);
};

bool is_verb_token(const std::string& token, const RuleConfig& rules);

UnitSet extract_triplets(const std::vector<std::string>& tokens, const RuleConfig& rules);

// --- pre-extracted triplet ingestion -----------------------------------------

struct TripletLoadResult {
  std::map<std::string, UnitSet> units;
  std::vector<std::string> diagnostics;  // "<path>:<row>: <reason>" for rejected rows
  std::size_t duplicates_dropped{0};
};

// Line-delimited JSON rows {context_id, s_start, s_end, p_start, p_end,
// o_start, o_end}; token-index coordinates over the raw context,
// end-exclusive. Rows that fail validation are rejected with row-numbered
// diagnostics; duplicates are dropped with a note. context_len maps known
// context ids to their raw token counts.
TripletLoadResult load_triplets(const std::string& path,
                                const std::map<std::string, std::size_t>& context_len);

// --- alignment into encoder coordinates --------------------------------------

// Re-indexes a raw-context unit into TokenizedContext positions. Spans lost
// to truncation are clipped; if any of the three spans empties (or is split
// by a marker, in which case the longest contiguous piece is kept), the unit
// is dropped.
std::optional<KnowledgeUnit> align_span_unit(const KnowledgeUnit& unit,
                                             const TokenizedContext& tc);

UnitSet align_units(const UnitSet& raw_units, const TokenizedContext& tc);

}  // namespace ger
