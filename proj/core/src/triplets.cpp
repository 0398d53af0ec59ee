#include "ger/triplets.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace ger {

namespace {

using json = nlohmann::json;

const std::set<std::string>& coordinators() {
  static const std::set<std::string> s = {"and", "or", "but", "nor", "yet", "so"};
  return s;
}

const std::set<std::string>& chunk_breakers() {
  static const std::set<std::string> s = {
      "of",    "in",    "on",      "at",    "to",      "from",    "with",  "by",
      "for",   "about", "into",    "onto",  "over",    "under",   "through",
      "between", "during", "before", "after", "above", "below",   "near",
      "within", "without", "across", "along", "around", "behind", "beyond", "via",
      "that",  "which", "who",     "whom",  "whose",   "when",    "where", "while",
      "because", "if",  "although", "though", "since", "until",   "unless", "as"};
  return s;
}

const std::set<std::string>& determiners() {
  static const std::set<std::string> s = {"the",  "a",     "an",   "this", "these", "those",
                                          "his",  "her",   "its",  "their", "my",   "our",
                                          "your", "some",  "any",  "each", "every", "no",
                                          "both", "few",   "many", "most", "other", "several",
                                          "such"};
  return s;
}

// adverbs allowed inside a verb group ("has not boarded")
const std::set<std::string>& group_transparent() {
  static const std::set<std::string> s = {"not",    "never", "also",   "still",
                                          "just",   "often", "always", "already"};
  return s;
}

bool is_punct_token(const std::string& t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) {
    return std::ispunct(static_cast<unsigned char>(c));
  });
}

struct Chunk {
  std::size_t start, end;  // token interval
};

struct VerbGroup {
  std::size_t start, end;
};

}  // namespace

bool KnowledgeUnit::valid(std::size_t context_len) const {
  auto ok = [context_len](std::size_t a, std::size_t b) { return a < b && b <= context_len; };
  if (!ok(s_start, s_end) || !ok(p_start, p_end) || !ok(o_start, o_end)) return false;
  auto overlap = [](std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
    return a0 < b1 && b0 < a1;
  };
  return !overlap(s_start, s_end, p_start, p_end) && !overlap(s_start, s_end, o_start, o_end) &&
         !overlap(p_start, p_end, o_start, o_end);
}

RuleConfig RuleConfig::defaults() {
  RuleConfig rc;
  rc.verb_lexicon = {
      // auxiliaries and copulas
      "is", "are", "was", "were", "be", "been", "being", "am",
      "has", "have", "had", "do", "does", "did",
      "will", "would", "can", "could", "may", "might", "shall", "should", "must",
      "become", "becomes", "became", "seem", "seems",
      // common verbs
      "say", "see", "make", "take", "use", "find", "give", "tell", "work", "call",
      "move", "live", "hold", "keep", "turn", "follow", "show", "run", "bring",
      "begin", "grow", "open", "walk", "win", "teach", "sit", "stand", "lose",
      "pay", "meet", "include", "continue", "set", "learn", "lead", "watch",
      "reach", "serve", "protect", "attack", "defend", "start", "stop", "leave",
      "send", "receive", "contain", "remain", "travel", "arrive", "depart",
      // domain verbs used by the bundled corpus generator
      "board", "carry", "launch", "orbit", "build", "create", "power", "guard",
      "pilot", "repair", "explore", "discover", "transport", "signal", "dock",
      "land", "escort", "supply", "command", "navigate", "haul", "patrol",
      "chart", "survey", "mine", "trade", "ferry", "shelter", "store", "track",
      "warm", "cool", "feed", "drift", "anchor", "beam", "forge", "seal",
  };
  return rc;
}

std::set<std::string> RuleConfig::load_verb_lexicon(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_verb_lexicon: cannot open " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

bool is_verb_token(const std::string& w, const RuleConfig& rules) {
  const auto& lex = rules.verb_lexicon;
  auto in = [&lex](const std::string& s) { return lex.count(s) != 0; };
  if (in(w)) return true;
  const std::size_t n = w.size();
  auto undoubled = [&](const std::string& stem) {
    return stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
           in(stem.substr(0, stem.size() - 1));
  };
  if (n > 3 && w.ends_with("ies") && in(w.substr(0, n - 3) + "y")) return true;
  if (n > 2 && w.ends_with("es") && in(w.substr(0, n - 2))) return true;
  if (n > 1 && w.ends_with("s") && in(w.substr(0, n - 1))) return true;
  if (n > 3 && w.ends_with("ied") && in(w.substr(0, n - 3) + "y")) return true;
  if (n > 2 && w.ends_with("ed")) {
    const std::string stem = w.substr(0, n - 2);
    if (in(stem) || in(stem + "e") || undoubled(stem)) return true;
  }
  if (n > 3 && w.ends_with("ing")) {
    const std::string stem = w.substr(0, n - 3);
    if (in(stem) || in(stem + "e") || undoubled(stem)) return true;
  }
  return false;
}

UnitSet extract_triplets(const std::vector<std::string>& tokens, const RuleConfig& rules) {
  UnitSet result;
  const std::size_t n = tokens.size();
  if (n < 3) return result;

  enum class Cls { Verb, Conj, Breaker, Transparent, Punct, Det, Content };
  std::vector<Cls> cls(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& t = tokens[i];
    if (is_punct_token(t)) cls[i] = Cls::Punct;
    else if (is_verb_token(t, rules)) cls[i] = Cls::Verb;
    else if (coordinators().count(t)) cls[i] = Cls::Conj;
    else if (chunk_breakers().count(t)) cls[i] = Cls::Breaker;
    else if (group_transparent().count(t)) cls[i] = Cls::Transparent;
    else if (determiners().count(t)) cls[i] = Cls::Det;
    else cls[i] = Cls::Content;
  }

  std::vector<KnowledgeUnit> collected;

  // segments between punctuation
  std::size_t seg_start = 0;
  for (std::size_t pos = 0; pos <= n; ++pos) {
    if (pos < n && cls[pos] != Cls::Punct) continue;
    const std::size_t seg_end = pos;
    if (seg_end > seg_start) {
      // verb groups: maximal verb/transparent runs trimmed to verb endpoints
      std::vector<VerbGroup> groups;
      std::size_t i = seg_start;
      while (i < seg_end) {
        if (cls[i] != Cls::Verb) { ++i; continue; }
        std::size_t j = i;
        std::size_t last_verb = i;
        while (j < seg_end && (cls[j] == Cls::Verb || cls[j] == Cls::Transparent)) {
          if (cls[j] == Cls::Verb) last_verb = j;
          ++j;
        }
        groups.push_back({i, last_verb + 1});
        i = j;
      }

      // clause boundaries: coordinators lying strictly between two verb groups
      std::vector<std::size_t> bounds = {seg_start};
      for (std::size_t gi = 0; gi + 1 < groups.size(); ++gi) {
        for (std::size_t k = groups[gi].end; k < groups[gi + 1].start; ++k) {
          if (cls[k] == Cls::Conj) {
            bounds.push_back(k);
            break;
          }
        }
      }
      bounds.push_back(seg_end);

      for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
        const std::size_t cl_start = bounds[b] == seg_start ? seg_start : bounds[b] + 1;
        const std::size_t cl_end = bounds[b + 1];
        if (cl_start >= cl_end) continue;

        // noun chunks in this clause: runs of Det/Content with >=1 Content
        std::vector<Chunk> chunks;
        std::size_t c = cl_start;
        while (c < cl_end) {
          if (cls[c] != Cls::Det && cls[c] != Cls::Content) { ++c; continue; }
          std::size_t d = c;
          bool has_content = false;
          while (d < cl_end && (cls[d] == Cls::Det || cls[d] == Cls::Content)) {
            has_content |= cls[d] == Cls::Content;
            ++d;
          }
          if (has_content) chunks.push_back({c, d});
          c = d;
        }

        for (const VerbGroup& vg : groups) {
          if (vg.start < cl_start || vg.end > cl_end) continue;

          // nearest chunk fully left of the predicate
          long subj_idx = -1;
          for (std::size_t ci = 0; ci < chunks.size(); ++ci)
            if (chunks[ci].end <= vg.start) subj_idx = static_cast<long>(ci);
          // nearest chunk right of the predicate
          long obj_idx = -1;
          for (std::size_t ci = chunks.size(); ci-- > 0;)
            if (chunks[ci].start >= vg.end) obj_idx = static_cast<long>(ci);
          if (subj_idx < 0 || obj_idx < 0 || subj_idx == obj_idx) continue;

          // coordination chain: extend left while the gap holds only
          // coordinators
          std::vector<std::size_t> subjects = {static_cast<std::size_t>(subj_idx)};
          for (std::size_t ci = static_cast<std::size_t>(subj_idx); ci-- > 0;) {
            bool only_conj = true;
            bool saw_conj = false;
            for (std::size_t k = chunks[ci].end; k < chunks[ci + 1].start; ++k) {
              if (cls[k] == Cls::Conj) saw_conj = true;
              else { only_conj = false; break; }
            }
            if (!only_conj || !saw_conj) break;
            subjects.push_back(ci);
          }

          for (std::size_t ci : subjects) {
            KnowledgeUnit u;
            u.s_start = chunks[ci].start;
            u.s_end = chunks[ci].end;
            u.p_start = vg.start;
            u.p_end = vg.end;
            u.o_start = chunks[static_cast<std::size_t>(obj_idx)].start;
            u.o_end = chunks[static_cast<std::size_t>(obj_idx)].end;
            if (u.valid(n)) collected.push_back(u);
          }
        }
      }
    }
    seg_start = pos + 1;
  }

  std::sort(collected.begin(), collected.end(), [](const KnowledgeUnit& a, const KnowledgeUnit& b) {
    return std::tie(a.s_start, a.p_start, a.o_start) < std::tie(b.s_start, b.p_start, b.o_start);
  });
  collected.erase(std::unique(collected.begin(), collected.end()), collected.end());
  if (collected.size() > rules.max_triplets) collected.resize(rules.max_triplets);
  result.units = std::move(collected);
  return result;
}

TripletLoadResult load_triplets(const std::string& path,
                                const std::map<std::string, std::size_t>& context_len) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_triplets: cannot open " + path);

  TripletLoadResult res;
  std::string line;
  std::size_t row = 0;
  auto reject = [&](const std::string& why) {
    res.diagnostics.push_back(path + ":" + std::to_string(row) + ": " + why);
  };

  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      reject("parse error");
      continue;
    }
    const char* fields[] = {"context_id", "s_start", "s_end", "p_start",
                            "p_end",      "o_start", "o_end"};
    bool missing = false;
    for (const char* f : fields)
      if (!j.contains(f)) { reject(std::string("missing field ") + f); missing = true; break; }
    if (missing) continue;
    if (!j["context_id"].is_string()) { reject("context_id must be a string"); continue; }

    const std::string cid = j["context_id"].get<std::string>();
    auto len_it = context_len.find(cid);
    if (len_it == context_len.end()) { reject("unknown context id " + cid); continue; }

    KnowledgeUnit u;
    try {
      u.s_start = j["s_start"].get<std::size_t>();
      u.s_end = j["s_end"].get<std::size_t>();
      u.p_start = j["p_start"].get<std::size_t>();
      u.p_end = j["p_end"].get<std::size_t>();
      u.o_start = j["o_start"].get<std::size_t>();
      u.o_end = j["o_end"].get<std::size_t>();
    } catch (const json::exception&) {
      reject("span fields must be non-negative integers");
      continue;
    }

    auto nonempty = [](std::size_t a, std::size_t b) { return a < b; };
    if (!nonempty(u.s_start, u.s_end) || !nonempty(u.p_start, u.p_end) ||
        !nonempty(u.o_start, u.o_end)) {
      reject("empty span");
      continue;
    }
    if (u.s_end > len_it->second || u.p_end > len_it->second || u.o_end > len_it->second) {
      reject("span out of bounds for context of length " + std::to_string(len_it->second));
      continue;
    }
    if (!u.valid(len_it->second)) {
      reject("overlapping spans");
      continue;
    }

    auto& us = res.units[cid];
    us.context_id = cid;
    if (std::find(us.units.begin(), us.units.end(), u) != us.units.end()) {
      ++res.duplicates_dropped;
      res.diagnostics.push_back(path + ":" + std::to_string(row) + ": duplicate unit dropped");
      continue;
    }
    us.units.push_back(u);
  }

  for (auto& [cid, us] : res.units) {
    std::sort(us.units.begin(), us.units.end(),
              [](const KnowledgeUnit& a, const KnowledgeUnit& b) {
                return std::tie(a.s_start, a.p_start, a.o_start) <
                       std::tie(b.s_start, b.p_start, b.o_start);
              });
  }
  return res;
}

std::optional<KnowledgeUnit> align_span_unit(const KnowledgeUnit& unit,
                                             const TokenizedContext& tc) {
  auto map_span = [&tc](std::size_t a, std::size_t b) -> std::optional<std::pair<std::size_t, std::size_t>> {
    // collect surviving positions; keep the longest contiguous run (leftmost
    // on ties) so spans never straddle inserted markers
    std::pair<std::size_t, std::size_t> best{0, 0};
    std::size_t run_start = 0;
    long prev = -2;
    std::size_t run_len = 0;
    for (std::size_t i = a; i < b && i < tc.raw_to_pos.size(); ++i) {
      const long p = tc.raw_to_pos[i];
      if (p < 0) { run_len = 0; prev = -2; continue; }
      if (run_len > 0 && p == prev + 1) {
        ++run_len;
      } else {
        run_len = 1;
        run_start = static_cast<std::size_t>(p);
      }
      prev = p;
      if (run_len > best.second - best.first) best = {run_start, run_start + run_len};
    }
    if (best.second == best.first) return std::nullopt;
    return best;
  };

  auto s = map_span(unit.s_start, unit.s_end);
  auto p = map_span(unit.p_start, unit.p_end);
  auto o = map_span(unit.o_start, unit.o_end);
  if (!s || !p || !o) return std::nullopt;
  KnowledgeUnit out;
  out.s_start = s->first; out.s_end = s->second;
  out.p_start = p->first; out.p_end = p->second;
  out.o_start = o->first; out.o_end = o->second;
  if (!out.valid(tc.length())) return std::nullopt;
  return out;
}

UnitSet align_units(const UnitSet& raw_units, const TokenizedContext& tc) {
  UnitSet out;
  out.context_id = raw_units.context_id;
  for (const KnowledgeUnit& u : raw_units.units) {
    if (auto a = align_span_unit(u, tc)) out.units.push_back(*a);
  }
  std::sort(out.units.begin(), out.units.end(),
            [](const KnowledgeUnit& a, const KnowledgeUnit& b) {
              return std::tie(a.s_start, a.p_start, a.o_start) <
                     std::tie(b.s_start, b.p_start, b.o_start);
            });
  out.units.erase(std::unique(out.units.begin(), out.units.end()), out.units.end());
  return out;
}

}  // namespace ger
