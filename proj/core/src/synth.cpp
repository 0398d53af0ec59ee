#include "ger/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

namespace ger {

namespace {

const std::vector<std::string>& adjectives() {
  static const std::vector<std::string> v = {
      "crimson", "silent",  "ancient", "gilded",  "rusty",   "frozen",  "lunar",   "solar",
      "amber",   "cobalt",  "ivory",   "obsidian", "scarlet", "emerald", "violet", "golden",
      "silver",  "copper",  "iron",    "crystal", "shadowed", "bright",  "pale",   "dusky",
      "stellar", "cosmic",  "arctic",  "coastal", "dusty",   "alpine",  "verdant", "misty",
      "stormy",  "quiet",   "distant", "hollow",  "sacred",  "woven",   "marble",  "thorned"};
  return v;
}

const std::vector<std::string>& nouns() {
  static const std::vector<std::string> v = {
      "freighter",  "cruiser",  "outpost",   "garden",   "archive",   "citadel",  "harbor",
      "foundry",    "caravan",  "tower",     "vault",    "temple",    "bazaar",   "bridge",
      "canal",      "orchard",  "quarry",    "lighthouse", "terminal", "refinery", "monastery",
      "workshop",   "granary",  "fortress",  "library",  "windmill",  "aqueduct", "sanctum",
      "depot",      "atrium",   "spire",     "causeway", "bastion",   "arbor",    "grotto",
      "pavilion",   "obelisk",  "reservoir", "colonnade", "gatehouse"};
  return v;
}

const std::vector<std::string>& distractors() {
  static const std::vector<std::string> v = {"creators", "engineers", "pilgrims", "merchants",
                                             "wanderers", "settlers", "scholars", "nomads",
                                             "heralds",   "wardens",  "smiths",   "weavers"};
  return v;
}

const std::vector<std::string>& fillers() {
  static const std::vector<std::string> v = {"relay",   "cargo",  "lantern", "compass",
                                             "ledger",  "anthem", "mosaic",  "banner",
                                             "chalice", "crucible", "atlas", "prism",
                                             "pylon",   "circlet", "scroll", "idol"};
  return v;
}

const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v = {"board", "guard",  "supply", "escort", "power",
                                             "orbit", "repair", "patrol", "haul",   "ferry",
                                             "shelter", "store"};
  return v;
}

std::string third_person(const std::string& verb) {
  const std::size_t n = verb.size();
  auto ends = [&](const char* s) { return verb.ends_with(s); };
  if (n >= 2 && verb[n - 1] == 'y' && std::string("aeiou").find(verb[n - 2]) == std::string::npos)
    return verb.substr(0, n - 1) + "ies";
  if (ends("s") || ends("x") || ends("z") || ends("ch") || ends("sh")) return verb + "es";
  return verb + "s";
}

struct Combo {
  std::size_t adj, noun;
};

struct Pools {
  std::mt19937_64 rng;
  std::size_t forced{0};  // while positive, draw round-robin to force coverage

  explicit Pools(std::uint64_t seed, std::size_t forced_count)
      : rng(seed), forced(forced_count) {}

  template <typename T>
  const T& pick(const std::vector<T>& pool, std::size_t slot_salt) {
    if (forced > 0) {
      return pool[(forced + slot_salt) % pool.size()];
    }
    return pool[rng() % pool.size()];
  }
};

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& cfg) {
  const std::size_t n_adj = adjectives().size();
  const std::size_t n_noun = nouns().size();
  if (cfg.train_pairs + cfg.eval_entities > n_adj * n_noun)
    throw std::invalid_argument("generate_corpus: not enough (adjective, noun) combinations");
  if (cfg.eval_entities == 0 || cfg.train_pairs == 0)
    throw std::invalid_argument("generate_corpus: splits must be non-empty");

  std::mt19937_64 rng(cfg.seed);

  // every adjective and noun appears among the first combos, so eval titles
  // never contain train-unseen tokens
  std::vector<Combo> combos;
  combos.reserve(n_adj * n_noun);
  std::vector<std::size_t> noun_perm(n_noun);
  for (std::size_t i = 0; i < n_noun; ++i) noun_perm[i] = i;
  std::shuffle(noun_perm.begin(), noun_perm.end(), rng);
  std::vector<std::vector<bool>> taken(n_adj, std::vector<bool>(n_noun, false));
  for (std::size_t i = 0; i < std::max(n_adj, n_noun); ++i) {
    Combo c{i % n_adj, noun_perm[i % n_noun]};
    if (!taken[c.adj][c.noun]) {
      taken[c.adj][c.noun] = true;
      combos.push_back(c);
    }
  }
  std::vector<Combo> rest;
  for (std::size_t a = 0; a < n_adj; ++a)
    for (std::size_t n = 0; n < n_noun; ++n)
      if (!taken[a][n]) rest.push_back({a, n});
  std::shuffle(rest.begin(), rest.end(), rng);
  combos.insert(combos.end(), rest.begin(), rest.end());

  SynthCorpus out;
  Pools pools(cfg.seed ^ 0xabcdef1234567890ull, 0);

  struct Built {
    EntityRecord rec;
    Combo combo;
    std::pair<std::string, std::string> profile;
    std::string verb, obj;  // the entity's own relation
  };

  // Entities sharing a noun form a family. Family members share a distractor
  // profile pool and a relation pool; each member owns one (verb, object)
  // pair. Contexts and descriptions both quote sibling relations and sibling
  // titles, so the token multiset is nearly symmetric inside a family and
  // only the binding "mention/title is the subject of its own relation"
  // identifies the referent.
  std::map<std::size_t, std::size_t> family_member_count;
  auto family_profile = [&](std::size_t noun, std::size_t member) {
    const auto& pool = distractors();
    const std::size_t base = (noun * 3) % pool.size();
    return std::pair<std::string, std::string>{pool[(base + member % 3) % pool.size()],
                                               pool[(base + (member + 1) % 3) % pool.size()]};
  };
  auto family_relation = [&](std::size_t noun, std::size_t member) {
    const std::string& v = verbs()[(noun * 2 + member) % verbs().size()];
    const std::string& o = fillers()[(noun * 5 + member * 3) % fillers().size()];
    return std::pair<std::string, std::string>{v, o};
  };

  auto build_entities = [&](std::size_t count, std::size_t offset, const std::string& prefix) {
    std::vector<Built> built;
    built.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const Combo c = combos[offset + i];
      const std::size_t member = family_member_count[c.noun]++;
      Built b;
      b.combo = c;
      b.profile = family_profile(c.noun, member);
      auto rel = family_relation(c.noun, member);
      b.verb = rel.first;
      b.obj = rel.second;
      char idbuf[32];
      std::snprintf(idbuf, sizeof(idbuf), "%s-e%05zu", prefix.c_str(), i);
      b.rec.id = idbuf;
      b.rec.title = adjectives()[c.adj] + " " + nouns()[c.noun];
      built.push_back(std::move(b));
    }
    return built;
  };

  // next family member (cyclic); the source of decoy relations and titles
  auto neighbors = [](const std::vector<Built>& items) {
    std::map<std::size_t, std::vector<std::size_t>> families;
    for (std::size_t i = 0; i < items.size(); ++i)
      families[items[i].combo.noun].push_back(i);
    std::vector<std::size_t> nb(items.size());
    for (const auto& [noun, members] : families)
      for (std::size_t j = 0; j < members.size(); ++j)
        nb[members[j]] = members[(j + 1) % members.size()];
    return nb;
  };

  auto fill_descriptions = [&](std::vector<Built>& items) {
    const std::vector<std::size_t> nb = neighbors(items);
    for (std::size_t i = 0; i < items.size(); ++i) {
      Built& self = items[i];
      const Built& sib = items[nb[i]];
      const std::string& d1 = self.profile.first;
      const std::string& d2 = self.profile.second;
      // gold relation bound to the title, then sibling decoys
      self.rec.description = "the " + self.rec.title + " " + third_person(self.verb) + " the " +
                             self.obj + " . the " + d1 + " " + sib.verb + " the " + sib.obj +
                             " . the " + d2 + " " + pools.pick(verbs(), 1) + " the " +
                             sib.rec.title + " .";
    }
  };

  const std::size_t force = std::max({verbs().size(), distractors().size(), fillers().size()});
  std::vector<Built> train = build_entities(cfg.train_pairs, 0, "tr");
  std::vector<Built> eval = build_entities(cfg.eval_entities, cfg.train_pairs, "ev");
  pools.forced = force * 2;  // cover every pool word inside the train split
  fill_descriptions(train);
  pools.forced = 0;
  fill_descriptions(eval);

  auto build_mentions = [&](const std::vector<Built>& items, std::size_t count,
                            const std::string& prefix) {
    const std::vector<std::size_t> nb = neighbors(items);
    std::vector<MentionRecord> mentions;
    mentions.reserve(count);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::size_t i = 0; i < count; ++i) {
      const Built& self = items[i % items.size()];
      const Built& sib = items[nb[i % items.size()]];
      const std::string& d1 = self.profile.first;
      const std::string& d2 = self.profile.second;
      MentionRecord m;
      char idbuf[32];
      std::snprintf(idbuf, sizeof(idbuf), "%s-m%05zu", prefix.c_str(), i);
      m.id = idbuf;
      m.gold_entity_id = self.rec.id;
      m.mention = self.rec.title;
      // the first record is always barren so the zero-triplet path (and its
      // comma tokens) exist in every split
      const bool barren = cfg.barren_fraction > 0.0 &&
                          (i == 0 || coin(rng) < cfg.barren_fraction);
      if (barren) {
        // verb-free fragment: zero extractable triplets
        m.context_left = "the " + d1 + " , the " + d2 + " , the";
        m.context_right = ", the " + pools.pick(fillers(), 7) + " , the " + d1 + " .";
      } else {
        // gold relation bound to the mention; sibling relation and sibling
        // title appear with distractor subjects, so an order-blind reading of
        // the context cannot separate this entity from its sibling
        std::string left = "the " + d1 + " of the " + d2 + " " + pools.pick(verbs(), 8) +
                           " the " + d1 + " . ";
        if (rng() % 2) left += "the " + d2 + " " + pools.pick(verbs(), 9) + " the " +
                               pools.pick(fillers(), 12) + " . ";
        left += "the";
        std::string right = third_person(self.verb) + " the " + self.obj + " . ";
        right += "the " + d1 + " " + sib.verb + " the " + sib.obj + " . ";
        right += "the " + sib.rec.title + " " + third_person(pools.pick(verbs(), 10)) + " the " +
                 d2 + " .";
        m.context_left = left;
        m.context_right = right;
      }
      mentions.push_back(std::move(m));
    }
    return mentions;
  };

  out.train_mentions = build_mentions(train, cfg.train_pairs, "tr");
  out.eval_mentions = build_mentions(eval, cfg.eval_pairs, "ev");
  for (auto& b : train) out.train_entities.push_back(std::move(b.rec));
  for (auto& b : eval) out.eval_entities.push_back(std::move(b.rec));
  return out;
}

}  // namespace ger
