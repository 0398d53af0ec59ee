#include "ger/records.hpp"
#include "ger/synth.hpp"

#include "ger/triplets.hpp"

#include "doctest.h"
#include "test_support.hpp"

#include <set>

using namespace ger;

TEST_CASE("record files round-trip and validate") {
  auto dir = test::temp_dir("records");
  const auto mp = (dir / "m.jsonl").string();
  const auto ep = (dir / "e.jsonl").string();

  std::vector<MentionRecord> ms = {{"m1", "left", "colony ship", "right", "e1"},
                                   {"m2", "", "x", "", "e2"}};
  std::vector<EntityRecord> es = {{"e1", "generation ship", "a starship"},
                                  {"e2", "x", ""}};
  save_mentions(mp, ms);
  save_entities(ep, es);

  const auto lm = load_mentions(mp);
  const auto le = load_entities(ep);
  REQUIRE(lm.size() == 2);
  REQUIRE(le.size() == 2);
  CHECK(lm[0].mention == "colony ship");
  CHECK(le[0].title == "generation ship");

  // duplicate ids rejected with line info
  std::vector<EntityRecord> dup = {{"e1", "t", ""}, {"e1", "t2", ""}};
  save_entities(ep, dup);
  CHECK_THROWS_WITH_AS(load_entities(ep), doctest::Contains(":2:"), std::runtime_error);

  // empty mention rejected
  std::vector<MentionRecord> badm = {{"m1", "l", "   ", "r", "e1"}};
  save_mentions(mp, badm);
  CHECK_THROWS_AS(load_mentions(mp), std::runtime_error);
}

TEST_CASE("generated corpus is seeded, sized, and zero-shot disjoint") {
  SynthConfig cfg;
  cfg.train_pairs = 60;
  cfg.eval_entities = 20;
  cfg.eval_pairs = 20;
  cfg.seed = 11;

  SynthCorpus a = generate_corpus(cfg);
  SynthCorpus b = generate_corpus(cfg);
  CHECK(a.train_mentions.size() == 60);
  CHECK(a.train_entities.size() == 60);
  CHECK(a.eval_entities.size() == 20);
  CHECK(a.eval_mentions.size() == 20);

  // determinism
  for (std::size_t i = 0; i < a.train_mentions.size(); ++i) {
    CHECK(a.train_mentions[i].context_left == b.train_mentions[i].context_left);
    CHECK(a.train_mentions[i].gold_entity_id == b.train_mentions[i].gold_entity_id);
  }

  // different seed, different corpus
  cfg.seed = 12;
  SynthCorpus c = generate_corpus(cfg);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.train_mentions.size(); ++i)
    any_diff |= a.train_mentions[i].context_left != c.train_mentions[i].context_left;
  CHECK(any_diff);

  // id spaces and titles are disjoint between splits
  std::set<std::string> train_ids, eval_ids, train_titles, eval_titles;
  for (const auto& e : a.train_entities) {
    train_ids.insert(e.id);
    train_titles.insert(e.title);
  }
  for (const auto& e : a.eval_entities) {
    eval_ids.insert(e.id);
    eval_titles.insert(e.title);
  }
  for (const auto& id : eval_ids) CHECK(train_ids.count(id) == 0);
  for (const auto& t : eval_titles) CHECK(train_titles.count(t) == 0);

  // every gold id resolves within its split
  for (const auto& m : a.eval_mentions) CHECK(eval_ids.count(m.gold_entity_id) == 1);

  // eval tokens are all known from the train split
  Vocabulary v = build_vocabulary(a.train_mentions, a.train_entities);
  for (const auto& m : a.eval_mentions)
    for (const auto& t : word_tokens(m.context_left + " " + m.mention + " " + m.context_right))
      CHECK(v.id_of(t) != Vocabulary::kUnk);
  for (const auto& e : a.eval_entities)
    for (const auto& t : word_tokens(e.title + " " + e.description))
      CHECK(v.id_of(t) != Vocabulary::kUnk);
}

TEST_CASE("generated contexts carry extractable triplets plus barren cases") {
  SynthConfig cfg;
  cfg.train_pairs = 80;
  cfg.eval_entities = 10;
  cfg.eval_pairs = 10;
  cfg.seed = 5;
  cfg.barren_fraction = 0.1;
  SynthCorpus corpus = generate_corpus(cfg);

  RuleConfig rules = RuleConfig::defaults();
  std::size_t with_units = 0, barren = 0;
  for (const auto& m : corpus.train_mentions) {
    const auto toks = mention_raw_tokens(m.context_left, m.mention, m.context_right);
    const UnitSet us = extract_triplets(toks, rules);
    if (us.units.empty()) ++barren;
    else ++with_units;
  }
  CHECK(with_units > 0);
  CHECK(barren > 0);

  // entity descriptions always produce units
  for (const auto& e : corpus.train_entities) {
    const UnitSet us = extract_triplets(entity_raw_tokens(e.description), rules);
    CHECK(!us.units.empty());
  }
}
