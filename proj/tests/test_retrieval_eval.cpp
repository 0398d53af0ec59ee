#include "ger/eval.hpp"
#include "ger/index.hpp"

#include "doctest.h"
#include "fixtures.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <random>

using namespace ger;

namespace {

EntityIndex random_index(std::size_t n, std::size_t d, std::mt19937_64& rng,
                         bool quantize = false) {
  EntityIndex index;
  index.checkpoint_fingerprint = "test";
  index.vectors = ad::Tensor::randn(n, d, rng, 1.0);
  if (quantize)
    for (auto& x : index.vectors.v) x = std::round(x * 4.0) / 4.0;  // force ties
  char buf[16];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "e%04zu", i);
    index.ids.push_back(buf);
  }
  return index;
}

// full argsort oracle with the same tie rule
std::vector<std::string> oracle_topk(const ad::Tensor& q, const EntityIndex& index,
                                     std::size_t k) {
  const std::size_t n = index.size();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < index.vectors.cols; ++j)
      s += q.v[j] * index.vectors.at(i, j);
    scores[i] = s;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return index.ids[a] < index.ids[b];
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(index.ids[order[i]]);
  return out;
}

}  // namespace

TEST_CASE("retrieve matches the argsort oracle over many random instances") {
  std::mt19937_64 rng(3);
  int tie_instances = 0;
  for (int it = 0; it < 1000; ++it) {
    const std::size_t n = 5 + rng() % 40;
    const std::size_t d = 2 + rng() % 6;
    const bool quantize = (it % 3) == 0;
    EntityIndex index = random_index(n, d, rng, quantize);
    ad::Tensor q = ad::Tensor::randn(1, d, rng, 1.0);
    if (quantize)
      for (auto& x : q.v) x = std::round(x * 2.0) / 2.0;
    const std::size_t k = 1 + rng() % n;

    RetrievalResult got = retrieve_vector("m", q, index, k);
    const auto expect = oracle_topk(q, index, k);
    REQUIRE(got.top.size() == k);
    for (std::size_t i = 0; i < k; ++i) CHECK(got.top[i].id == expect[i]);
    for (std::size_t i = 1; i < k; ++i) CHECK(got.top[i - 1].score >= got.top[i].score);

    if (quantize) ++tie_instances;
  }
  CHECK(tie_instances > 0);
}

TEST_CASE("k equal to the index size returns a permutation of all ids") {
  std::mt19937_64 rng(5);
  EntityIndex index = random_index(20, 4, rng);
  ad::Tensor q = ad::Tensor::randn(1, 4, rng, 1.0);
  RetrievalResult r = retrieve_vector("m", q, index, 20);
  std::set<std::string> seen;
  for (const auto& se : r.top) seen.insert(se.id);
  CHECK(seen.size() == 20);
}

TEST_CASE("zero query vector ranks by ascending entity id") {
  std::mt19937_64 rng(7);
  EntityIndex index = random_index(12, 4, rng);
  ad::Tensor q(1, 4);
  RetrievalResult r = retrieve_vector("m", q, index, 12);
  for (const auto& se : r.top) CHECK(se.score == 0.0);
  for (std::size_t i = 1; i < r.top.size(); ++i) CHECK(r.top[i - 1].id < r.top[i].id);
}

TEST_CASE("k out of range is rejected") {
  std::mt19937_64 rng(9);
  EntityIndex index = random_index(5, 3, rng);
  ad::Tensor q = ad::Tensor::randn(1, 3, rng, 1.0);
  CHECK_THROWS_AS(retrieve_vector("m", q, index, 0), std::invalid_argument);
  CHECK_THROWS_AS(retrieve_vector("m", q, index, 6), std::invalid_argument);
}

TEST_CASE("index build is deterministic, shaped |E| x d, and rejects empties") {
  auto world = test::make_tiny_world(10, 8);
  EntityIndex a = build_index(world.corpus.eval_entities, world.model, world.vocab, world.rules,
                              "fp");
  EntityIndex b = build_index(world.corpus.eval_entities, world.model, world.vocab, world.rules,
                              "fp");
  CHECK(a.vectors.rows == 8);
  CHECK(a.vectors.cols == world.model.cfg.dim);
  CHECK(std::memcmp(a.vectors.v.data(), b.vectors.v.data(),
                    a.vectors.v.size() * sizeof(double)) == 0);
  CHECK(a.ids == b.ids);

  CHECK_THROWS_AS(build_index({}, world.model, world.vocab, world.rules, "fp"),
                  std::invalid_argument);

  auto dup = world.corpus.eval_entities;
  dup.push_back(dup.front());
  CHECK_THROWS_AS(build_index(dup, world.model, world.vocab, world.rules, "fp"),
                  std::invalid_argument);
}

TEST_CASE("index files round-trip") {
  std::mt19937_64 rng(11);
  EntityIndex index = random_index(9, 5, rng);
  index.checkpoint_fingerprint = "deadbeef01234567";
  auto dir = test::temp_dir("index");
  const auto path = (dir / "i.bin").string();
  save_index(path, index);
  EntityIndex loaded = load_index(path);
  CHECK(loaded.ids == index.ids);
  CHECK(loaded.checkpoint_fingerprint == index.checkpoint_fingerprint);
  CHECK(std::memcmp(loaded.vectors.v.data(), index.vectors.v.data(),
                    index.vectors.v.size() * sizeof(double)) == 0);
}

TEST_CASE("recall table on a hand-built fixture") {
  EntityIndex index;
  index.vectors = ad::Tensor(3, 1);
  index.ids = {"a", "b", "c"};

  std::vector<RetrievalResult> results(3);
  results[0] = {"m0", {{"a", 3.0}, {"b", 2.0}, {"c", 1.0}}};  // gold a at rank 1
  results[1] = {"m1", {{"a", 3.0}, {"b", 2.0}, {"c", 1.0}}};  // gold b at rank 2
  results[2] = {"m2", {{"a", 3.0}, {"b", 2.0}, {"c", 1.0}}};  // gold c at rank 3
  std::map<std::string, std::string> gold{{"m0", "a"}, {"m1", "b"}, {"m2", "c"}};

  RecallTable t = recall_at(results, gold, {1, 2, 3}, index);
  CHECK(t.recall[0] == doctest::Approx(1.0 / 3.0));
  CHECK(t.recall[1] == doctest::Approx(2.0 / 3.0));
  CHECK(t.recall[2] == doctest::Approx(1.0));
  for (std::size_t i = 1; i < t.recall.size(); ++i) CHECK(t.recall[i] >= t.recall[i - 1]);

  CHECK_THROWS_AS(recall_at({}, gold, {1}, index), std::invalid_argument);

  std::map<std::string, std::string> bad_gold{{"m0", "zz"}, {"m1", "b"}, {"m2", "c"}};
  CHECK_THROWS_WITH_AS(recall_at(results, bad_gold, {1}, index), doctest::Contains("missing"),
                       std::invalid_argument);
}

TEST_CASE("recall at full index size is always one") {
  auto world = test::make_tiny_world(10, 8);
  EntityIndex index = build_index(world.corpus.eval_entities, world.model, world.vocab,
                                  world.rules, "fp");
  std::vector<RetrievalResult> results;
  std::map<std::string, std::string> gold;
  for (const auto& m : world.corpus.eval_mentions) {
    results.push_back(retrieve(m, world.model, world.vocab, world.rules, index, index.size()));
    gold[m.id] = m.gold_entity_id;
  }
  RecallTable t = recall_at(results, gold, {index.size()}, index);
  CHECK(t.recall[0] == doctest::Approx(1.0));
}

TEST_CASE("zero-shot guard") {
  std::set<std::string> train{"a", "b", "c"};
  CHECK_NOTHROW(zero_shot_guard(train, {"d", "e"}));
  CHECK_THROWS_WITH_AS(zero_shot_guard(train, {"b", "d"}), doctest::Contains("b"),
                       std::runtime_error);
  CHECK_THROWS_AS(zero_shot_guard(train, {}), std::invalid_argument);
}

TEST_CASE("mention attention rank picks the best mention token") {
  // attention: position 2 highest, position 4 second
  std::vector<double> attn = {0.1, 0.05, 0.5, 0.05, 0.3};
  CHECK(mention_attention_rank(attn, 2, 3) == 0);
  CHECK(mention_attention_rank(attn, 4, 5) == 1);
  CHECK(mention_attention_rank(attn, 1, 2) == 3);  // ties break by position
  CHECK(mention_attention_rank(attn, 3, 5) == 1);  // best of {3,4}
}

TEST_CASE("attention rank analysis buckets partition the samples") {
  auto world = test::make_tiny_world(10, 8);
  EntityIndex index = build_index(world.corpus.eval_entities, world.model, world.vocab,
                                  world.rules, "fp");
  const std::vector<std::size_t> bounds = {0, 16, 32, 48, 64};
  AttentionRankTable t = attention_rank_analysis(world.corpus.eval_mentions, world.model,
                                                 world.vocab, world.rules, index, 4, bounds);
  REQUIRE(t.rows.size() == 4);
  std::size_t total = 0;
  for (const auto& row : t.rows) total += row.count;
  CHECK(total == world.corpus.eval_mentions.size());

  // boundaries must cover max_len (64 here)
  CHECK_THROWS_AS(attention_rank_analysis(world.corpus.eval_mentions, world.model, world.vocab,
                                          world.rules, index, 4, {0, 16, 32}),
                  std::invalid_argument);
  CHECK_THROWS_AS(attention_rank_analysis(world.corpus.eval_mentions, world.model, world.vocab,
                                          world.rules, index, 4, {4, 16, 64}),
                  std::invalid_argument);
}
