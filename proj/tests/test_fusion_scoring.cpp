#include "ger/loss.hpp"
#include "ger/model.hpp"

#include "doctest.h"
#include "fixtures.hpp"
#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace ger;

TEST_CASE("fuse is the exact affine combination") {
  std::mt19937_64 rng(3);
  ad::Graph g;
  ad::Tensor sen = ad::Tensor::randn(1, 8, rng, 1.0);
  ad::Tensor gra = ad::Tensor::randn(1, 8, rng, 1.0);
  ad::Var vs = g.input(sen);
  ad::Var vg = g.input(gra);

  SUBCASE("lambda zero reduces to the sentence vector") {
    ad::Var v = fuse(g, vs, vg, g.input(ad::Tensor::full(1, 1, 0.0)));
    for (std::size_t c = 0; c < 8; ++c) CHECK(v.value().at(0, c) == sen.at(0, c));
  }
  SUBCASE("zero graph vector reduces to the sentence vector") {
    ad::Var v = fuse(g, vs, g.input(ad::Tensor(1, 8)), g.input(ad::Tensor::full(1, 1, 0.5)));
    for (std::size_t c = 0; c < 8; ++c) CHECK(v.value().at(0, c) == sen.at(0, c));
  }
  SUBCASE("initial lambda of one half") {
    ad::Var v = fuse(g, vs, vg, g.input(ad::Tensor::full(1, 1, 0.5)));
    for (std::size_t c = 0; c < 8; ++c)
      CHECK(v.value().at(0, c) == doctest::Approx(sen.at(0, c) + 0.5 * gra.at(0, c)));
  }
  SUBCASE("dimension mismatch is rejected") {
    ad::Var bad = g.input(ad::Tensor(1, 4));
    CHECK_THROWS_AS(fuse(g, vs, bad, g.input(ad::Tensor::full(1, 1, 0.5))),
                    std::invalid_argument);
  }
}

TEST_CASE("fuse is linear in its inputs") {
  std::mt19937_64 rng(5);
  ad::Graph g;
  ad::Tensor x = ad::Tensor::randn(1, 6, rng, 1.0);
  ad::Tensor y = ad::Tensor::randn(1, 6, rng, 1.0);
  const double a = 2.75;
  ad::Var lam = g.input(ad::Tensor::full(1, 1, 0.37));

  ad::Var v1 = fuse(g, g.scale(g.input(x), a), g.scale(g.input(y), a), lam);
  ad::Var v2 = g.scale(fuse(g, g.input(x), g.input(y), lam), a);
  for (std::size_t c = 0; c < 6; ++c)
    CHECK(std::abs(v1.value().at(0, c) - v2.value().at(0, c)) < 1e-12);
}

TEST_CASE("score is the raw inner product") {
  ad::Tensor a(1, 3, {1.0, 0.0, 0.0});
  ad::Tensor b(1, 3, {0.0, 1.0, 0.0});
  CHECK(score(a, b) == 0.0);
  ad::Tensor c(1, 3, {1.0, 2.0, -3.0});
  CHECK(score(c, c) == doctest::Approx(14.0));

  std::mt19937_64 rng(7);
  ad::Tensor u = ad::Tensor::randn(1, 32, rng, 1.0);
  ad::Tensor v = ad::Tensor::randn(1, 32, rng, 1.0);
  double expect = 0.0;
  for (std::size_t i = 0; i < 32; ++i) expect += u.v[i] * v.v[i];
  CHECK(std::abs(score(u, v) - expect) < 1e-12);

  ad::Tensor w(1, 5);
  CHECK_THROWS_AS(score(u, w), std::invalid_argument);
}

TEST_CASE("sentence_only equals fused with lambda clamped to zero, bit-exact") {
  auto world = test::make_tiny_world(12, 6);
  Model& m = world.model;
  m.mention.lambda_ = ad::Tensor::full(1, 1, 0.0);

  const TrainPair& p = world.train_data.pairs[0];
  const ad::Tensor fused = represent_value(m, m.mention, p.mention, EncoderMode::Fused);
  const ad::Tensor sent = represent_value(m, m.mention, p.mention, EncoderMode::SentenceOnly);
  REQUIRE(fused.size() == sent.size());
  for (std::size_t i = 0; i < fused.size(); ++i) CHECK(fused.v[i] == sent.v[i]);
}

TEST_CASE("node_mean on a barren context is v_sen + lambda * central init") {
  auto world = test::make_tiny_world(12, 6);
  Model& m = world.model;

  // mention with no extractable triplets
  PreparedInput in = prepare_mention("", "crimson freighter", "", world.vocab, m.cfg, world.rules);
  REQUIRE(in.units.units.empty());

  const ad::Tensor got = represent_value(m, m.mention, in, EncoderMode::NodeMean);

  // recompute by hand from the encoder outputs
  ad::Graph g;
  BoundSide side = bind_side(g, m.mention, false, "");
  EncodeResult enc = encode(g, side.enc, in.tc, m.cfg.enc_heads);
  const ad::Tensor& Y = enc.Y.value();
  const double lam = m.mention.lambda_.v[0];
  for (std::size_t c = 0; c < m.cfg.dim; ++c) {
    double central = 0.0;
    for (std::size_t p = in.tc.span_start; p < in.tc.span_end; ++p) central += Y.at(p, c);
    central /= static_cast<double>(in.tc.span_end - in.tc.span_start);
    CHECK(got.at(0, c) == doctest::Approx(Y.at(0, c) + lam * central).epsilon(1e-12));
  }
}

TEST_CASE("graph_only on a barren context is repeated single-node self-attention") {
  auto world = test::make_tiny_world(12, 6);
  Model& m = world.model;
  PreparedInput in = prepare_mention("", "crimson freighter", "", world.vocab, m.cfg, world.rules);
  REQUIRE(in.units.units.empty());

  const ad::Tensor got = represent_value(m, m.mention, in, EncoderMode::GraphOnly);

  // oracle: h <- relu((1/K) sum_k h W_k), L times over the central init
  ad::Graph g;
  BoundSide side = bind_side(g, m.mention, false, "");
  EncodeResult enc = encode(g, side.enc, in.tc, m.cfg.enc_heads);
  const ad::Tensor& Y = enc.Y.value();
  std::vector<double> h(m.cfg.dim, 0.0);
  for (std::size_t c = 0; c < m.cfg.dim; ++c) {
    for (std::size_t p = in.tc.span_start; p < in.tc.span_end; ++p) h[c] += Y.at(p, c);
    h[c] /= static_cast<double>(in.tc.span_end - in.tc.span_start);
  }
  for (std::size_t l = 0; l < m.cfg.hgan_layers; ++l) {
    std::vector<double> nxt(m.cfg.dim, 0.0);
    for (std::size_t k = 0; k < m.cfg.hgan_heads; ++k)
      for (std::size_t c = 0; c < m.cfg.dim; ++c) {
        double s = 0.0;
        for (std::size_t q = 0; q < m.cfg.dim; ++q) s += h[q] * m.mention.hgan[l].w[k].at(q, c);
        nxt[c] += s;
      }
    for (std::size_t c = 0; c < m.cfg.dim; ++c)
      h[c] = std::max(0.0, nxt[c] / static_cast<double>(m.cfg.hgan_heads));
  }
  for (std::size_t c = 0; c < m.cfg.dim; ++c)
    CHECK(got.at(0, c) == doctest::Approx(h[c]).epsilon(1e-10));
}

TEST_CASE("flat_gat runs the same stack over the hubless adjacency") {
  auto world = test::make_tiny_world(12, 6);
  Model& m = world.model;
  // pick a pair with at least one triplet
  const TrainPair* p = nullptr;
  for (const auto& cand : world.train_data.pairs)
    if (!cand.mention.units.units.empty()) { p = &cand; break; }
  REQUIRE(p != nullptr);
  const ad::Tensor flat = represent_value(m, m.mention, p->mention, EncoderMode::FlatGat);
  const ad::Tensor fused = represent_value(m, m.mention, p->mention, EncoderMode::Fused);
  CHECK(flat.all_finite());
  // different adjacency, different embedding
  double diff = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) diff += std::abs(flat.v[i] - fused.v[i]);
  CHECK(diff > 0.0);
}

TEST_CASE("mention and entity parameter sets are disjoint") {
  auto world = test::make_tiny_world(12, 6);
  Model& m = world.model;
  const TrainPair& p = world.train_data.pairs[0];

  const ad::Tensor before = represent_value(m, m.entity, p.entity, EncoderMode::Fused);
  // trash the mention side completely
  for (auto& x : m.mention.enc.tok_emb.v) x += 3.21;
  m.mention.lambda_.v[0] = -9.0;
  const ad::Tensor after = represent_value(m, m.entity, p.entity, EncoderMode::Fused);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(before.v[i] == after.v[i]);
}

TEST_CASE("loss gradient w.r.t. lambda matches finite differences") {
  auto world = test::make_tiny_world(8, 4);
  Model& m = world.model;

  auto loss_value = [&]() {
    ad::Graph g;
    BoundSide bm = bind_side(g, m.mention, false, "");
    BoundSide be = bind_side(g, m.entity, false, "");
    std::vector<ad::Var> mv, ev;
    for (std::size_t i = 0; i < 2; ++i) {
      const TrainPair& p = world.train_data.pairs[i];
      mv.push_back(represent(g, bm, m.cfg, p.mention.tc, p.mention.units, EncoderMode::Fused));
      ev.push_back(represent(g, be, m.cfg, p.entity.tc, p.entity.units, EncoderMode::Fused));
    }
    ad::Var S = batch_score_matrix(g, mv, ev);
    return in_batch_loss(g, S).value().v[0];
  };

  // analytic gradient via one tracked graph
  double analytic_m = 0.0, analytic_e = 0.0;
  {
    ad::Graph g;
    BoundSide bm = bind_side(g, m.mention, true, "m/");
    BoundSide be = bind_side(g, m.entity, true, "e/");
    std::vector<ad::Var> mv, ev;
    for (std::size_t i = 0; i < 2; ++i) {
      const TrainPair& p = world.train_data.pairs[i];
      mv.push_back(represent(g, bm, m.cfg, p.mention.tc, p.mention.units, EncoderMode::Fused));
      ev.push_back(represent(g, be, m.cfg, p.entity.tc, p.entity.units, EncoderMode::Fused));
    }
    ad::Var loss = in_batch_loss(g, batch_score_matrix(g, mv, ev));
    g.backward(loss);
    analytic_m = g.grad(bm.lambda_).v[0];
    analytic_e = g.grad(be.lambda_).v[0];
  }

  const double h = 1e-5;
  auto probe = [&](ad::Tensor& lam, double analytic) {
    const double saved = lam.v[0];
    lam.v[0] = saved + h;
    const double fp = loss_value();
    lam.v[0] = saved - h;
    const double fm = loss_value();
    lam.v[0] = saved;
    const double numeric = (fp - fm) / (2.0 * h);
    CHECK(std::abs(analytic - numeric) /
              std::max({std::abs(analytic), std::abs(numeric), 1e-6}) <
          1e-4);
  };
  probe(m.mention.lambda_, analytic_m);
  probe(m.entity.lambda_, analytic_e);
}

TEST_CASE("model checkpoints round-trip through files") {
  auto world = test::make_tiny_world(8, 4);
  auto dir = test::temp_dir("model_ckpt");
  const auto path = (dir / "model.bin").string();
  world.model.save(path);
  Model loaded = Model::load(path);
  CHECK(loaded.cfg.dim == world.model.cfg.dim);
  CHECK(loaded.cfg.mode_mention == world.model.cfg.mode_mention);

  const TrainPair& p = world.train_data.pairs[0];
  const ad::Tensor a = represent_value(world.model, world.model.mention, p.mention, EncoderMode::Fused);
  const ad::Tensor b = represent_value(loaded, loaded.mention, p.mention, EncoderMode::Fused);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.v[i] == b.v[i]);
}
