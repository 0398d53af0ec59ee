#include "ger/train.hpp"

#include "ger/loss.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace ger {

namespace {
using json = nlohmann::json;
}

void TrainConfig::validate() const {
  if (lr < 0 || clip_norm <= 0 || epochs == 0 || batch_size == 0)
    throw std::invalid_argument("TrainConfig: lr/clip_norm/epochs/batch_size must be positive");
  if (warmup_frac < 0 || warmup_frac > 1)
    throw std::invalid_argument("TrainConfig: warmup_frac must lie in [0,1]");
  if (ratio <= 0 || ratio > 1) throw std::invalid_argument("TrainConfig: ratio must lie in (0,1]");
  if (weight_decay < 0) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
}

Dataset prepare_dataset(const std::vector<MentionRecord>& mentions,
                        const std::map<std::string, EntityRecord>& entities,
                        const Vocabulary& vocab, const ModelConfig& cfg, const RuleConfig& rules,
                        const std::map<std::string, UnitSet>* mention_triplets,
                        const std::map<std::string, UnitSet>* entity_triplets) {
  Dataset out;
  out.pairs.reserve(mentions.size());
  for (const auto& m : mentions) {
    auto it = entities.find(m.gold_entity_id);
    if (it == entities.end())
      throw std::runtime_error("prepare_dataset: mention " + m.id +
                               " references unknown entity " + m.gold_entity_id);
    const UnitSet* m_units = nullptr;
    const UnitSet* e_units = nullptr;
    if (mention_triplets) {
      auto mt = mention_triplets->find(m.id);
      if (mt != mention_triplets->end()) m_units = &mt->second;
    }
    if (entity_triplets) {
      auto et = entity_triplets->find(it->second.id);
      if (et != entity_triplets->end()) e_units = &et->second;
    }
    TrainPair p;
    p.mention_id = m.id;
    p.entity_id = it->second.id;
    p.mention = prepare_mention(m.context_left, m.mention, m.context_right, vocab, cfg, rules,
                                m_units);
    p.entity = prepare_entity(it->second.title, it->second.description, vocab, cfg, rules,
                              e_units);
    out.pairs.push_back(std::move(p));
  }
  return out;
}

std::vector<std::size_t> ratio_subset(std::size_t n, double ratio, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto keep = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));
  idx.resize(std::min(n, std::max<std::size_t>(keep, 1)));
  return idx;
}

std::vector<std::vector<std::size_t>> make_batches(const Dataset& data,
                                                   const std::vector<std::size_t>& order,
                                                   std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> pending(order);
  while (!pending.empty()) {
    std::vector<std::size_t> batch;
    std::vector<std::size_t> rest;
    std::vector<std::string> used;
    for (std::size_t idx : pending) {
      const std::string& eid = data.pairs[idx].entity_id;
      if (batch.size() < batch_size &&
          std::find(used.begin(), used.end(), eid) == used.end()) {
        batch.push_back(idx);
        used.push_back(eid);
      } else {
        rest.push_back(idx);
      }
    }
    if (batch.empty()) {
      // only same-entity duplicates remain; accept them
      const std::size_t take = std::min(batch_size, rest.size());
      batch.assign(rest.begin(), rest.begin() + static_cast<long>(take));
      rest.erase(rest.begin(), rest.begin() + static_cast<long>(take));
    }
    batches.push_back(std::move(batch));
    pending = std::move(rest);
  }
  return batches;
}

AdamW::AdamW(const TrainConfig& cfg, ParamRegistry& reg) : cfg_(cfg), reg_(reg) {
  for (const auto& [name, t] : reg.items()) {
    m_.emplace_back(t->rows, t->cols);
    v_.emplace_back(t->rows, t->cols);
    decay_.push_back(!name.ends_with("/lambda"));
  }
}

void AdamW::step(const std::vector<ad::Tensor>& grads, double lr) {
  if (grads.size() != reg_.items().size())
    throw std::invalid_argument("AdamW: gradient count mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t p = 0; p < grads.size(); ++p) {
    ad::Tensor& param = *reg_.items()[p].second;
    const ad::Tensor& g = grads[p];
    for (std::size_t i = 0; i < param.size(); ++i) {
      m_[p].v[i] = cfg_.beta1 * m_[p].v[i] + (1.0 - cfg_.beta1) * g.v[i];
      v_[p].v[i] = cfg_.beta2 * v_[p].v[i] + (1.0 - cfg_.beta2) * g.v[i] * g.v[i];
      const double mhat = m_[p].v[i] / bc1;
      const double vhat = v_[p].v[i] / bc2;
      double upd = mhat / (std::sqrt(vhat) + cfg_.adam_eps);
      if (decay_[p]) upd += cfg_.weight_decay * param.v[i];
      param.v[i] -= lr * upd;
    }
  }
}

double global_grad_norm(const std::vector<ad::Tensor>& grads) {
  double sq = 0.0;
  for (const auto& t : grads)
    for (double x : t.v) sq += x * x;
  return std::sqrt(sq);
}

double clip_gradients(std::vector<ad::Tensor>& grads, double max_norm) {
  const double norm = global_grad_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (auto& t : grads)
      for (double& x : t.v) x *= f;
  }
  return norm;
}

namespace {

double schedule_lr(const TrainConfig& cfg, std::size_t step_index, std::size_t total_steps) {
  const auto warmup = static_cast<std::size_t>(
      std::ceil(cfg.warmup_frac * static_cast<double>(total_steps)));
  if (warmup == 0) return cfg.lr;
  const double f = static_cast<double>(step_index + 1) / static_cast<double>(warmup);
  return cfg.lr * std::min(1.0, f);
}

}  // namespace

StepStats train_step(Model& model, const Dataset& data, const std::vector<std::size_t>& batch,
                     AdamW& opt, const TrainConfig& cfg, std::size_t step_index,
                     std::size_t total_steps) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");

  ad::Graph g;
  BoundSide bm = bind_side(g, model.mention, true, "m/");
  BoundSide be = bind_side(g, model.entity, true, "e/");

  std::vector<ad::Var> mvecs, evecs;
  mvecs.reserve(batch.size());
  evecs.reserve(batch.size());
  for (std::size_t idx : batch) {
    const TrainPair& p = data.pairs[idx];
    mvecs.push_back(
        represent(g, bm, model.cfg, p.mention.tc, p.mention.units, model.cfg.mode_mention));
    evecs.push_back(
        represent(g, be, model.cfg, p.entity.tc, p.entity.units, model.cfg.mode_entity));
  }
  ad::Var scores = batch_score_matrix(g, mvecs, evecs);
  ad::Var loss = in_batch_loss(g, scores);

  const double loss_value = loss.value().v[0];
  if (!std::isfinite(loss_value))
    throw std::runtime_error("train_step: non-finite loss " + std::to_string(loss_value) +
                             " at step " + std::to_string(step_index));

  g.zero_grad();
  g.backward(loss);

  std::vector<ad::Tensor> grads;
  grads.reserve(bm.leaves.size() + be.leaves.size());
  for (ad::Var leaf : bm.leaves) grads.push_back(g.grad(leaf));
  for (ad::Var leaf : be.leaves) grads.push_back(g.grad(leaf));
  const double norm = clip_gradients(grads, cfg.clip_norm);

  const double lr = schedule_lr(cfg, step_index, total_steps);
  opt.step(grads, lr);

  return {loss_value, norm, lr};
}

namespace {

// recall@1 with frozen parameters, used for per-epoch validation lines
double eval_recall1(Model& model, const Dataset& eval_data) {
  if (eval_data.pairs.empty()) return 0.0;
  std::vector<ad::Tensor> evecs;
  evecs.reserve(eval_data.pairs.size());
  for (const TrainPair& p : eval_data.pairs)
    evecs.push_back(represent_value(model, model.entity, p.entity, model.cfg.mode_entity));
  std::size_t hits = 0;
  for (const TrainPair& p : eval_data.pairs) {
    const ad::Tensor mv = represent_value(model, model.mention, p.mention, model.cfg.mode_mention);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < evecs.size(); ++i) {
      const double s = score(mv, evecs[i]);
      if (s > best ||
          (s == best && eval_data.pairs[i].entity_id < eval_data.pairs[best_i].entity_id)) {
        best = s;
        best_i = i;
      }
    }
    hits += eval_data.pairs[best_i].entity_id == p.entity_id ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(eval_data.pairs.size());
}

}  // namespace

TrainResult train(Model& model, const Dataset& data, const TrainConfig& cfg,
                  std::ostream* metrics, const Dataset* eval_data) {
  cfg.validate();
  if (data.pairs.empty()) throw std::invalid_argument("train: empty corpus");

  const std::vector<std::size_t> subset = ratio_subset(data.pairs.size(), cfg.ratio, cfg.seed);

  // count total steps first so warmup is defined up front
  std::size_t total_steps = 0;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    std::vector<std::size_t> order(subset);
    std::mt19937_64 rng(cfg.seed + 0x5851f42d4c957f2dull * (e + 1));
    std::shuffle(order.begin(), order.end(), rng);
    total_steps += make_batches(data, order, cfg.batch_size).size();
  }

  ParamRegistry reg = model.registry();
  AdamW opt(cfg, reg);

  TrainResult result;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(subset);
    std::mt19937_64 rng(cfg.seed + 0x5851f42d4c957f2dull * (epoch + 1));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    std::size_t epoch_batches = 0;
    for (const auto& batch : make_batches(data, order, cfg.batch_size)) {
      StepStats st = train_step(model, data, batch, opt, cfg, step, total_steps);
      if (step == 0) result.initial_loss = st.loss;
      result.final_loss = st.loss;
      epoch_loss += st.loss;
      ++epoch_batches;
      if (metrics) {
        json line{{"step", step},
                  {"epoch", epoch},
                  {"loss", st.loss},
                  {"lr", st.lr},
                  {"grad_norm", st.grad_norm}};
        *metrics << line.dump() << '\n';
      }
      ++step;
    }

    if (metrics) {
      json line{{"event", "epoch"},
                {"epoch", epoch},
                {"mean_loss", epoch_loss / static_cast<double>(std::max<std::size_t>(1, epoch_batches))}};
      if (eval_data) line["val_recall@1"] = eval_recall1(model, *eval_data);
      *metrics << line.dump() << '\n';
    }
  }
  result.steps = step;
  return result;
}

}  // namespace ger
