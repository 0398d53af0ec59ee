#pragma once

#include "ger/model.hpp"
#include "ger/records.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ger {

struct TrainConfig {
  double lr{1e-3};
  double weight_decay{0.01};
  double clip_norm{1.0};
  double warmup_frac{0.1};
  std::size_t epochs{5};
  std::size_t batch_size{16};
  std::uint64_t seed{42};
  double ratio{1.0};  // deterministic seeded subset of ceil(ratio * |corpus|)
  double beta1{0.9};
  double beta2{0.999};
  double adam_eps{1e-8};

  void validate() const;
};

// Tokenized, triplet-aligned (mention, entity) pair.
struct TrainPair {
  std::string mention_id;
  std::string entity_id;
  PreparedInput mention;
  PreparedInput entity;
};

struct Dataset {
  std::vector<TrainPair> pairs;
};

// Tokenizes every pair once up front. Pre-extracted triplets, when provided,
// are keyed by mention id / entity id over raw-context coordinates.
Dataset prepare_dataset(const std::vector<MentionRecord>& mentions,
                        const std::map<std::string, EntityRecord>& entities,
                        const Vocabulary& vocab, const ModelConfig& cfg, const RuleConfig& rules,
                        const std::map<std::string, UnitSet>* mention_triplets = nullptr,
                        const std::map<std::string, UnitSet>* entity_triplets = nullptr);

// AdamW with decoupled weight decay. Parameters whose registry name ends in
// "/lambda" are exempt from decay.
class AdamW {
 public:
  AdamW(const TrainConfig& cfg, ParamRegistry& reg);
  void step(const std::vector<ad::Tensor>& grads, double lr);

 private:
  const TrainConfig cfg_;
  ParamRegistry& reg_;
  std::vector<ad::Tensor> m_, v_;
  std::vector<bool> decay_;
  std::size_t t_{0};
};

struct StepStats {
  double loss{0.0};
  double grad_norm{0.0};  // pre-clip global L2 norm
  double lr{0.0};
};

double global_grad_norm(const std::vector<ad::Tensor>& grads);
// Rescales so the global norm is at most max_norm; returns the pre-clip norm.
double clip_gradients(std::vector<ad::Tensor>& grads, double max_norm);

// One optimizer step over a batch of dataset indices. Throws if the loss is
// non-finite.
StepStats train_step(Model& model, const Dataset& data, const std::vector<std::size_t>& batch,
                     AdamW& opt, const TrainConfig& cfg, std::size_t step_index,
                     std::size_t total_steps);

struct TrainResult {
  double initial_loss{0.0};
  double final_loss{0.0};
  std::size_t steps{0};
};

// Full loop: seeded ratio subset, per-epoch shuffling with entity-distinct
// batches, linear warmup then constant lr, per-step metrics lines
// {step, epoch, loss, lr, grad_norm} and per-epoch summary lines. When an
// eval set is given, recall@1 over it is logged each epoch.
TrainResult train(Model& model, const Dataset& data, const TrainConfig& cfg,
                  std::ostream* metrics = nullptr, const Dataset* eval_data = nullptr);

// Deterministic seeded subset: indices of ceil(ratio*n) pairs.
std::vector<std::size_t> ratio_subset(std::size_t n, double ratio, std::uint64_t seed);

// Batches whose entity ids are distinct whenever the corpus permits.
std::vector<std::vector<std::size_t>> make_batches(const Dataset& data,
                                                   const std::vector<std::size_t>& order,
                                                   std::size_t batch_size);

}  // namespace ger
