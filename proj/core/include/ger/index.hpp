#pragma once

#include "ger/model.hpp"
#include "ger/records.hpp"

#include <map>
#include <string>
#include <vector>

namespace ger {

// Immutable cache of fused entity vectors. Row i belongs to ids[i]; ids are
// unique. The fingerprint ties the index to the checkpoint that encoded it.
struct EntityIndex {
  std::vector<std::string> ids;
  ad::Tensor vectors;  // |E| x d
  std::string checkpoint_fingerprint;

  std::size_t size() const { return ids.size(); }
  long row_of(const std::string& id) const;  // -1 when absent
};

EntityIndex build_index(const std::vector<EntityRecord>& entities, Model& model,
                        const Vocabulary& vocab, const RuleConfig& rules,
                        const std::string& checkpoint_fingerprint,
                        const std::map<std::string, UnitSet>* entity_triplets = nullptr);

// Binary layout: magic "GERINDX1", u64 |E|, u64 d, u32 fingerprint length +
// bytes, per entity u32 id length + bytes, then the row-major float64 vector
// block. Little-endian throughout.
void save_index(const std::string& path, const EntityIndex& index);
EntityIndex load_index(const std::string& path);

struct ScoredEntity {
  std::string id;
  double score;
};

struct RetrievalResult {
  std::string mention_id;
  std::vector<ScoredEntity> top;  // scores non-increasing; ties by ascending id
};

// Exact top-k inner-product scan. 1 <= k <= |E|.
RetrievalResult retrieve_vector(const std::string& mention_id, const ad::Tensor& mention_vec,
                                const EntityIndex& index, std::size_t k);

RetrievalResult retrieve(const MentionRecord& mention, Model& model, const Vocabulary& vocab,
                         const RuleConfig& rules, const EntityIndex& index, std::size_t k);

}  // namespace ger
