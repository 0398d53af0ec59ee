#include "ger/index.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace ger {

namespace {

constexpr char kMagic[8] = {'G', 'E', 'R', 'I', 'N', 'D', 'X', '1'};

void put_u32(std::ostream& os, std::uint32_t x) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t x) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  os.write(b, 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t x = 0;
  for (int i = 3; i >= 0; --i) x = (x << 8) | b[i];
  return x;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | b[i];
  return x;
}

}  // namespace

long EntityIndex::row_of(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return static_cast<long>(i);
  return -1;
}

EntityIndex build_index(const std::vector<EntityRecord>& entities, Model& model,
                        const Vocabulary& vocab, const RuleConfig& rules,
                        const std::string& checkpoint_fingerprint,
                        const std::map<std::string, UnitSet>* entity_triplets) {
  if (entities.empty()) throw std::invalid_argument("build_index: no entities");

  EntityIndex index;
  index.checkpoint_fingerprint = checkpoint_fingerprint;
  index.vectors = ad::Tensor(entities.size(), model.cfg.dim);
  index.ids.reserve(entities.size());

  std::vector<std::string> failures;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const EntityRecord& e = entities[i];
    if (std::find(index.ids.begin(), index.ids.end(), e.id) != index.ids.end())
      throw std::invalid_argument("build_index: duplicate entity id " + e.id);
    try {
      const UnitSet* pre = nullptr;
      if (entity_triplets) {
        auto it = entity_triplets->find(e.id);
        if (it != entity_triplets->end()) pre = &it->second;
      }
      PreparedInput in = prepare_entity(e.title, e.description, vocab, model.cfg, rules, pre);
      const ad::Tensor v = represent_value(model, model.entity, in, model.cfg.mode_entity);
      std::copy(v.v.begin(), v.v.end(), &index.vectors.v[i * model.cfg.dim]);
      index.ids.push_back(e.id);
    } catch (const std::exception& ex) {
      failures.push_back(e.id + ": " + ex.what());
    }
  }
  if (!failures.empty()) {
    std::string msg = "build_index: " + std::to_string(failures.size()) + " entities failed:";
    for (const auto& f : failures) msg += "\n  " + f;
    throw std::runtime_error(msg);
  }
  return index;
}

void save_index(const std::string& path, const EntityIndex& index) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_index: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  put_u64(os, index.ids.size());
  put_u64(os, index.vectors.cols);
  put_u32(os, static_cast<std::uint32_t>(index.checkpoint_fingerprint.size()));
  os.write(index.checkpoint_fingerprint.data(),
           static_cast<std::streamsize>(index.checkpoint_fingerprint.size()));
  for (const auto& id : index.ids) {
    put_u32(os, static_cast<std::uint32_t>(id.size()));
    os.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  for (double d : index.vectors.v) put_u64(os, std::bit_cast<std::uint64_t>(d));
  if (!os) throw std::runtime_error("save_index: write failed for " + path);
}

EntityIndex load_index(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_index: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_index: " + path + " is not an index file");
  EntityIndex index;
  const std::uint64_t n = get_u64(is);
  const std::uint64_t d = get_u64(is);
  const std::uint32_t fplen = get_u32(is);
  index.checkpoint_fingerprint.resize(fplen);
  is.read(index.checkpoint_fingerprint.data(), fplen);
  index.ids.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint32_t len = get_u32(is);
    std::string id(len, '\0');
    is.read(id.data(), len);
    index.ids.push_back(std::move(id));
  }
  index.vectors = ad::Tensor(n, d);
  for (auto& x : index.vectors.v) x = std::bit_cast<double>(get_u64(is));
  if (!is) throw std::runtime_error("load_index: truncated file " + path);
  return index;
}

RetrievalResult retrieve_vector(const std::string& mention_id, const ad::Tensor& mention_vec,
                                const EntityIndex& index, std::size_t k) {
  const std::size_t n = index.ids.size();
  if (k < 1 || k > n)
    throw std::invalid_argument("retrieve: k=" + std::to_string(k) +
                                " out of range for |E|=" + std::to_string(n));
  if (mention_vec.size() != index.vectors.cols)
    throw std::invalid_argument("retrieve: mention vector dimension mismatch");

  std::vector<double> scores(n, 0.0);
  const std::size_t d = index.vectors.cols;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const double* row = &index.vectors.v[i * d];
    for (std::size_t j = 0; j < d; ++j) s += mention_vec.v[j] * row[j];
    scores[i] = s;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return index.ids[a] < index.ids[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(), better);

  RetrievalResult res;
  res.mention_id = mention_id;
  res.top.reserve(k);
  for (std::size_t i = 0; i < k; ++i) res.top.push_back({index.ids[order[i]], scores[order[i]]});
  return res;
}

RetrievalResult retrieve(const MentionRecord& mention, Model& model, const Vocabulary& vocab,
                         const RuleConfig& rules, const EntityIndex& index, std::size_t k) {
  PreparedInput in = prepare_mention(mention.context_left, mention.mention,
                                     mention.context_right, vocab, model.cfg, rules);
  const ad::Tensor v = represent_value(model, model.mention, in, model.cfg.mode_mention);
  return retrieve_vector(mention.id, v, index, k);
}

}  // namespace ger
