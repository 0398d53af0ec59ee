#pragma once

#include "ger/vocab.hpp"

#include <map>
#include <string>
#include <vector>

namespace ger {

// Line-delimited JSON corpus records, UTF-8, one object per line.
struct MentionRecord {
  std::string id;
  std::string context_left;
  std::string mention;
  std::string context_right;
  std::string gold_entity_id;
};

struct EntityRecord {
  std::string id;
  std::string title;
  std::string description;
};

std::vector<MentionRecord> load_mentions(const std::string& path);
std::vector<EntityRecord> load_entities(const std::string& path);
void save_mentions(const std::string& path, const std::vector<MentionRecord>& records);
void save_entities(const std::string& path, const std::vector<EntityRecord>& records);

std::map<std::string, EntityRecord> entity_by_id(const std::vector<EntityRecord>& entities);

// Vocabulary over every token of the given records, in record order.
Vocabulary build_vocabulary(const std::vector<MentionRecord>& mentions,
                            const std::vector<EntityRecord>& entities);

}  // namespace ger
