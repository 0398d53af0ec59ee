#include "ger/records.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <stdexcept>

namespace ger {

namespace {

using json = nlohmann::json;

std::string need_string(const json& j, const char* field, const std::string& where) {
  if (!j.contains(field) || !j[field].is_string())
    throw std::runtime_error(where + ": missing or non-string field '" + field + "'");
  return j[field].get<std::string>();
}

json parse_line(const std::string& line, const std::string& where) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw std::runtime_error(where + ": malformed JSON");
  return j;
}

}  // namespace

std::vector<MentionRecord> load_mentions(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_mentions: cannot open " + path);
  std::vector<MentionRecord> out;
  std::string line;
  std::size_t row = 0;
  std::set<std::string> seen;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(row);
    json j = parse_line(line, where);
    MentionRecord r;
    r.id = need_string(j, "id", where);
    r.context_left = j.value("context_left", "");
    r.mention = need_string(j, "mention", where);
    r.context_right = j.value("context_right", "");
    r.gold_entity_id = need_string(j, "gold_entity_id", where);
    if (r.mention.find_first_not_of(" \t\r\n") == std::string::npos)
      throw std::runtime_error(where + ": mention is empty");
    if (!seen.insert(r.id).second)
      throw std::runtime_error(where + ": duplicate mention id " + r.id);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<EntityRecord> load_entities(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_entities: cannot open " + path);
  std::vector<EntityRecord> out;
  std::string line;
  std::size_t row = 0;
  std::set<std::string> seen;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(row);
    json j = parse_line(line, where);
    EntityRecord r;
    r.id = need_string(j, "id", where);
    r.title = need_string(j, "title", where);
    r.description = j.value("description", "");
    if (r.title.find_first_not_of(" \t\r\n") == std::string::npos)
      throw std::runtime_error(where + ": title is empty");
    if (!seen.insert(r.id).second)
      throw std::runtime_error(where + ": duplicate entity id " + r.id);
    out.push_back(std::move(r));
  }
  return out;
}

void save_mentions(const std::string& path, const std::vector<MentionRecord>& records) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("save_mentions: cannot open " + path);
  for (const auto& r : records) {
    json j{{"id", r.id},
           {"context_left", r.context_left},
           {"mention", r.mention},
           {"context_right", r.context_right},
           {"gold_entity_id", r.gold_entity_id}};
    os << j.dump() << '\n';
  }
}

void save_entities(const std::string& path, const std::vector<EntityRecord>& records) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("save_entities: cannot open " + path);
  for (const auto& r : records) {
    json j{{"id", r.id}, {"title", r.title}, {"description", r.description}};
    os << j.dump() << '\n';
  }
}

std::map<std::string, EntityRecord> entity_by_id(const std::vector<EntityRecord>& entities) {
  std::map<std::string, EntityRecord> out;
  for (const auto& e : entities) out[e.id] = e;
  return out;
}

Vocabulary build_vocabulary(const std::vector<MentionRecord>& mentions,
                            const std::vector<EntityRecord>& entities) {
  Vocabulary v;
  for (const auto& m : mentions) {
    v.add_all(word_tokens(m.context_left));
    v.add_all(word_tokens(m.mention));
    v.add_all(word_tokens(m.context_right));
  }
  for (const auto& e : entities) {
    v.add_all(word_tokens(e.title));
    v.add_all(word_tokens(e.description));
  }
  return v;
}

}  // namespace ger
