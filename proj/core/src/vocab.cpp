#include "ger/vocab.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

namespace ger {

namespace {

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

const std::string kReservedNames[Vocabulary::kReserved] = {
    "[CLS]", "[MS]", "[ME]", "[ENT]", "[PAD]", "[UNK]"};

}  // namespace

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::string word(text.substr(i, j - i));
    for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    // peel leading punctuation
    std::size_t a = 0;
    while (a < word.size() && is_punct(word[a])) out.push_back(std::string(1, word[a++]));
    // peel trailing punctuation
    std::size_t b = word.size();
    while (b > a && is_punct(word[b - 1])) --b;
    if (b > a) out.push_back(word.substr(a, b - a));
    for (std::size_t k = b; k < word.size(); ++k) out.push_back(std::string(1, word[k]));
    i = j;
  }
  return out;
}

int Vocabulary::add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  const int id = kReserved + static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= size())
    throw std::out_of_range("Vocabulary: id " + std::to_string(id) + " out of range");
  if (id < kReserved) return kReservedNames[id];
  return tokens_[static_cast<std::size_t>(id - kReserved)];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("Vocabulary::save: cannot open " + path);
  for (const auto& t : tokens_) os << t << '\n';
  if (!os) throw std::runtime_error("Vocabulary::save: write failed for " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("Vocabulary::load: cannot open " + path);
  Vocabulary v;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    v.add(line);
  }
  return v;
}

}  // namespace ger
