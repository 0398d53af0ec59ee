#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ger {

// Lowercase whitespace tokenizer; leading/trailing ASCII punctuation is split
// off into its own tokens so sentence boundaries survive for the rule-based
// triplet extractor.
std::vector<std::string> word_tokens(std::string_view text);

// Fixed reserved block, then corpus tokens in insertion order.
class Vocabulary {
 public:
  static constexpr int kCls = 0;
  static constexpr int kMs = 1;
  static constexpr int kMe = 2;
  static constexpr int kEnt = 3;
  static constexpr int kPad = 4;
  static constexpr int kUnk = 5;
  static constexpr int kReserved = 6;

  int add(const std::string& token);      // returns existing id if known
  int id_of(const std::string& token) const;  // kUnk when absent
  const std::string& token_of(int id) const;
  std::size_t size() const { return kReserved + tokens_.size(); }

  // One corpus token per line; line number gives the id after the reserved
  // block.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  template <typename Range>
  void add_all(const Range& tokens) {
    for (const auto& t : tokens) add(t);
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace ger
