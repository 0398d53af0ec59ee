#include "ger/tokenize.hpp"

#include <algorithm>
#include <stdexcept>

namespace ger {

std::vector<std::string> mention_raw_tokens(const std::string& context_left,
                                            const std::string& mention,
                                            const std::string& context_right) {
  std::vector<std::string> out = word_tokens(context_left);
  for (auto& t : word_tokens(mention)) out.push_back(std::move(t));
  for (auto& t : word_tokens(context_right)) out.push_back(std::move(t));
  return out;
}

std::vector<std::string> entity_raw_tokens(const std::string& description) {
  return word_tokens(description);
}

TokenizedContext tokenize_mention(const std::string& context_left, const std::string& mention,
                                  const std::string& context_right, const Vocabulary& vocab,
                                  std::size_t max_len) {
  const std::vector<std::string> left = word_tokens(context_left);
  const std::vector<std::string> men = word_tokens(mention);
  const std::vector<std::string> right = word_tokens(context_right);

  if (men.empty()) throw std::invalid_argument("tokenize_mention: mention is empty");
  if (men.size() + 3 > max_len)
    throw std::invalid_argument("tokenize_mention: mention plus markers exceed max_len " +
                                std::to_string(max_len));

  // context budget, split evenly; unused halves flow to the other side
  const std::size_t budget = max_len - 3 - men.size();
  std::size_t l_take = std::min(left.size(), budget - budget / 2);
  std::size_t r_take = std::min(right.size(), budget / 2);
  r_take = std::min(right.size(), r_take + (budget - l_take - r_take));
  l_take = std::min(left.size(), l_take + (budget - l_take - r_take));
  const std::size_t l_drop = left.size() - l_take;

  TokenizedContext tc;
  tc.kind = ContextKind::Mention;
  tc.ids.reserve(3 + men.size() + l_take + r_take);
  tc.ids.push_back(Vocabulary::kCls);
  for (std::size_t i = l_drop; i < left.size(); ++i) tc.ids.push_back(vocab.id_of(left[i]));
  tc.ids.push_back(Vocabulary::kMs);
  tc.span_start = tc.ids.size();
  for (const auto& t : men) tc.ids.push_back(vocab.id_of(t));
  tc.span_end = tc.ids.size();
  tc.ids.push_back(Vocabulary::kMe);
  for (std::size_t i = 0; i < r_take; ++i) tc.ids.push_back(vocab.id_of(right[i]));

  tc.raw_to_pos.assign(left.size() + men.size() + right.size(), -1);
  for (std::size_t i = l_drop; i < left.size(); ++i)
    tc.raw_to_pos[i] = static_cast<long>(1 + (i - l_drop));
  for (std::size_t j = 0; j < men.size(); ++j)
    tc.raw_to_pos[left.size() + j] = static_cast<long>(tc.span_start + j);
  for (std::size_t k = 0; k < r_take; ++k)
    tc.raw_to_pos[left.size() + men.size() + k] = static_cast<long>(tc.span_end + 1 + k);
  return tc;
}

TokenizedContext tokenize_entity(const std::string& title, const std::string& description,
                                 const Vocabulary& vocab, std::size_t max_len) {
  const std::vector<std::string> ttl = word_tokens(title);
  const std::vector<std::string> desc = word_tokens(description);

  if (ttl.empty()) throw std::invalid_argument("tokenize_entity: title is empty");
  if (ttl.size() + 2 > max_len)
    throw std::invalid_argument("tokenize_entity: title plus markers exceed max_len " +
                                std::to_string(max_len));

  const std::size_t d_take = std::min(desc.size(), max_len - 2 - ttl.size());

  TokenizedContext tc;
  tc.kind = ContextKind::Entity;
  tc.ids.reserve(2 + ttl.size() + d_take);
  tc.ids.push_back(Vocabulary::kCls);
  tc.span_start = 1;
  for (const auto& t : ttl) tc.ids.push_back(vocab.id_of(t));
  tc.span_end = tc.ids.size();
  tc.ids.push_back(Vocabulary::kEnt);
  for (std::size_t i = 0; i < d_take; ++i) tc.ids.push_back(vocab.id_of(desc[i]));

  tc.raw_to_pos.assign(desc.size(), -1);
  for (std::size_t i = 0; i < d_take; ++i)
    tc.raw_to_pos[i] = static_cast<long>(tc.span_end + 1 + i);
  return tc;
}

}  // namespace ger
