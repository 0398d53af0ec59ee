#pragma once

// Checkpoint files are a flat list of named tensors:
//
//   magic "GERTNSR1"
//   u64 entry count
//   per entry: u32 name length, name bytes,
//              u64 rows, u64 cols,
//              rows*cols IEEE-754 float64 values
//
// All integers and floats are little-endian. Round-trips are bit-exact.

#include "ger/tensor.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ger {

using NamedTensors = std::vector<std::pair<std::string, ad::Tensor>>;

void save_tensors(const std::string& path, const NamedTensors& tensors);
NamedTensors load_tensors(const std::string& path);

// Registry of live parameter tensors, keyed by name in insertion order.
class ParamRegistry {
 public:
  void add(std::string name, ad::Tensor* t);
  const std::vector<std::pair<std::string, ad::Tensor*>>& items() const { return items_; }
  ad::Tensor* find(const std::string& name) const;

  void save(const std::string& path) const;
  // Loads values into registered tensors; every registered name must be
  // present with a matching shape. Extra entries in the file are ignored.
  void load_from(const NamedTensors& entries);

 private:
  std::vector<std::pair<std::string, ad::Tensor*>> items_;
  std::map<std::string, std::size_t> by_name_;
};

// FNV-1a over the file bytes, used to tie entity indexes to the checkpoint
// that produced them.
std::uint64_t file_fingerprint(const std::string& path);
std::string fingerprint_hex(std::uint64_t fp);

}  // namespace ger
