#include "ger/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ger {

namespace {

constexpr char kMagic[8] = {'G', 'E', 'R', 'T', 'N', 'S', 'R', '1'};

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

void put_f64(std::ostream& os, double d) { put_u64(os, std::bit_cast<std::uint64_t>(d)); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace

void save_tensors(const std::string& path, const NamedTensors& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_tensors: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  put_u64(os, tensors.size());
  for (const auto& [name, t] : tensors) {
    put_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(os, t.rows);
    put_u64(os, t.cols);
    for (double d : t.v) put_f64(os, d);
  }
  if (!os) throw std::runtime_error("save_tensors: write failed for " + path);
}

NamedTensors load_tensors(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_tensors: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_tensors: " + path + " is not a checkpoint file");
  const std::uint64_t count = get_u64(is);
  NamedTensors out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t len = get_u32(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    const std::uint64_t rows = get_u64(is);
    const std::uint64_t cols = get_u64(is);
    ad::Tensor t(rows, cols);
    for (auto& d : t.v) d = get_f64(is);
    if (!is) throw std::runtime_error("load_tensors: truncated file " + path);
    out.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

void ParamRegistry::add(std::string name, ad::Tensor* t) {
  if (by_name_.count(name)) throw std::invalid_argument("ParamRegistry: duplicate name " + name);
  by_name_[name] = items_.size();
  items_.emplace_back(std::move(name), t);
}

ad::Tensor* ParamRegistry::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : items_[it->second].second;
}

void ParamRegistry::save(const std::string& path) const {
  NamedTensors out;
  out.reserve(items_.size());
  for (const auto& [name, t] : items_) out.emplace_back(name, *t);
  save_tensors(path, out);
}

void ParamRegistry::load_from(const NamedTensors& entries) {
  std::map<std::string, const ad::Tensor*> index;
  for (const auto& [name, t] : entries) index[name] = &t;
  for (auto& [name, dst] : items_) {
    auto it = index.find(name);
    if (it == index.end())
      throw std::runtime_error("checkpoint is missing tensor " + name);
    if (!dst->same_shape(*it->second))
      throw std::runtime_error("checkpoint tensor " + name + " has shape " +
                               std::to_string(it->second->rows) + "x" +
                               std::to_string(it->second->cols) + ", expected " +
                               std::to_string(dst->rows) + "x" + std::to_string(dst->cols));
    *dst = *it->second;
  }
}

std::uint64_t file_fingerprint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("file_fingerprint: cannot open " + path);
  std::uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!is) break;
  }
  return h;
}

std::string fingerprint_hex(std::uint64_t fp) {
  static const char* hexd = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = hexd[fp & 0xf];
    fp >>= 4;
  }
  return s;
}

}  // namespace ger
