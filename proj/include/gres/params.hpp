#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "gres/rng.hpp"
#include "gres/tape.hpp"
#include "gres/tensor.hpp"

namespace gres {

// Ordered name -> tensor map for trainable parameters and other persisted
// arrays. std::map keeps iteration deterministic, which the optimizer and
// the checkpoint format both rely on.
class ParamStore {
 public:
  using Map = std::map<std::string, Tensor>;

  void add(const std::string& name, Tensor t) {
    if (tensors_.count(name))
      throw std::invalid_argument("ParamStore: duplicate name '" + name + "'");
    tensors_.emplace(name, std::move(t));
  }

  bool contains(const std::string& name) const { return tensors_.count(name) > 0; }

  Tensor& at(const std::string& name) {
    auto it = tensors_.find(name);
    if (it == tensors_.end())
      throw std::out_of_range("ParamStore: no tensor '" + name + "'");
    return it->second;
  }

  const Tensor& at(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end())
      throw std::out_of_range("ParamStore: no tensor '" + name + "'");
    return it->second;
  }

  std::size_t size() const { return tensors_.size(); }
  std::size_t value_count() const {
    std::size_t n = 0;
    for (const auto& [k, v] : tensors_) n += v.size();
    return n;
  }

  Map::iterator begin() { return tensors_.begin(); }
  Map::iterator end() { return tensors_.end(); }
  Map::const_iterator begin() const { return tensors_.begin(); }
  Map::const_iterator end() const { return tensors_.end(); }

  friend bool operator==(const ParamStore& a, const ParamStore& b) {
    return a.tensors_ == b.tensors_;
  }

  // Flat named-tensor file: magic, version, count, then per tensor
  // (name, rank, dims, raw little-endian float64 values).
  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
    os.write("GRTC", 4);
    write_u32(os, 1);
    write_u32(os, static_cast<std::uint32_t>(tensors_.size()));
    for (const auto& [name, t] : tensors_) {
      write_u32(os, static_cast<std::uint32_t>(name.size()));
      os.write(name.data(), static_cast<std::streamsize>(name.size()));
      write_u32(os, static_cast<std::uint32_t>(t.rank()));
      for (std::size_t i = 0; i < t.rank(); ++i)
        write_u64(os, static_cast<std::uint64_t>(t.dim(i)));
      os.write(reinterpret_cast<const char*>(t.data()),
               static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("short write on checkpoint: " + path);
  }

  static ParamStore load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "GRTC", 4) != 0)
      throw std::runtime_error("bad checkpoint magic in " + path);
    std::uint32_t version = read_u32(is);
    if (version != 1)
      throw std::runtime_error("unsupported checkpoint version in " + path);
    std::uint32_t count = read_u32(is);
    ParamStore ps;
    for (std::uint32_t i = 0; i < count; ++i) {
      std::uint32_t namelen = read_u32(is);
      std::string name(namelen, '\0');
      is.read(name.data(), namelen);
      std::uint32_t rank = read_u32(is);
      std::vector<std::size_t> shape(rank);
      for (auto& d : shape) d = static_cast<std::size_t>(read_u64(is));
      Tensor t(shape);
      is.read(reinterpret_cast<char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
      if (!is) throw std::runtime_error("truncated checkpoint: " + path);
      ps.add(name, std::move(t));
    }
    return ps;
  }

 private:
  static void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<char*>(b), 4);
  }
  static void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<char*>(b), 8);
  }
  static std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  static std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  Map tensors_;
};

// Parameters registered on a tape for one forward/backward pass.
struct ParamVars {
  std::map<std::string, Var> vars;

  Var at(const std::string& name) const {
    auto it = vars.find(name);
    if (it == vars.end())
      throw std::out_of_range("ParamVars: no var '" + name + "'");
    return it->second;
  }
};

inline ParamVars register_params(Tape& tape, const ParamStore& params) {
  ParamVars pv;
  for (const auto& [name, t] : params) pv.vars.emplace(name, tape.leaf(t));
  return pv;
}

// Gradients per parameter after a backward pass.
inline std::map<std::string, Tensor> collect_grads(const Tape& tape, const ParamVars& pv) {
  std::map<std::string, Tensor> g;
  for (const auto& [name, var] : pv.vars) g.emplace(name, tape.grad(var));
  return g;
}

inline Tensor glorot_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Tensor t({fan_in, fan_out});
  double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-s, s);
  return t;
}

inline Tensor normal_init(std::vector<std::size_t> shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal() * stddev;
  return t;
}

}  // namespace gres
