#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "synsrl/tensor/tensor.hpp"

namespace synsrl::nn {

// Named binary archive used for checkpoints and embedding dumps. The file is
// a text manifest (one `name shape dtype offset` line per entry) followed by
// a DATA marker and the little-endian payloads. Numeric tensors are always
// stored as f64 regardless of the model's working precision; bookkeeping
// state (rng, counters) is stored as u64 words.
class Archive {
 public:
  struct F64Entry {
    Shape shape;
    std::vector<double> values;
  };
  struct U64Entry {
    std::vector<uint64_t> values;
  };

  void put_f64(const std::string& name, Shape shape,
               std::span<const double> values);
  void put_u64(const std::string& name, std::span<const uint64_t> values);

  bool has(const std::string& name) const;
  const F64Entry& get_f64(const std::string& name) const;
  const U64Entry& get_u64(const std::string& name) const;
  std::vector<std::string> names() const;

  // Writes to a temp file in the same directory, then renames over `path`.
  void save(const std::string& path) const;
  static Archive load(const std::string& path);

 private:
  std::map<std::string, F64Entry> f64_;
  std::map<std::string, U64Entry> u64_;
};

}  // namespace synsrl::nn
