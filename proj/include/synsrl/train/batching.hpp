#pragma once

#include <cstdint>
#include <vector>

#include "synsrl/common.hpp"
#include "synsrl/tensor/rng.hpp"

namespace synsrl::train {

// Handle to one (sentence, predicate) training instance; `words` is the
// sentence length, counted once per instance.
struct InstanceKey {
  int32_t sentence = 0;
  int32_t pred_k = 0;
  int32_t words = 0;
};

// Shuffles the instances, then packs them greedily in order: a batch closes
// when the next instance would push it past the word budget. An instance
// larger than the whole budget forms a singleton batch.
inline std::vector<std::vector<InstanceKey>> make_batches(
    std::vector<InstanceKey> instances, int64_t word_budget, Rng& rng) {
  if (instances.empty()) throw Error("make_batches: no instances");
  if (word_budget < 1) throw Error("make_batches: word budget must be >= 1");
  for (size_t i = instances.size() - 1; i > 0; --i) {
    const size_t j = static_cast<size_t>(rng.below(i + 1));
    std::swap(instances[i], instances[j]);
  }
  std::vector<std::vector<InstanceKey>> batches;
  std::vector<InstanceKey> current;
  int64_t used = 0;
  for (const InstanceKey& k : instances) {
    if (!current.empty() && used + k.words > word_budget) {
      batches.push_back(std::move(current));
      current.clear();
      used = 0;
    }
    current.push_back(k);
    used += k.words;
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

// Deterministic per-epoch shuffle seed.
inline uint64_t epoch_seed(uint64_t base_seed, uint64_t epoch) {
  return base_seed ^ (0x9E3779B97F4A7C15ull * (epoch + 1));
}

inline uint64_t dropout_seed(uint64_t base_seed) {
  return base_seed ^ 0xD1B54A32D192ED03ull;
}

}  // namespace synsrl::train
