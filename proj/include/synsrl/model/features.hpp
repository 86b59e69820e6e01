#pragma once

#include <cstdint>
#include <vector>

namespace synsrl::model {

// Everything one (sentence, predicate) instance feeds the encoder: vocab ids
// per token plus the gold role targets. Syntax arrays are empty when the
// mode does not use them; otherwise they carry UNK where the tree gave no
// answer (pruned slots, filtered paths).
struct InstanceFeatures {
  int n = 0;                // sentence length
  int predicate_index = 0;  // 0-based token index
  std::vector<int32_t> word_ids;
  std::vector<int32_t> pos_ids;
  std::vector<int32_t> pred_flags;  // 1 on the predicate token, 0 elsewhere
  std::vector<int32_t> dep_ids;
  std::vector<int32_t> rel_ids;
  std::vector<int32_t> deppath_ids;
  std::vector<int32_t> relpath_ids;
  std::vector<int32_t> head_col;  // one-hot column per token (Lisa matrix)
  std::vector<int32_t> role_ids;  // gold targets; may be empty at predict time
};

}  // namespace synsrl::model
