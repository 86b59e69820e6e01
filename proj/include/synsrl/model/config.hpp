#pragma once

#include <map>
#include <string>

#include "synsrl/common.hpp"

namespace synsrl::model {

// How syntax enters the encoder: not at all, concatenated into the input,
// one attention head replaced by the dependency one-hot matrix (Lisa), or
// added to queries and values inside attention (RelAwe).
enum class Mode { None, Input, Lisa, RelAwe };

const char* mode_name(Mode m);
Mode mode_from_name(const std::string& name);

struct ModelConfig {
  Mode mode = Mode::None;
  // Selected syntax representations.
  bool use_dep = false;
  bool use_rel = false;
  bool use_deppath = false;
  bool use_relpath = false;

  // Embedding widths. Defaults suit a full-size run; desk-scale configs
  // override them.
  int d_w = 100;
  int d_t = 50;
  int d_p = 100;
  int d_dep = 50;
  int d_rel = 50;
  int d_deppath = 50;
  int d_relpath = 50;
  int lisa_rel_dim = 25;  // width of the relation embedding inside the Lisa head

  int d_ff = 800;
  int n_blocks = 10;
  int head_dim = 25;
  int lisa_layer = 5;      // 1-based block whose head 0 is replaced
  int relawe_layers = 5;   // blocks 1..relawe_layers get relation-aware heads

  double dropout_attn = 0.2;
  double dropout_res = 0.3;
  double dropout_ffn = 0.2;
  double label_smoothing = 0.1;

  // RelPath lookup filters.
  int relpath_max_dist = 4;
  int64_t relpath_min_freq = 10;

  // Width of the non-predicate feature part of the input.
  int d_f() const;
  int d_model() const { return d_f() + d_p; }
  int n_heads() const { return d_model() / head_dim; }

  bool needs_tree() const { return mode != Mode::None; }
  // Source resolution inside attention: RelAwe prefers path features over
  // plain head/relation ones; Lisa's E_R prefers the plain relation label.
  bool relawe_ed_from_deppath() const { return use_deppath; }
  bool relawe_er_from_relpath() const { return use_relpath; }
  bool has_relawe_ed() const { return use_deppath || use_dep; }
  bool has_relawe_er() const { return use_relpath || use_rel; }
  bool lisa_er_from_rel() const { return use_rel; }
  bool has_lisa_er() const { return use_rel || use_relpath; }

  void validate() const;  // throws ConfigError
};

// Key=value (de)serialization used by config files and model manifests.
std::map<std::string, std::string> config_to_kv(const ModelConfig& cfg);
ModelConfig config_from_kv(const std::map<std::string, std::string>& kv);

// Reads `key=value` lines; '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> read_kv_file(const std::string& path);
void write_kv_file(const std::string& path,
                   const std::map<std::string, std::string>& kv);

}  // namespace synsrl::model
