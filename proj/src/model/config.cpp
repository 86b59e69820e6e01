#include "synsrl/model/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace synsrl::model {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::None: return "none";
    case Mode::Input: return "input";
    case Mode::Lisa: return "lisa";
    case Mode::RelAwe: return "relawe";
  }
  return "?";
}

Mode mode_from_name(const std::string& name) {
  if (name == "none") return Mode::None;
  if (name == "input") return Mode::Input;
  if (name == "lisa") return Mode::Lisa;
  if (name == "relawe") return Mode::RelAwe;
  throw ConfigError("unknown mode '" + name +
                    "' (expected none|input|lisa|relawe)");
}

int ModelConfig::d_f() const {
  int d = d_w + d_t;
  if (mode == Mode::Input) {
    if (use_dep) d += d_dep;
    if (use_rel) d += d_rel;
    if (use_deppath) d += d_deppath;
    if (use_relpath) d += d_relpath;
  }
  return d;
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) {
      throw ConfigError(std::string(name) + " must be positive, got " +
                        std::to_string(v));
    }
  };
  positive(d_w, "d_w");
  positive(d_t, "d_t");
  positive(d_p, "d_p");
  positive(d_ff, "d_ff");
  positive(n_blocks, "n_blocks");
  positive(head_dim, "head_dim");
  if (d_model() % head_dim != 0) {
    throw ConfigError("d_model " + std::to_string(d_model()) +
                      " is not divisible by head_dim " +
                      std::to_string(head_dim));
  }
  for (auto [rate, name] : {std::pair{dropout_attn, "dropout_attn"},
                            {dropout_res, "dropout_res"},
                            {dropout_ffn, "dropout_ffn"}}) {
    if (rate < 0.0 || rate >= 1.0) {
      throw ConfigError(std::string(name) + " must be in [0,1), got " +
                        std::to_string(rate));
    }
  }
  if (label_smoothing < 0.0 || label_smoothing >= 1.0) {
    throw ConfigError("label_smoothing must be in [0,1), got " +
                      std::to_string(label_smoothing));
  }
  const bool any_repr = use_dep || use_rel || use_deppath || use_relpath;
  switch (mode) {
    case Mode::None:
      if (any_repr) {
        throw ConfigError("mode none takes no --repr selections");
      }
      break;
    case Mode::Input:
      if (!any_repr) {
        throw ConfigError("mode input needs at least one --repr selection");
      }
      if (use_dep) positive(d_dep, "d_dep");
      if (use_rel) positive(d_rel, "d_rel");
      if (use_deppath) positive(d_deppath, "d_deppath");
      if (use_relpath) positive(d_relpath, "d_relpath");
      break;
    case Mode::Lisa:
      if (use_deppath) {
        throw ConfigError("mode lisa does not use deppath (the replaced "
                          "head already encodes heads); drop --repr deppath");
      }
      if (use_rel && use_relpath) {
        throw ConfigError("mode lisa: pick one of rel|relpath for the "
                          "relation embedding");
      }
      if (lisa_layer < 1 || lisa_layer > n_blocks) {
        throw ConfigError("lisa_layer " + std::to_string(lisa_layer) +
                          " outside [1, " + std::to_string(n_blocks) + "]");
      }
      if (has_lisa_er()) positive(lisa_rel_dim, "lisa_rel_dim");
      break;
    case Mode::RelAwe:
      if (!any_repr) {
        throw ConfigError("mode relawe needs at least one --repr selection");
      }
      if (use_dep && use_deppath) {
        throw ConfigError("mode relawe: pick one of dep|deppath for E_D");
      }
      if (use_rel && use_relpath) {
        throw ConfigError("mode relawe: pick one of rel|relpath for E_R");
      }
      if (relawe_layers < 0 || relawe_layers > n_blocks) {
        throw ConfigError("relawe_layers " + std::to_string(relawe_layers) +
                          " outside [0, " + std::to_string(n_blocks) + "]");
      }
      break;
  }
}

namespace {

int to_int(const std::string& key, const std::string& value) {
  int v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw ConfigError(key + ": expected integer, got '" + value + "'");
  }
  return v;
}

int64_t to_int64(const std::string& key, const std::string& value) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw ConfigError(key + ": expected integer, got '" + value + "'");
  }
  return v;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected number, got '" + value + "'");
  }
}

std::string repr_to_string(const ModelConfig& cfg) {
  std::string out;
  auto push = [&out](const char* name) {
    if (!out.empty()) out += ',';
    out += name;
  };
  if (cfg.use_dep) push("dep");
  if (cfg.use_rel) push("rel");
  if (cfg.use_deppath) push("deppath");
  if (cfg.use_relpath) push("relpath");
  return out;
}

void apply_repr(ModelConfig& cfg, const std::string& list) {
  cfg.use_dep = cfg.use_rel = cfg.use_deppath = cfg.use_relpath = false;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "dep") {
      cfg.use_dep = true;
    } else if (item == "rel") {
      cfg.use_rel = true;
    } else if (item == "deppath") {
      cfg.use_deppath = true;
    } else if (item == "relpath") {
      cfg.use_relpath = true;
    } else {
      throw ConfigError("unknown representation '" + item +
                        "' (expected dep|rel|deppath|relpath)");
    }
  }
}

}  // namespace

std::map<std::string, std::string> config_to_kv(const ModelConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["mode"] = mode_name(cfg.mode);
  kv["repr"] = repr_to_string(cfg);
  kv["d_w"] = std::to_string(cfg.d_w);
  kv["d_t"] = std::to_string(cfg.d_t);
  kv["d_p"] = std::to_string(cfg.d_p);
  kv["d_dep"] = std::to_string(cfg.d_dep);
  kv["d_rel"] = std::to_string(cfg.d_rel);
  kv["d_deppath"] = std::to_string(cfg.d_deppath);
  kv["d_relpath"] = std::to_string(cfg.d_relpath);
  kv["lisa_rel_dim"] = std::to_string(cfg.lisa_rel_dim);
  kv["d_ff"] = std::to_string(cfg.d_ff);
  kv["n_blocks"] = std::to_string(cfg.n_blocks);
  kv["head_dim"] = std::to_string(cfg.head_dim);
  kv["lisa_layer"] = std::to_string(cfg.lisa_layer);
  kv["relawe_layers"] = std::to_string(cfg.relawe_layers);
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  kv["dropout_attn"] = fmt(cfg.dropout_attn);
  kv["dropout_res"] = fmt(cfg.dropout_res);
  kv["dropout_ffn"] = fmt(cfg.dropout_ffn);
  kv["label_smoothing"] = fmt(cfg.label_smoothing);
  kv["relpath_max_dist"] = std::to_string(cfg.relpath_max_dist);
  kv["relpath_min_freq"] = std::to_string(cfg.relpath_min_freq);
  return kv;
}

ModelConfig config_from_kv(const std::map<std::string, std::string>& kv) {
  ModelConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "mode") {
      cfg.mode = mode_from_name(value);
    } else if (key == "repr") {
      apply_repr(cfg, value);
    } else if (key == "d_w") {
      cfg.d_w = to_int(key, value);
    } else if (key == "d_t") {
      cfg.d_t = to_int(key, value);
    } else if (key == "d_p") {
      cfg.d_p = to_int(key, value);
    } else if (key == "d_dep") {
      cfg.d_dep = to_int(key, value);
    } else if (key == "d_rel") {
      cfg.d_rel = to_int(key, value);
    } else if (key == "d_deppath") {
      cfg.d_deppath = to_int(key, value);
    } else if (key == "d_relpath") {
      cfg.d_relpath = to_int(key, value);
    } else if (key == "lisa_rel_dim") {
      cfg.lisa_rel_dim = to_int(key, value);
    } else if (key == "d_ff") {
      cfg.d_ff = to_int(key, value);
    } else if (key == "n_blocks") {
      cfg.n_blocks = to_int(key, value);
    } else if (key == "head_dim") {
      cfg.head_dim = to_int(key, value);
    } else if (key == "lisa_layer") {
      cfg.lisa_layer = to_int(key, value);
    } else if (key == "relawe_layers") {
      cfg.relawe_layers = to_int(key, value);
    } else if (key == "dropout_attn") {
      cfg.dropout_attn = to_double(key, value);
    } else if (key == "dropout_res") {
      cfg.dropout_res = to_double(key, value);
    } else if (key == "dropout_ffn") {
      cfg.dropout_ffn = to_double(key, value);
    } else if (key == "label_smoothing") {
      cfg.label_smoothing = to_double(key, value);
    } else if (key == "relpath_max_dist") {
      cfg.relpath_max_dist = to_int(key, value);
    } else if (key == "relpath_min_freq") {
      cfg.relpath_min_freq = to_int64(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    const size_t eq = line.find('=', start);
    if (eq == std::string::npos) {
      throw ConfigError(path + " line " + std::to_string(line_no) +
                        ": expected key=value");
    }
    std::string key = line.substr(start, eq - start);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) {
      key.pop_back();
    }
    size_t vstart = line.find_first_not_of(" \t", eq + 1);
    std::string value =
        vstart == std::string::npos ? "" : line.substr(vstart);
    kv[key] = value;
  }
  return kv;
}

void write_kv_file(const std::string& path,
                   const std::map<std::string, std::string>& kv) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& [key, value] : kv) out << key << '=' << value << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace synsrl::model
