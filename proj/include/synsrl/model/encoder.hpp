#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "synsrl/model/config.hpp"
#include "synsrl/model/features.hpp"
#include "synsrl/syntax/vocab.hpp"
#include "synsrl/tensor/tensor.hpp"

namespace synsrl::model {

using nn::Tape;
using nn::Tensor;

inline std::string block_prefix(int block) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "block%02d.", block);
  return buf;
}

inline std::string head_prefix(int head) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "head%02d.", head);
  return buf;
}

template <class T>
struct Params {
  std::map<std::string, Tensor<T>> by_name;

  bool has(const std::string& name) const { return by_name.count(name) > 0; }
  Tensor<T>& at(const std::string& name) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw Error("missing parameter " + name);
    return it->second;
  }
  const Tensor<T>& at(const std::string& name) const {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw Error("missing parameter " + name);
    return it->second;
  }
  void zero_grads() {
    for (auto& [name, t] : by_name) t.zero_grad();
  }
};

// Input width of a block's output projection; the Lisa block's is widened by
// the relation embedding concatenated into the replaced head.
inline int wo_in_width(const ModelConfig& cfg, int block) {
  int w = cfg.n_heads() * cfg.head_dim;
  if (cfg.mode == Mode::Lisa && block == cfg.lisa_layer &&
      cfg.has_lisa_er()) {
    w += cfg.lisa_rel_dim;
  }
  return w;
}

namespace detail {

template <class T>
Tensor<T> new_param(Params<T>& p, const std::string& name, nn::Shape shape) {
  Tensor<T> t = Tensor<T>::zeros(std::move(shape));
  t.set_requires_grad(true);
  p.by_name.emplace(name, t);
  return t;
}

// Embedding rows ~ N(0, 1/sqrt(width)); linear weights ~ N(0, 1/fan_in);
// biases and layer-norm offsets zero, layer-norm gains one.
template <class T>
void add_embedding(Params<T>& p, Rng& rng, const std::string& name,
                   int64_t rows, int64_t width) {
  Tensor<T> t = new_param(p, name, {rows, width});
  t.fill_normal(rng, 0.0, std::pow(static_cast<double>(width), -0.25));
}

template <class T>
void add_linear(Params<T>& p, Rng& rng, const std::string& name,
                int64_t fan_in, int64_t fan_out) {
  Tensor<T> w = new_param(p, name + ".w", {fan_in, fan_out});
  w.fill_normal(rng, 0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
  new_param(p, name + ".b", {fan_out});
}

template <class T>
void add_layer_norm(Params<T>& p, const std::string& name, int64_t width) {
  Tensor<T> g = new_param(p, name + ".gain", {width});
  for (auto& v : g.raw()) v = T(1);
  new_param(p, name + ".bias", {width});
}

}  // namespace detail

template <class T>
Params<T> init_params(const ModelConfig& cfg, const syntax::VocabSet& vocabs,
                      uint64_t seed) {
  cfg.validate();
  Params<T> p;
  Rng rng(seed);
  detail::add_embedding(p, rng, "emb.word", vocabs.word.size(), cfg.d_w);
  detail::add_embedding(p, rng, "emb.pos", vocabs.pos.size(), cfg.d_t);
  detail::add_embedding(p, rng, "emb.pred", 2, cfg.d_p);
  if (cfg.mode == Mode::Input) {
    if (cfg.use_dep) {
      detail::add_embedding(p, rng, "emb.dep", vocabs.dep.size(), cfg.d_dep);
    }
    if (cfg.use_rel) {
      detail::add_embedding(p, rng, "emb.rel", vocabs.rel.size(), cfg.d_rel);
    }
    if (cfg.use_deppath) {
      detail::add_embedding(p, rng, "emb.deppath", vocabs.deppath.size(),
                            cfg.d_deppath);
    }
    if (cfg.use_relpath) {
      detail::add_embedding(p, rng, "emb.relpath", vocabs.relpath.size(),
                            cfg.d_relpath);
    }
  } else if (cfg.mode == Mode::RelAwe) {
    if (cfg.has_relawe_ed()) {
      if (cfg.relawe_ed_from_deppath()) {
        detail::add_embedding(p, rng, "emb.deppath", vocabs.deppath.size(),
                              cfg.d_deppath);
      } else {
        detail::add_embedding(p, rng, "emb.dep", vocabs.dep.size(),
                              cfg.d_dep);
      }
    }
    if (cfg.has_relawe_er()) {
      if (cfg.relawe_er_from_relpath()) {
        detail::add_embedding(p, rng, "emb.relpath", vocabs.relpath.size(),
                              cfg.d_relpath);
      } else {
        detail::add_embedding(p, rng, "emb.rel", vocabs.rel.size(),
                              cfg.d_rel);
      }
    }
  } else if (cfg.mode == Mode::Lisa && cfg.has_lisa_er()) {
    detail::add_embedding(
        p, rng, "lisa.emb_rel",
        cfg.lisa_er_from_rel() ? vocabs.rel.size() : vocabs.relpath.size(),
        cfg.lisa_rel_dim);
  }
  const int dm = cfg.d_model();
  for (int b = 1; b <= cfg.n_blocks; ++b) {
    const std::string bp = block_prefix(b);
    detail::add_linear(p, rng, bp + "ffn.l1", dm, cfg.d_ff);
    detail::add_linear(p, rng, bp + "ffn.l2", cfg.d_ff, dm);
    detail::add_layer_norm(p, bp + "ln1", dm);
    for (int h = 0; h < cfg.n_heads(); ++h) {
      const std::string hp = bp + head_prefix(h);
      const bool lisa_here =
          cfg.mode == Mode::Lisa && b == cfg.lisa_layer && h == 0;
      if (!lisa_here) {
        detail::add_linear(p, rng, hp + "q", dm, cfg.head_dim);
        detail::add_linear(p, rng, hp + "k", dm, cfg.head_dim);
      }
      detail::add_linear(p, rng, hp + "v", dm, cfg.head_dim);
    }
    detail::add_linear(p, rng, bp + "attn.o", wo_in_width(cfg, b), dm);
    detail::add_layer_norm(p, bp + "ln2", dm);
    if (cfg.mode == Mode::RelAwe && b <= cfg.relawe_layers) {
      if (cfg.has_relawe_ed()) {
        const int w =
            cfg.relawe_ed_from_deppath() ? cfg.d_deppath : cfg.d_dep;
        Tensor<T> wd = detail::new_param(p, bp + "syn.wd", {w, cfg.head_dim});
        wd.fill_normal(rng, 0.0, 1.0 / std::sqrt(static_cast<double>(w)));
      }
      if (cfg.has_relawe_er()) {
        const int w =
            cfg.relawe_er_from_relpath() ? cfg.d_relpath : cfg.d_rel;
        Tensor<T> wr = detail::new_param(p, bp + "syn.wr", {w, cfg.head_dim});
        wr.fill_normal(rng, 0.0, 1.0 / std::sqrt(static_cast<double>(w)));
      }
    }
  }
  detail::add_linear(p, rng, "out", dm, vocabs.role.size());
  return p;
}

template <class T>
Tensor<T> sinusoidal_positions(int64_t n, int64_t d) {
  if (d % 2 != 0) {
    throw OddWidth("positional embedding width must be even, got " +
                   std::to_string(d));
  }
  Tensor<T> out = Tensor<T>::zeros({n, d});
  auto v = out.raw();
  for (int64_t t = 0; t < n; ++t) {
    for (int64_t i = 0; i < d / 2; ++i) {
      const double angle =
          static_cast<double>(t) /
          std::pow(10000.0, static_cast<double>(2 * i) /
                                static_cast<double>(d));
      v[static_cast<size_t>(t * d + 2 * i)] = static_cast<T>(std::sin(angle));
      v[static_cast<size_t>(t * d + 2 * i + 1)] =
          static_cast<T>(std::cos(angle));
    }
  }
  return out;
}

// Captures one head's post-softmax weight matrix (or the Lisa one-hot rows)
// during a forward pass. Set block (1-based) and head before the call.
template <class T>
struct AttnCapture {
  int block = 0;
  int head = -1;
  int n = 0;
  bool lisa = false;
  bool captured = false;
  std::vector<T> weights;  // row-major n x n
};

template <class T>
Tensor<T> ffn(const Tensor<T>& x, const Tensor<T>& w1, const Tensor<T>& b1,
              const Tensor<T>& w2, const Tensor<T>& b2, double rate,
              bool train_mode, Rng& rng, Tape<T>* tape) {
  Tensor<T> h = nn::relu(nn::affine(x, w1, b1, tape), tape);
  h = nn::dropout(h, rate, train_mode, rng, tape);
  return nn::affine(h, w2, b2, tape);
}

template <class T>
Tensor<T> scaled_dot_attention(const Tensor<T>& q, const Tensor<T>& k,
                               const Tensor<T>& v, double rate,
                               bool train_mode, Rng& rng, Tape<T>* tape,
                               std::vector<T>* attn_out = nullptr) {
  if (q.dim(1) != k.dim(1)) {
    throw ShapeMismatch("attention: query width " + std::to_string(q.dim(1)) +
                        " vs key width " + std::to_string(k.dim(1)));
  }
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(q.dim(1)));
  Tensor<T> scores = nn::scale(
      nn::matmul(q, nn::transpose_last_two(k, tape), tape), inv_sqrt, tape);
  Tensor<T> a = nn::softmax(scores, tape);
  if (attn_out) attn_out->assign(a.data().begin(), a.data().end());
  a = nn::dropout(a, rate, train_mode, rng, tape);
  return nn::matmul(a, v, tape);
}

// Eq-style replaced head: rows of (V ⊕ E_R) gathered by the one-hot head
// matrix; no softmax, no scaling. er may be undefined (no relation table).
template <class T>
Tensor<T> lisa_head(const Tensor<T>& one_hot, const Tensor<T>& v,
                    const Tensor<T>& er, Tape<T>* tape) {
  const Tensor<T> payload = er.defined()
                                ? nn::concat<T>({v, er}, 1, tape)
                                : v;
  return nn::matmul(one_hot, payload, tape);
}

// softmax((Q + E_D + E_R) K^T / sqrt(d_k)) (V + E_D + E_R); K unmodified.
// Either syntax tensor may be undefined and is then skipped.
template <class T>
Tensor<T> relaware_attention(const Tensor<T>& q, const Tensor<T>& k,
                             const Tensor<T>& v, const Tensor<T>& ed,
                             const Tensor<T>& er, double rate,
                             bool train_mode, Rng& rng, Tape<T>* tape,
                             std::vector<T>* attn_out = nullptr) {
  Tensor<T> q2 = q;
  Tensor<T> v2 = v;
  if (ed.defined()) {
    q2 = nn::add(q2, ed, tape);
    v2 = nn::add(v2, ed, tape);
  }
  if (er.defined()) {
    q2 = nn::add(q2, er, tape);
    v2 = nn::add(v2, er, tape);
  }
  return scaled_dot_attention(q2, k, v2, rate, train_mode, rng, tape,
                              attn_out);
}

namespace detail {

template <class T>
Tensor<T> one_hot_tensor(const InstanceFeatures& feat) {
  const int n = feat.n;
  if (static_cast<int>(feat.head_col.size()) != n) {
    throw LengthMismatch("one-hot head columns missing: " +
                         std::to_string(feat.head_col.size()) + " for " +
                         std::to_string(n) + " tokens");
  }
  Tensor<T> m = Tensor<T>::zeros({n, n});
  auto v = m.raw();
  for (int i = 0; i < n; ++i) {
    const int c = feat.head_col[static_cast<size_t>(i)];
    if (c < 0 || c >= n) {
      throw IndexOutOfRange("one-hot column " + std::to_string(c) +
                            " outside [0, " + std::to_string(n) + ")");
    }
    v[static_cast<size_t>(i) * n + c] = T(1);
  }
  return m;
}

inline std::span<const int32_t> required_ids(const std::vector<int32_t>& ids,
                                             int n, const char* what) {
  if (static_cast<int>(ids.size()) != n) {
    throw LengthMismatch(std::string(what) + " ids: " +
                         std::to_string(ids.size()) + " for " +
                         std::to_string(n) + " tokens (tree features "
                         "missing?)");
  }
  return ids;
}

}  // namespace detail

template <class T>
Tensor<T> multi_head(const Tensor<T>& x, const InstanceFeatures& feat,
                     const ModelConfig& cfg, Params<T>& params, int block,
                     bool train_mode, Rng& rng, Tape<T>* tape,
                     AttnCapture<T>* capture = nullptr) {
  const std::string bp = block_prefix(block);
  const int heads = cfg.n_heads();
  Tensor<T> edp, erp;
  if (cfg.mode == Mode::RelAwe && block <= cfg.relawe_layers) {
    if (cfg.has_relawe_ed()) {
      const bool dp = cfg.relawe_ed_from_deppath();
      Tensor<T> rows = nn::embedding_lookup(
          params.at(dp ? "emb.deppath" : "emb.dep"),
          detail::required_ids(dp ? feat.deppath_ids : feat.dep_ids, feat.n,
                               dp ? "deppath" : "dep"),
          tape);
      edp = nn::matmul(rows, params.at(bp + "syn.wd"), tape);
    }
    if (cfg.has_relawe_er()) {
      const bool rp = cfg.relawe_er_from_relpath();
      Tensor<T> rows = nn::embedding_lookup(
          params.at(rp ? "emb.relpath" : "emb.rel"),
          detail::required_ids(rp ? feat.relpath_ids : feat.rel_ids, feat.n,
                               rp ? "relpath" : "rel"),
          tape);
      erp = nn::matmul(rows, params.at(bp + "syn.wr"), tape);
    }
  }
  std::vector<Tensor<T>> parts;
  parts.reserve(static_cast<size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const std::string hp = bp + head_prefix(h);
    const bool lisa_here =
        cfg.mode == Mode::Lisa && block == cfg.lisa_layer && h == 0;
    const bool want_capture =
        capture && capture->block == block && capture->head == h;
    if (lisa_here) {
      Tensor<T> v =
          nn::affine(x, params.at(hp + "v.w"), params.at(hp + "v.b"), tape);
      Tensor<T> er;
      if (cfg.has_lisa_er()) {
        const bool rel = cfg.lisa_er_from_rel();
        er = nn::embedding_lookup(
            params.at("lisa.emb_rel"),
            detail::required_ids(rel ? feat.rel_ids : feat.relpath_ids,
                                 feat.n, rel ? "rel" : "relpath"),
            tape);
      }
      Tensor<T> m = detail::one_hot_tensor<T>(feat);
      if (want_capture) {
        capture->weights.assign(m.data().begin(), m.data().end());
        capture->n = feat.n;
        capture->lisa = true;
        capture->captured = true;
      }
      parts.push_back(lisa_head(m, v, er, tape));
    } else {
      Tensor<T> q =
          nn::affine(x, params.at(hp + "q.w"), params.at(hp + "q.b"), tape);
      Tensor<T> k =
          nn::affine(x, params.at(hp + "k.w"), params.at(hp + "k.b"), tape);
      Tensor<T> v =
          nn::affine(x, params.at(hp + "v.w"), params.at(hp + "v.b"), tape);
      std::vector<T>* attn_out = want_capture ? &capture->weights : nullptr;
      Tensor<T> out;
      if (cfg.mode == Mode::RelAwe && block <= cfg.relawe_layers) {
        out = relaware_attention(q, k, v, edp, erp, cfg.dropout_attn,
                                 train_mode, rng, tape, attn_out);
      } else {
        out = scaled_dot_attention(q, k, v, cfg.dropout_attn, train_mode,
                                   rng, tape, attn_out);
      }
      if (want_capture) {
        capture->n = feat.n;
        capture->lisa = false;
        capture->captured = true;
      }
      parts.push_back(out);
    }
  }
  Tensor<T> cat = nn::concat(std::span<const Tensor<T>>(parts), 1, tape);
  return nn::affine(cat, params.at(bp + "attn.o.w"),
                    params.at(bp + "attn.o.b"), tape);
}

// One block with the swapped sublayer order: FFN first, attention second,
// each wrapped as LayerNorm(input + dropout(sublayer(input))).
template <class T>
Tensor<T> encoder_block(const Tensor<T>& x, const InstanceFeatures& feat,
                        const ModelConfig& cfg, Params<T>& params, int block,
                        bool train_mode, Rng& rng, Tape<T>* tape,
                        AttnCapture<T>* capture = nullptr) {
  const std::string bp = block_prefix(block);
  const T ln_eps = T(1e-6);
  Tensor<T> f =
      ffn(x, params.at(bp + "ffn.l1.w"), params.at(bp + "ffn.l1.b"),
          params.at(bp + "ffn.l2.w"), params.at(bp + "ffn.l2.b"),
          cfg.dropout_ffn, train_mode, rng, tape);
  Tensor<T> y = nn::layer_norm(
      nn::add(x, nn::dropout(f, cfg.dropout_res, train_mode, rng, tape),
              tape),
      params.at(bp + "ln1.gain"), params.at(bp + "ln1.bias"), ln_eps, tape);
  Tensor<T> a = multi_head(y, feat, cfg, params, block, train_mode, rng, tape,
                           capture);
  Tensor<T> z = nn::layer_norm(
      nn::add(y, nn::dropout(a, cfg.dropout_res, train_mode, rng, tape),
              tape),
      params.at(bp + "ln2.gain"), params.at(bp + "ln2.bias"), ln_eps, tape);
  return z;
}

// (word ⊕ POS) ⊕ predicate indicator ⊕ Input-mode syntax embeddings, with
// the sinusoidal position matrix added on top.
template <class T>
Tensor<T> build_input(const InstanceFeatures& feat, const ModelConfig& cfg,
                      Params<T>& params, Tape<T>* tape) {
  const int n = feat.n;
  std::vector<Tensor<T>> parts;
  parts.push_back(nn::embedding_lookup(
      params.at("emb.word"), detail::required_ids(feat.word_ids, n, "word"),
      tape));
  parts.push_back(nn::embedding_lookup(
      params.at("emb.pos"), detail::required_ids(feat.pos_ids, n, "pos"),
      tape));
  parts.push_back(nn::embedding_lookup(
      params.at("emb.pred"),
      detail::required_ids(feat.pred_flags, n, "predicate flag"), tape));
  if (cfg.mode == Mode::Input) {
    if (cfg.use_dep) {
      parts.push_back(nn::embedding_lookup(
          params.at("emb.dep"), detail::required_ids(feat.dep_ids, n, "dep"),
          tape));
    }
    if (cfg.use_rel) {
      parts.push_back(nn::embedding_lookup(
          params.at("emb.rel"), detail::required_ids(feat.rel_ids, n, "rel"),
          tape));
    }
    if (cfg.use_deppath) {
      parts.push_back(nn::embedding_lookup(
          params.at("emb.deppath"),
          detail::required_ids(feat.deppath_ids, n, "deppath"), tape));
    }
    if (cfg.use_relpath) {
      parts.push_back(nn::embedding_lookup(
          params.at("emb.relpath"),
          detail::required_ids(feat.relpath_ids, n, "relpath"), tape));
    }
  }
  Tensor<T> x = nn::concat(std::span<const Tensor<T>>(parts), 1, tape);
  if (x.dim(1) != cfg.d_model()) {
    throw ShapeMismatch("input width " + std::to_string(x.dim(1)) +
                        " != d_model " + std::to_string(cfg.d_model()));
  }
  return nn::add(x, sinusoidal_positions<T>(n, cfg.d_model()), tape);
}

template <class T>
Tensor<T> forward(const InstanceFeatures& feat, const ModelConfig& cfg,
                  Params<T>& params, bool train_mode, Rng& rng,
                  Tape<T>* tape, AttnCapture<T>* capture = nullptr) {
  Tensor<T> x = build_input(feat, cfg, params, tape);
  for (int b = 1; b <= cfg.n_blocks; ++b) {
    x = encoder_block(x, feat, cfg, params, b, train_mode, rng, tape,
                      capture);
  }
  return nn::affine(x, params.at("out.w"), params.at("out.b"), tape);
}

// Per-token argmax over role logits; PAD, UNK and the "_" label all mean "no
// role" and map to the empty string. Ties go to the lowest label id.
template <class T>
std::vector<std::string> predict_roles(const Tensor<T>& logits,
                                       const syntax::SyntaxVocab& role_vocab) {
  const int64_t n = logits.dim(0), l = logits.dim(1);
  if (l != role_vocab.size()) {
    throw ShapeMismatch("logit width " + std::to_string(l) + " vs " +
                        std::to_string(role_vocab.size()) + " role labels");
  }
  std::vector<std::string> roles;
  roles.reserve(static_cast<size_t>(n));
  const auto v = logits.data();
  for (int64_t i = 0; i < n; ++i) {
    int best = 0;
    for (int64_t j = 0; j < l; ++j) {
      const T x = v[static_cast<size_t>(i * l + j)];
      if (!std::isfinite(static_cast<double>(x))) {
        throw NonFiniteLogits("non-finite logit at token " +
                              std::to_string(i + 1) + ", label " +
                              std::to_string(j));
      }
      if (x > v[static_cast<size_t>(i * l + best)]) {
        best = static_cast<int>(j);
      }
    }
    const std::string& label = role_vocab.string_of(best);
    if (best == syntax::SyntaxVocab::kPad ||
        best == syntax::SyntaxVocab::kUnk || label == "_") {
      roles.emplace_back();
    } else {
      roles.push_back(label);
    }
  }
  return roles;
}

}  // namespace synsrl::model
