#include "synsrl/pipeline/pipeline.hpp"

#include <filesystem>
#include <unordered_map>

namespace synsrl::pipeline {

namespace {

using conll::Sentence;
using syntax::PrunedTree;
using syntax::SyntaxVocab;
using syntax::VocabKind;

const std::vector<conll::Sentence>& require_tree_corpus(
    const TreeSpec& spec, const std::vector<conll::Sentence>* tree_corpus) {
  if (!tree_corpus) {
    throw Error("tree source '" + spec.path +
                "' needs its corpus loaded first");
  }
  return *tree_corpus;
}

}  // namespace

TreeSpec tree_spec_from_flag(const std::string& flag) {
  TreeSpec spec;
  if (flag == "gold") {
    spec.source = TreeSource::Gold;
  } else if (flag == "pred") {
    spec.source = TreeSource::Pred;
  } else if (flag == "autodel") {
    spec.source = TreeSource::AutoDel;
  } else if (flag.empty()) {
    throw ConfigError("empty tree source");
  } else {
    spec.source = TreeSource::File;
    spec.path = flag;
  }
  return spec;
}

std::string tree_spec_to_flag(const TreeSpec& spec) {
  switch (spec.source) {
    case TreeSource::Gold: return "gold";
    case TreeSource::Pred: return "pred";
    case TreeSource::AutoDel: return "autodel";
    case TreeSource::File: return spec.path;
  }
  return "?";
}

std::optional<std::vector<conll::Sentence>> load_tree_corpus(
    const TreeSpec& spec) {
  if (!spec.needs_file()) return std::nullopt;
  return conll::read_corpus(spec.path);
}

syntax::PrunedTree resolve_tree(
    const conll::Sentence& s, const TreeSpec& spec,
    const std::vector<conll::Sentence>* tree_corpus, size_t sentence_index) {
  switch (spec.source) {
    case TreeSource::Gold:
      return syntax::pruned_from(
          syntax::tree_from_sentence(s, conll::Which::Gold));
    case TreeSource::Pred:
      return syntax::pruned_from(
          syntax::tree_from_sentence(s, conll::Which::Predicted));
    case TreeSource::AutoDel:
      return syntax::prune_erroneous_arcs(
          syntax::tree_from_sentence(s, conll::Which::Predicted),
          syntax::tree_from_sentence(s, conll::Which::Gold));
    case TreeSource::File: {
      const auto& corpus = require_tree_corpus(spec, tree_corpus);
      if (sentence_index >= corpus.size()) {
        throw AlignmentError("tree file " + spec.path + " has " +
                             std::to_string(corpus.size()) +
                             " sentences, needed sentence " +
                             std::to_string(sentence_index + 1));
      }
      const conll::Sentence& ts = corpus[sentence_index];
      if (ts.size() != s.size()) {
        throw AlignmentError("tree file sentence " +
                             std::to_string(sentence_index + 1) + " has " +
                             std::to_string(ts.size()) + " tokens, corpus " +
                             "has " + std::to_string(s.size()));
      }
      return syntax::pruned_from(
          syntax::tree_from_sentence(ts, conll::Which::Gold));
    }
  }
  throw Error("unreachable tree source");
}

namespace {

// Frequency counting over resolved (possibly pruned) trees; absent slots
// contribute nothing, mirroring their UNK treatment at lookup time.
void count_kind(std::unordered_map<std::string, int64_t>& counts,
                const Sentence& s, const PrunedTree& tree, VocabKind kind) {
  const int n = tree.size();
  switch (kind) {
    case VocabKind::DepWord:
      for (int i = 0; i < n; ++i) {
        if (auto w = syntax::pruned_dep_word(s, tree, i)) ++counts[*w];
      }
      break;
    case VocabKind::RelLabel:
      for (int i = 0; i < n; ++i) {
        if (!tree.pruned(i)) ++counts[tree.labels[static_cast<size_t>(i)]];
      }
      break;
    case VocabKind::DepPath:
    case VocabKind::RelPath:
      for (int p : s.predicates) {
        for (int i = 0; i < n; ++i) {
          if (auto f = syntax::pruned_path_feature(tree, p, i)) {
            ++counts[kind == VocabKind::DepPath ? f->dep_path : f->rel_path];
          }
        }
      }
      break;
    default:
      throw Error("count_kind: not a syntax vocab kind");
  }
}

SyntaxVocab build_resolved_vocab(const std::vector<Sentence>& corpus,
                                 VocabKind kind, const TreeSpec& spec,
                                 const std::vector<Sentence>* tree_corpus) {
  std::unordered_map<std::string, int64_t> counts;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const PrunedTree tree = resolve_tree(corpus[i], spec, tree_corpus, i);
    count_kind(counts, corpus[i], tree, kind);
  }
  return SyntaxVocab(kind, counts, 1);
}

}  // namespace

syntax::VocabSet build_vocabs(
    const std::vector<conll::Sentence>& corpus, const model::ModelConfig& cfg,
    const TreeSpec& spec,
    const std::vector<conll::Sentence>* tree_corpus) {
  syntax::VocabSet v;
  v.word = syntax::build_token_vocab(corpus, VocabKind::Word);
  v.pos = syntax::build_token_vocab(corpus, VocabKind::Pos);
  v.role = syntax::build_token_vocab(corpus, VocabKind::Role);
  const std::unordered_map<std::string, int64_t> empty;
  v.dep = SyntaxVocab(VocabKind::DepWord, empty, 1);
  v.rel = SyntaxVocab(VocabKind::RelLabel, empty, 1);
  v.deppath = SyntaxVocab(VocabKind::DepPath, empty, 1);
  v.relpath = SyntaxVocab(VocabKind::RelPath, empty, 1);
  if (!cfg.needs_tree()) return v;

  bool want_dep = false, want_rel = false, want_dp = false, want_rp = false;
  switch (cfg.mode) {
    case model::Mode::Input:
      want_dep = cfg.use_dep;
      want_rel = cfg.use_rel;
      want_dp = cfg.use_deppath;
      want_rp = cfg.use_relpath;
      break;
    case model::Mode::Lisa:
      want_rel = cfg.has_lisa_er() && cfg.lisa_er_from_rel();
      want_rp = cfg.has_lisa_er() && !cfg.lisa_er_from_rel();
      break;
    case model::Mode::RelAwe:
      want_dep = cfg.has_relawe_ed() && !cfg.relawe_ed_from_deppath();
      want_dp = cfg.has_relawe_ed() && cfg.relawe_ed_from_deppath();
      want_rel = cfg.has_relawe_er() && !cfg.relawe_er_from_relpath();
      want_rp = cfg.has_relawe_er() && cfg.relawe_er_from_relpath();
      break;
    case model::Mode::None:
      break;
  }
  if (want_dep) {
    v.dep = build_resolved_vocab(corpus, VocabKind::DepWord, spec,
                                 tree_corpus);
  }
  if (want_rel) {
    v.rel = build_resolved_vocab(corpus, VocabKind::RelLabel, spec,
                                 tree_corpus);
  }
  if (want_dp) {
    v.deppath = build_resolved_vocab(corpus, VocabKind::DepPath, spec,
                                     tree_corpus);
  }
  if (want_rp) {
    v.relpath = build_resolved_vocab(corpus, VocabKind::RelPath, spec,
                                     tree_corpus);
  }
  return v;
}

model::InstanceFeatures featurize(const conll::Sentence& s,
                                  const conll::PredicateInstance& inst,
                                  const syntax::PrunedTree* tree,
                                  const model::ModelConfig& cfg,
                                  const syntax::VocabSet& vocabs) {
  const int n = static_cast<int>(s.size());
  model::InstanceFeatures f;
  f.n = n;
  f.predicate_index = inst.predicate_index;
  f.word_ids.reserve(s.size());
  f.pos_ids.reserve(s.size());
  f.pred_flags.reserve(s.size());
  f.role_ids.reserve(s.size());
  for (int i = 0; i < n; ++i) {
    const conll::Token& t = s.tokens[static_cast<size_t>(i)];
    f.word_ids.push_back(vocabs.word.id_of(t.form));
    f.pos_ids.push_back(vocabs.pos.id_of(syntax::pos_string(t)));
    f.pred_flags.push_back(i == inst.predicate_index ? 1 : 0);
    const std::string& r = inst.roles[static_cast<size_t>(i)];
    f.role_ids.push_back(vocabs.role.id_of(r.empty() ? "_" : r));
  }
  if (!tree) return f;

  constexpr int kUnk = syntax::SyntaxVocab::kUnk;
  for (int i = 0; i < n; ++i) {
    const int p = tree->pruned(i) ? syntax::kVirtualRoot : tree->parent(i);
    f.head_col.push_back(p == syntax::kVirtualRoot ? i : p);
    const auto w = syntax::pruned_dep_word(s, *tree, i);
    f.dep_ids.push_back(w ? vocabs.dep.id_of(*w) : kUnk);
    f.rel_ids.push_back(tree->pruned(i)
                            ? kUnk
                            : vocabs.rel.id_of(
                                  tree->labels[static_cast<size_t>(i)]));
    const auto pf =
        syntax::pruned_path_feature(*tree, inst.predicate_index, i);
    f.deppath_ids.push_back(pf ? vocabs.deppath.id_of(pf->dep_path) : kUnk);
    f.relpath_ids.push_back(
        pf ? syntax::filter_rel_path(*pf, vocabs.relpath,
                                     cfg.relpath_max_dist,
                                     cfg.relpath_min_freq)
           : kUnk);
  }
  return f;
}

std::vector<std::vector<model::InstanceFeatures>> featurize_corpus(
    const std::vector<conll::Sentence>& corpus, const model::ModelConfig& cfg,
    const TreeSpec& spec, const std::vector<conll::Sentence>* tree_corpus,
    const syntax::VocabSet& vocabs) {
  std::vector<std::vector<model::InstanceFeatures>> out;
  out.reserve(corpus.size());
  const bool want_tree = cfg.needs_tree();
  for (size_t si = 0; si < corpus.size(); ++si) {
    const conll::Sentence& s = corpus[si];
    std::optional<syntax::PrunedTree> tree;
    if (want_tree) tree = resolve_tree(s, spec, tree_corpus, si);
    std::vector<model::InstanceFeatures> feats;
    const auto instances = conll::extract_instances(s);
    feats.reserve(instances.size());
    for (const auto& inst : instances)
      feats.push_back(featurize(s, inst, tree ? &*tree : nullptr, cfg, vocabs));
    out.push_back(std::move(feats));
  }
  return out;
}

std::vector<std::string> path_records(const conll::Sentence& s,
                                      const syntax::DependencyTree& tree,
                                      size_t sentence_no) {
  std::vector<std::string> records;
  const int n = tree.size();
  for (int p : s.predicates) {
    for (int i = 0; i < n; ++i) {
      const syntax::PathFeature f = syntax::path_feature(tree, p, i);
      std::string line = std::to_string(sentence_no);
      for (const std::string& field :
           {std::to_string(p + 1), std::to_string(i + 1),
            s.tokens[static_cast<size_t>(i)].form,
            syntax::dep_word(s, tree, i), tree.label(i), f.dep_path,
            f.rel_path}) {
        line += '\t';
        line += field;
      }
      records.push_back(std::move(line));
    }
  }
  return records;
}

std::vector<std::string> path_records(const conll::Sentence& s,
                                      const syntax::PrunedTree& tree,
                                      size_t sentence_no) {
  static const std::string kNone = "_";
  std::vector<std::string> records;
  const int n = tree.size();
  for (int p : s.predicates) {
    for (int i = 0; i < n; ++i) {
      const auto f = syntax::pruned_path_feature(tree, p, i);
      const auto w = syntax::pruned_dep_word(s, tree, i);
      std::string line = std::to_string(sentence_no);
      for (const std::string& field :
           {std::to_string(p + 1), std::to_string(i + 1),
            s.tokens[static_cast<size_t>(i)].form, w ? *w : kNone,
            tree.pruned(i) ? kNone : tree.labels[static_cast<size_t>(i)],
            f ? f->dep_path : kNone, f ? f->rel_path : kNone}) {
        line += '\t';
        line += field;
      }
      records.push_back(std::move(line));
    }
  }
  return records;
}

namespace {

std::string vocab_file_name(const std::string& model_path,
                            VocabKind kind) {
  return model_path + ".vocab." + syntax::vocab_kind_name(kind);
}

}  // namespace

void save_manifest_and_vocabs(const std::string& model_path,
                              const model::ModelConfig& cfg,
                              const syntax::VocabSet& vocabs,
                              const std::string& precision) {
  auto kv = model::config_to_kv(cfg);
  kv["precision"] = precision;
  auto save_vocab = [&](const SyntaxVocab& v, VocabKind kind) {
    const std::string file = vocab_file_name(model_path, kind);
    v.save(file);
    kv["vocab." + std::string(syntax::vocab_kind_name(kind))] =
        std::filesystem::path(file).filename().string();
  };
  save_vocab(vocabs.word, VocabKind::Word);
  save_vocab(vocabs.pos, VocabKind::Pos);
  save_vocab(vocabs.role, VocabKind::Role);
  save_vocab(vocabs.dep, VocabKind::DepWord);
  save_vocab(vocabs.rel, VocabKind::RelLabel);
  save_vocab(vocabs.deppath, VocabKind::DepPath);
  save_vocab(vocabs.relpath, VocabKind::RelPath);
  model::write_kv_file(model_path + ".manifest", kv);
}

LoadedManifest load_manifest_and_vocabs(const std::string& model_path) {
  const std::string manifest_path = model_path + ".manifest";
  auto kv = model::read_kv_file(manifest_path);
  LoadedManifest out;
  auto take = [&kv](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::string();
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  out.precision = take("precision");
  if (out.precision.empty()) out.precision = "f64";
  const std::filesystem::path dir =
      std::filesystem::path(model_path).parent_path();
  auto load_vocab = [&](SyntaxVocab& slot, VocabKind kind) {
    const std::string key = "vocab." + std::string(syntax::vocab_kind_name(kind));
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw IoError(manifest_path + ": missing " + key);
    }
    slot = SyntaxVocab::load((dir / it->second).string(), kind);
    kv.erase(it);
  };
  load_vocab(out.vocabs.word, VocabKind::Word);
  load_vocab(out.vocabs.pos, VocabKind::Pos);
  load_vocab(out.vocabs.role, VocabKind::Role);
  load_vocab(out.vocabs.dep, VocabKind::DepWord);
  load_vocab(out.vocabs.rel, VocabKind::RelLabel);
  load_vocab(out.vocabs.deppath, VocabKind::DepPath);
  load_vocab(out.vocabs.relpath, VocabKind::RelPath);
  out.cfg = model::config_from_kv(kv);
  return out;
}

}  // namespace synsrl::pipeline
