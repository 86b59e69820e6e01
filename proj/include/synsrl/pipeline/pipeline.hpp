#pragma once

#include <optional>
#include <string>
#include <vector>

#include "synsrl/conll/conll.hpp"
#include "synsrl/model/config.hpp"
#include "synsrl/model/encoder.hpp"
#include "synsrl/model/features.hpp"
#include "synsrl/syntax/paths.hpp"
#include "synsrl/syntax/tree.hpp"
#include "synsrl/syntax/vocab.hpp"
#include "synsrl/tensor/checkpoint.hpp"

namespace synsrl::pipeline {

// Where trees come from: the gold columns, the predicted columns, AutoDel
// pruning (gold vs predicted), or the gold columns of a separate
// sentence-aligned file.
enum class TreeSource { Gold, Pred, AutoDel, File };

struct TreeSpec {
  TreeSource source = TreeSource::Gold;
  std::string path;  // only for File

  bool needs_file() const { return source == TreeSource::File; }
};

// "gold" | "pred" | "autodel" | anything else is taken as a file path.
TreeSpec tree_spec_from_flag(const std::string& flag);
std::string tree_spec_to_flag(const TreeSpec& spec);

// Loads the external tree corpus when the tree source is a file path.
std::optional<std::vector<conll::Sentence>> load_tree_corpus(
    const TreeSpec& spec);

syntax::PrunedTree resolve_tree(
    const conll::Sentence& s, const TreeSpec& spec,
    const std::vector<conll::Sentence>* tree_corpus, size_t sentence_index);

// Vocabulary construction for one training corpus under one tree source.
// Syntax vocabularies are built only for the representations the config
// uses; the rest stay PAD/UNK-only.
syntax::VocabSet build_vocabs(const std::vector<conll::Sentence>& corpus,
                              const model::ModelConfig& cfg,
                              const TreeSpec& spec,
                              const std::vector<conll::Sentence>* tree_corpus);

model::InstanceFeatures featurize(const conll::Sentence& s,
                                  const conll::PredicateInstance& inst,
                                  const syntax::PrunedTree* tree,
                                  const model::ModelConfig& cfg,
                                  const syntax::VocabSet& vocabs);

// Features for every (sentence, predicate) instance, grouped by sentence.
// Trees are resolved only when the mode needs them.
std::vector<std::vector<model::InstanceFeatures>> featurize_corpus(
    const std::vector<conll::Sentence>& corpus, const model::ModelConfig& cfg,
    const TreeSpec& spec, const std::vector<conll::Sentence>* tree_corpus,
    const syntax::VocabSet& vocabs);

// One record per (sentence, predicate, token):
// sentence, predicate id, token id, form, Dep, Rel, DepPath, RelPath.
std::vector<std::string> path_records(const conll::Sentence& s,
                                      const syntax::DependencyTree& tree,
                                      size_t sentence_no);

// Same records over a pruned tree; fields unavailable because a slot was
// pruned away print as "_".
std::vector<std::string> path_records(const conll::Sentence& s,
                                      const syntax::PrunedTree& tree,
                                      size_t sentence_no);

// ---------------------------------------------------------------------------
// Model bundle: <model> archive, <model>.manifest key=value file, and
// <model>.vocab.<kind> files next to it.
// ---------------------------------------------------------------------------

void save_manifest_and_vocabs(const std::string& model_path,
                              const model::ModelConfig& cfg,
                              const syntax::VocabSet& vocabs,
                              const std::string& precision);

struct LoadedManifest {
  model::ModelConfig cfg;
  syntax::VocabSet vocabs;
  std::string precision;
};
LoadedManifest load_manifest_and_vocabs(const std::string& model_path);

template <class T>
void params_to_archive(const model::Params<T>& params, nn::Archive& a) {
  for (const auto& [name, t] : params.by_name) {
    std::vector<double> v(t.data().begin(), t.data().end());
    a.put_f64("param/" + name, t.shape(), v);
  }
}

template <class T>
void params_from_archive(const nn::Archive& a, model::Params<T>& params) {
  for (auto& [name, t] : params.by_name) {
    const auto& e = a.get_f64("param/" + name);
    if (e.shape != t.shape()) {
      throw Error("parameter " + name + " has shape " +
                  nn::shape_str(e.shape) + " in the checkpoint but " +
                  nn::shape_str(t.shape()) +
                  " is expected (vocab or config mismatch)");
    }
    auto raw = t.raw();
    for (size_t i = 0; i < e.values.size(); ++i) {
      raw[i] = static_cast<T>(e.values[i]);
    }
  }
}

}  // namespace synsrl::pipeline
