#pragma once

#include <optional>
#include <string>

#include "synsrl/syntax/tree.hpp"

namespace synsrl::syntax {

// The two tree-path strings for one (predicate, candidate) pair.
//   dep_path: "<dist ancestor->candidate>,<dist ancestor->predicate>"
//   rel_path: "<labels ancestor->candidate>,<labels ancestor->predicate>",
//             each side top-down and joined by '_', empty when the endpoint
//             is the ancestor itself.
struct PathFeature {
  std::string dep_path;
  std::string rel_path;
};

std::string dep_path(const DependencyTree& t, int predicate, int candidate);
std::string rel_path(const DependencyTree& t, int predicate, int candidate);
PathFeature path_feature(const DependencyTree& t, int predicate,
                         int candidate);

// Sum of the two dep_path components: the tree distance between the
// endpoints through their ancestor.
int path_distance(const PathFeature& f);

// Head word surface form of token i: the parent's FORM, or "<ROOT>" for
// root-attached tokens. The sentence supplies the forms.
std::string dep_word(const conll::Sentence& s, const DependencyTree& t,
                     int i);

// Pruned-tree variants: nullopt whenever a pruned slot cuts the walk before
// a common ancestor is proven, in which case downstream consumers fall back
// to UNK.
std::optional<int> pruned_lca(const PrunedTree& t, int a, int b);
std::optional<PathFeature> pruned_path_feature(const PrunedTree& t,
                                               int predicate, int candidate);
std::optional<std::string> pruned_dep_word(const conll::Sentence& s,
                                           const PrunedTree& t, int i);

}  // namespace synsrl::syntax
