#pragma once

#include <optional>
#include <string>
#include <vector>

#include "synsrl/common.hpp"
#include "synsrl/conll/conll.hpp"

namespace synsrl::syntax {

// Token arguments and results below are 0-based indices; kVirtualRoot stands
// for the virtual root node above all root-attached tokens.
constexpr int kVirtualRoot = -1;

// Validated dependency tree. heads keeps the CoNLL convention: heads[i] is
// the 1-based id of token i's parent, 0 meaning the virtual root. More than
// one token may attach to the root.
struct DependencyTree {
  std::vector<int> heads;
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(heads.size()); }
  // 0-based parent index, kVirtualRoot for root-attached tokens.
  int parent(int i) const { return heads[static_cast<size_t>(i)] - 1; }
  const std::string& label(int i) const {
    return labels[static_cast<size_t>(i)];
  }
};

DependencyTree build_tree(std::vector<int> heads,
                          std::vector<std::string> labels);

// Builds from HEAD/DEPREL (gold) or PHEAD/PDEPREL (predicted) columns.
DependencyTree tree_from_sentence(const conll::Sentence& s,
                                  conll::Which which);

// Edges between node i and the virtual root; accepts kVirtualRoot (depth 0).
int depth(const DependencyTree& t, int i);

// Deepest node lying on both root paths; may be kVirtualRoot.
int lca(const DependencyTree& t, int a, int b);

// Edge count of the tree path between a and b.
int tree_distance(const DependencyTree& t, int a, int b);

// AutoDel result: slot i (its head and label together) survives only when
// the automatic parse matched the gold arc exactly; nothing is substituted
// for pruned slots.
struct PrunedTree {
  std::vector<int> heads;              // meaningful only where !absent[i]
  std::vector<std::string> labels;
  std::vector<bool> absent;

  int size() const { return static_cast<int>(heads.size()); }
  bool pruned(int i) const { return absent[static_cast<size_t>(i)]; }
  // Only meaningful when !pruned(i).
  int parent(int i) const { return heads[static_cast<size_t>(i)] - 1; }
};

PrunedTree prune_erroneous_arcs(const DependencyTree& auto_tree,
                                const DependencyTree& gold_tree);
PrunedTree pruned_from(const DependencyTree& t);  // nothing absent

// Row-major n x n matrix. Row i carries a single 1 at the column of token
// i's head; root-attached tokens (and pruned slots) put the 1 on their own
// diagonal cell.
template <class T>
std::vector<T> one_hot_head_matrix(const PrunedTree& t) {
  const int n = t.size();
  std::vector<T> m(static_cast<size_t>(n) * static_cast<size_t>(n), T(0));
  for (int i = 0; i < n; ++i) {
    const int p = t.pruned(i) ? kVirtualRoot : t.parent(i);
    const int col = p == kVirtualRoot ? i : p;
    m[static_cast<size_t>(i) * n + col] = T(1);
  }
  return m;
}

template <class T>
std::vector<T> one_hot_head_matrix(const DependencyTree& t) {
  return one_hot_head_matrix<T>(pruned_from(t));
}

}  // namespace synsrl::syntax
