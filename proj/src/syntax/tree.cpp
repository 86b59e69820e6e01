#include "synsrl/syntax/tree.hpp"

namespace synsrl::syntax {

DependencyTree build_tree(std::vector<int> heads,
                          std::vector<std::string> labels) {
  if (heads.size() != labels.size()) {
    throw LengthMismatch("build_tree: " + std::to_string(heads.size()) +
                         " heads vs " + std::to_string(labels.size()) +
                         " labels");
  }
  const int n = static_cast<int>(heads.size());
  for (int i = 0; i < n; ++i) {
    const int h = heads[static_cast<size_t>(i)];
    if (h < 0 || h > n) {
      throw IndexOutOfRange("build_tree: head " + std::to_string(h) +
                            " of token " + std::to_string(i + 1) +
                            " outside [0, " + std::to_string(n) + "]");
    }
    if (h == i + 1) {
      throw CyclicTree("build_tree: token " + std::to_string(i + 1) +
                       " is its own head");
    }
  }
  DependencyTree t{std::move(heads), std::move(labels)};
  for (int i = 0; i < n; ++i) {
    int steps = 0;
    for (int x = i; x != kVirtualRoot; x = t.parent(x)) {
      if (++steps > n) {
        throw CyclicTree("build_tree: cycle through token " +
                         std::to_string(i + 1));
      }
    }
  }
  return t;
}

DependencyTree tree_from_sentence(const conll::Sentence& s,
                                  conll::Which which) {
  std::vector<int> heads;
  std::vector<std::string> labels;
  heads.reserve(s.size());
  labels.reserve(s.size());
  for (const conll::Token& t : s.tokens) {
    const int h = t.head_for(which);
    const std::string& l = t.deprel_for(which);
    if (h == -1 || l.empty()) {
      throw Error("token " + std::to_string(t.id) + " ('" + t.form +
                  "') lacks a " +
                  (which == conll::Which::Gold ? "gold" : "predicted") +
                  " head or relation");
    }
    heads.push_back(h);
    labels.push_back(l);
  }
  return build_tree(std::move(heads), std::move(labels));
}

int depth(const DependencyTree& t, int i) {
  int d = 0;
  for (int x = i; x != kVirtualRoot; x = t.parent(x)) ++d;
  return d;
}

int lca(const DependencyTree& t, int a, int b) {
  const int n = t.size();
  std::vector<bool> on_a(static_cast<size_t>(n) + 1, false);
  for (int x = a; x != kVirtualRoot; x = t.parent(x)) {
    on_a[static_cast<size_t>(x)] = true;
  }
  on_a[static_cast<size_t>(n)] = true;  // virtual root slot
  for (int x = b; x != kVirtualRoot; x = t.parent(x)) {
    if (on_a[static_cast<size_t>(x)]) return x;
  }
  return kVirtualRoot;
}

int tree_distance(const DependencyTree& t, int a, int b) {
  const int anc = lca(t, a, b);
  const int da = anc == kVirtualRoot ? 0 : depth(t, anc);
  return depth(t, a) + depth(t, b) - 2 * da;
}

PrunedTree prune_erroneous_arcs(const DependencyTree& auto_tree,
                                const DependencyTree& gold_tree) {
  if (auto_tree.size() != gold_tree.size()) {
    throw LengthMismatch("prune_erroneous_arcs: " +
                         std::to_string(auto_tree.size()) + " vs " +
                         std::to_string(gold_tree.size()) + " tokens");
  }
  const int n = gold_tree.size();
  PrunedTree p;
  p.heads = gold_tree.heads;
  p.labels = gold_tree.labels;
  p.absent.assign(static_cast<size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    const size_t u = static_cast<size_t>(i);
    p.absent[u] = auto_tree.heads[u] != gold_tree.heads[u] ||
                  auto_tree.labels[u] != gold_tree.labels[u];
  }
  return p;
}

PrunedTree pruned_from(const DependencyTree& t) {
  PrunedTree p;
  p.heads = t.heads;
  p.labels = t.labels;
  p.absent.assign(t.heads.size(), false);
  return p;
}

}  // namespace synsrl::syntax
