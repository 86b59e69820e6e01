#include "synsrl/syntax/paths.hpp"

#include <algorithm>

namespace synsrl::syntax {

namespace {

constexpr const char* kRootWord = "<ROOT>";

// Chain of nodes from `start` upward: stops at a root-attached node
// (reached_root = true) or at a pruned slot whose head is unknown.
struct Walk {
  std::vector<int> nodes;
  bool reached_root = false;
};

Walk walk_up(const PrunedTree& t, int start) {
  Walk w;
  int x = start;
  while (true) {
    w.nodes.push_back(x);
    if (t.pruned(x)) return w;
    const int p = t.parent(x);
    if (p == kVirtualRoot) {
      w.reached_root = true;
      return w;
    }
    x = p;
  }
}

// Labels of the edges between chain[0] and chain[count], read top-down.
std::string side_labels(const PrunedTree& t, const std::vector<int>& chain,
                        size_t count) {
  std::string out;
  for (size_t i = count; i-- > 0;) {
    out += t.labels[static_cast<size_t>(chain[i])];
    if (i > 0) out += '_';
  }
  return out;
}

}  // namespace

std::optional<int> pruned_lca(const PrunedTree& t, int a, int b) {
  const Walk wa = walk_up(t, a);
  const Walk wb = walk_up(t, b);
  std::vector<bool> on_a(static_cast<size_t>(t.size()), false);
  for (int x : wa.nodes) on_a[static_cast<size_t>(x)] = true;
  for (int x : wb.nodes) {
    if (on_a[static_cast<size_t>(x)]) return x;
  }
  if (wa.reached_root && wb.reached_root) return kVirtualRoot;
  return std::nullopt;
}

std::optional<PathFeature> pruned_path_feature(const PrunedTree& t,
                                               int predicate, int candidate) {
  const Walk wc = walk_up(t, candidate);
  const Walk wp = walk_up(t, predicate);
  std::vector<size_t> pos_on_c(static_cast<size_t>(t.size()),
                               static_cast<size_t>(-1));
  for (size_t i = 0; i < wc.nodes.size(); ++i) {
    pos_on_c[static_cast<size_t>(wc.nodes[i])] = i;
  }
  size_t cand_edges = 0, pred_edges = 0;
  bool found = false;
  for (size_t j = 0; j < wp.nodes.size(); ++j) {
    const size_t i = pos_on_c[static_cast<size_t>(wp.nodes[j])];
    if (i != static_cast<size_t>(-1)) {
      cand_edges = i;
      pred_edges = j;
      found = true;
      break;
    }
  }
  if (!found) {
    if (!wc.reached_root || !wp.reached_root) return std::nullopt;
    cand_edges = wc.nodes.size();  // ancestor is the virtual root
    pred_edges = wp.nodes.size();
  }
  PathFeature f;
  f.dep_path = std::to_string(cand_edges) + "," + std::to_string(pred_edges);
  f.rel_path =
      side_labels(t, wc.nodes, cand_edges) + "," +
      side_labels(t, wp.nodes, pred_edges);
  return f;
}

std::optional<std::string> pruned_dep_word(const conll::Sentence& s,
                                           const PrunedTree& t, int i) {
  if (t.pruned(i)) return std::nullopt;
  const int p = t.parent(i);
  if (p == kVirtualRoot) return std::string(kRootWord);
  return s.tokens[static_cast<size_t>(p)].form;
}

PathFeature path_feature(const DependencyTree& t, int predicate,
                         int candidate) {
  return *pruned_path_feature(pruned_from(t), predicate, candidate);
}

std::string dep_path(const DependencyTree& t, int predicate, int candidate) {
  return path_feature(t, predicate, candidate).dep_path;
}

std::string rel_path(const DependencyTree& t, int predicate, int candidate) {
  return path_feature(t, predicate, candidate).rel_path;
}

int path_distance(const PathFeature& f) {
  const size_t comma = f.dep_path.find(',');
  return std::stoi(f.dep_path.substr(0, comma)) +
         std::stoi(f.dep_path.substr(comma + 1));
}

std::string dep_word(const conll::Sentence& s, const DependencyTree& t,
                     int i) {
  return *pruned_dep_word(s, pruned_from(t), i);
}

}  // namespace synsrl::syntax
