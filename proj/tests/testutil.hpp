#pragma once

// Shared fixtures and independent oracles. The oracles deliberately
// re-derive results from first principles (root chains, triple loops,
// hand-built strings) so the tests do not just compare the library with
// itself.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <utility>
#include <vector>

#include "synsrl/conll/conll.hpp"
#include "synsrl/syntax/paths.hpp"
#include "synsrl/syntax/tree.hpp"
#include "synsrl/tensor/rng.hpp"

namespace testutil {

// --- corpus fixtures -------------------------------------------------------

// 5-token sentence (no root placeholder): the path-feature example.
// heads [2,0,2,2,4], labels [SBJ,ROOT,COMP,COMP,COMP], predicate 鼓励.
inline std::string figure_conll_text() {
  return
      "1\t中国\t中国\t中国\tNR\tNR\t_\t_\t2\t2\tSBJ\tSBJ\t_\t_\tA0\n"
      "2\t鼓励\t鼓励\t鼓励\tVV\tVV\t_\t_\t0\t0\tROOT\tROOT\tY\t鼓励.01\t_\n"
      "3\t外商\t外商\t外商\tNN\tNN\t_\t_\t2\t2\tCOMP\tCOMP\t_\t_\tA1\n"
      "4\t投资\t投资\t投资\tVV\tVV\t_\t_\t2\t2\tCOMP\tCOMP\t_\t_\tA2\n"
      "5\t农业\t农业\t农业\tNN\tNN\t_\t_\t4\t4\tCOMP\tCOMP\t_\t_\t_\n"
      "\n";
}

// 6-token variant with the $ placeholder re-attached under the real root,
// keeping the CoNLL virtual-root convention. Roles on tokens 2, 4, 5.
inline std::string figure_root_conll_text() {
  return
      "1\t$\t$\t$\tPU\tPU\t_\t_\t3\t3\tPU\tPU\t_\t_\t_\n"
      "2\t中国\t中国\t中国\tNR\tNR\t_\t_\t3\t3\tSBJ\tSBJ\t_\t_\tA0\n"
      "3\t鼓励\t鼓励\t鼓励\tVV\tVV\t_\t_\t0\t0\tROOT\tROOT\tY\t鼓励.01\t_\n"
      "4\t外商\t外商\t外商\tNN\tNN\t_\t_\t3\t3\tCOMP\tCOMP\t_\t_\tA1\n"
      "5\t投资\t投资\t投资\tVV\tVV\t_\t_\t3\t3\tCOMP\tCOMP\t_\t_\tA2\n"
      "6\t农业\t农业\t农业\tNN\tNN\t_\t_\t5\t5\tCOMP\tCOMP\t_\t_\t_\n"
      "\n";
}

// "He wants to go" with two predicates (two apred columns).
inline std::string two_predicate_conll_text() {
  return
      "1\tHe\the\the\tPRP\tPRP\t_\t_\t2\t2\tSBJ\tSBJ\t_\t_\tA0\tA0\n"
      "2\twants\twant\twant\tVBZ\tVBZ\t_\t_\t0\t0\tROOT\tROOT\tY\twant.01\t_\t_\n"
      "3\tto\tto\tto\tTO\tTO\t_\t_\t4\t4\tIM\tIM\t_\t_\t_\t_\n"
      "4\tgo\tgo\tgo\tVB\tVB\t_\t_\t2\t2\tOPRD\tOPRD\tY\tgo.01\tA1\t_\n"
      "\n";
}

inline std::vector<synsrl::conll::Sentence> parse_text(
    const std::string& text) {
  std::istringstream in(text);
  return synsrl::conll::read_corpus(in, "fixture");
}

inline synsrl::conll::Sentence figure_sentence() {
  return parse_text(figure_conll_text()).at(0);
}

// Gold has 4 argument arcs, the prediction 5, with 3 matching:
// P = 3/5, R = 3/4, F1 = 2/3.
inline std::pair<std::vector<synsrl::conll::Sentence>,
                 std::vector<synsrl::conll::Sentence>>
scorer_fixture() {
  const char* base =
      "1\ta\ta\ta\tN\tN\t_\t_\t2\t2\tSBJ\tSBJ\t_\t_\t%s\n"
      "2\tv\tv\tv\tV\tV\t_\t_\t0\t0\tROOT\tROOT\tY\tv.01\t_\n"
      "3\tb\tb\tb\tN\tN\t_\t_\t2\t2\tOBJ\tOBJ\t_\t_\t%s\n"
      "4\tc\tc\tc\tN\tN\t_\t_\t2\t2\tOBJ\tOBJ\t_\t_\t%s\n"
      "5\td\td\td\tN\tN\t_\t_\t2\t2\tADV\tADV\t_\t_\t%s\n"
      "6\te\te\te\tN\tN\t_\t_\t2\t2\tADV\tADV\t_\t_\t%s\n"
      "\n";
  char gold[1024], pred[1024];
  std::snprintf(gold, sizeof(gold), base, "A0", "A1", "A2", "A3", "_");
  std::snprintf(pred, sizeof(pred), base, "A0", "A1", "AM-TMP", "A3", "A4");
  return {parse_text(gold), parse_text(pred)};
}

// --- random trees and brute-force path oracles ------------------------------

inline synsrl::syntax::DependencyTree random_tree(synsrl::Rng& rng, int n,
                                                  int n_labels = 4) {
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    std::swap(order[static_cast<size_t>(i)],
              order[rng.below(static_cast<uint64_t>(i) + 1)]);
  }
  std::vector<int> heads(static_cast<size_t>(n), 0);
  std::vector<std::string> labels(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int node = order[static_cast<size_t>(k)];
    // Attach to any earlier-placed node, or (j == k) to the virtual root.
    const int j = static_cast<int>(rng.below(static_cast<uint64_t>(k) + 1));
    heads[static_cast<size_t>(node)] =
        j == k ? 0 : order[static_cast<size_t>(j)] + 1;
    labels[static_cast<size_t>(node)] =
        "L" + std::to_string(rng.below(static_cast<uint64_t>(n_labels)));
  }
  return synsrl::syntax::build_tree(std::move(heads), std::move(labels));
}

// Chain node, parent, ..., ending with kVirtualRoot.
inline std::vector<int> root_chain(const synsrl::syntax::DependencyTree& t,
                                   int i) {
  std::vector<int> chain;
  int cur = i;
  while (cur != synsrl::syntax::kVirtualRoot) {
    chain.push_back(cur);
    cur = t.parent(cur);
  }
  chain.push_back(synsrl::syntax::kVirtualRoot);
  return chain;
}

inline int brute_lca(const synsrl::syntax::DependencyTree& t, int a, int b) {
  const auto ca = root_chain(t, a);
  const auto cb = root_chain(t, b);
  for (int node : ca) {
    if (std::find(cb.begin(), cb.end(), node) != cb.end()) return node;
  }
  return synsrl::syntax::kVirtualRoot;  // unreachable in a valid tree
}

inline int chain_index(const std::vector<int>& chain, int node) {
  return static_cast<int>(
      std::find(chain.begin(), chain.end(), node) - chain.begin());
}

inline int brute_distance(const synsrl::syntax::DependencyTree& t, int a,
                          int b) {
  const int l = brute_lca(t, a, b);
  return chain_index(root_chain(t, a), l) + chain_index(root_chain(t, b), l);
}

// Independent derivation of DepPath / RelPath straight from the two root
// chains: distances to the lca, label chains read top-down.
inline synsrl::syntax::PathFeature brute_path_feature(
    const synsrl::syntax::DependencyTree& t, int pred, int cand) {
  const auto cc = root_chain(t, cand);
  const auto cp = root_chain(t, pred);
  const int l = brute_lca(t, cand, pred);
  const int ic = chain_index(cc, l);
  const int ip = chain_index(cp, l);
  auto labels_down = [&t](const std::vector<int>& chain, int count) {
    std::string s;
    for (int k = count - 1; k >= 0; --k) {
      if (!s.empty()) s += '_';
      s += t.label(chain[static_cast<size_t>(k)]);
    }
    return s;
  };
  synsrl::syntax::PathFeature f;
  f.dep_path = std::to_string(ic) + "," + std::to_string(ip);
  f.rel_path = labels_down(cc, ic) + "," + labels_down(cp, ip);
  return f;
}

// Corrupts ~frac of the slots: each chosen slot gets a different head (when
// one exists that keeps the graph a tree) and a different label.
inline synsrl::syntax::DependencyTree corrupt_tree(
    synsrl::Rng& rng, const synsrl::syntax::DependencyTree& gold,
    double frac) {
  const int n = gold.size();
  std::vector<int> heads = gold.heads;
  std::vector<std::string> labels = gold.labels;
  std::vector<int> idx(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    std::swap(idx[static_cast<size_t>(i)],
              idx[rng.below(static_cast<uint64_t>(i) + 1)]);
  }
  const int k = static_cast<int>(frac * n + 0.999999);
  auto current = gold;  // mutated as we corrupt, keeps cycle checks honest
  for (int s = 0; s < std::min(k, n); ++s) {
    const int i = idx[static_cast<size_t>(s)];
    std::vector<int> options;  // candidate new heads, CoNLL convention
    for (int h = 0; h <= n; ++h) {
      if (h == heads[static_cast<size_t>(i)] || h == i + 1) continue;
      if (h != 0) {
        // Reject descendants of i (would close a cycle).
        const auto chain = root_chain(current, h - 1);
        if (std::find(chain.begin(), chain.end(), i) != chain.end()) continue;
      }
      options.push_back(h);
    }
    if (!options.empty()) {
      heads[static_cast<size_t>(i)] =
          options[rng.below(options.size())];
    }
    labels[static_cast<size_t>(i)] += "x";  // guaranteed-different label
    current = synsrl::syntax::build_tree(heads, labels);
  }
  return current;
}

// --- numeric oracles ---------------------------------------------------------

inline void naive_matmul(const double* a, const double* b, double* c,
                         int64_t m, int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int64_t t = 0; t < k; ++t) {
        acc += a[i * k + t] * b[t * n + j];
      }
      c[i * n + j] = acc;
    }
  }
}

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// --- synthetic training corpora ----------------------------------------------

// Ten 4-token sentences where the word identity determines the role:
// a* words are A0, b* words are A1, c* words carry no role. The verb is the
// root and the predicate; token order rotates so positions carry no shortcut.
inline std::vector<synsrl::conll::Sentence> overfit_corpus() {
  std::string text;
  for (int i = 0; i < 10; ++i) {
    struct Tok {
      std::string form, pos, label, role;
      bool pred;
    };
    std::vector<Tok> base = {
        {"v", "V", "ROOT", "_", true},
        {"a" + std::to_string(i % 3), "N", "SBJ", "A0", false},
        {"b" + std::to_string((i + 1) % 3), "N", "OBJ", "A1", false},
        {"c" + std::to_string((i + 2) % 3), "N", "ADV", "_", false},
    };
    std::rotate(base.begin(), base.begin() + (i % 4), base.end());
    int verb_at = 0;
    for (int j = 0; j < 4; ++j) {
      if (base[static_cast<size_t>(j)].pred) verb_at = j;
    }
    for (int j = 0; j < 4; ++j) {
      const Tok& t = base[static_cast<size_t>(j)];
      const int head = t.pred ? 0 : verb_at + 1;
      text += std::to_string(j + 1) + "\t" + t.form + "\t" + t.form + "\t" +
              t.form + "\t" + t.pos + "\t" + t.pos + "\t_\t_\t" +
              std::to_string(head) + "\t" + std::to_string(head) + "\t" +
              t.label + "\t" + t.label + "\t" + (t.pred ? "Y" : "_") + "\t" +
              (t.pred ? "v.01" : "_") + "\t" + t.role + "\n";
    }
    text += "\n";
  }
  return parse_text(text);
}

// Sentences whose roles are a pure function of the gold RelPath to the
// predicate; the surface forms are all identical so nothing else predicts
// them. Returns two CoNLL renderings of the same sentences: one with the
// gold trees in the tree columns and one where a fraction of each tree's
// slots has been corrupted. Roles always come from the gold tree.
struct RelpathCorpus {
  std::string gold_text;
  std::string corrupted_text;
};

inline RelpathCorpus relpath_corpus(synsrl::Rng& rng, int n_sentences,
                                    double corrupt_frac) {
  static const std::array<const char*, 3> kRoles = {"A0", "A1", "_"};
  RelpathCorpus out;
  for (int s = 0; s < n_sentences; ++s) {
    const int n = 5 + static_cast<int>(rng.below(3));
    const auto gold = random_tree(rng, n, 2);
    const int pred = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
    const auto bad = corrupt_tree(rng, gold, corrupt_frac);
    for (int i = 0; i < n; ++i) {
      std::string role = "_";
      if (i != pred) {
        const auto f = brute_path_feature(gold, pred, i);
        role = kRoles[fnv1a(f.rel_path) % kRoles.size()];
      }
      const auto render = [&](const synsrl::syntax::DependencyTree& t) {
        const std::string head =
            std::to_string(t.heads[static_cast<size_t>(i)]);
        const std::string& label = t.labels[static_cast<size_t>(i)];
        return std::to_string(i + 1) + "\tw\tw\tw\tX\tX\t_\t_\t" + head +
               "\t" + head + "\t" + label + "\t" + label + "\t" +
               (i == pred ? "Y" : "_") + "\t" + (i == pred ? "w.01" : "_") +
               "\t" + role + "\n";
      };
      out.gold_text += render(gold);
      out.corrupted_text += render(bad);
    }
    out.gold_text += "\n";
    out.corrupted_text += "\n";
  }
  return out;
}

// --- files and subprocesses ---------------------------------------------------

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    for (int k = 0; k < 10000; ++k) {
      auto p = base / ("synsrl_test_" + std::to_string(::getpid()) + "_" +
                       std::to_string(counter() + k));
      std::error_code ec;
      if (std::filesystem::create_directory(p, ec)) {
        counter() += k + 1;
        path = p;
        return;
      }
    }
    std::abort();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path / name).string();
  }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream out;
  out << f.rdbuf();
  return out.str();
}

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the srl binary (path from SRL_BIN) with the given arguments.
inline CmdResult run_srl(const std::vector<std::string>& args,
                         const TempDir& dir) {
  const char* bin = std::getenv("SRL_BIN");
  if (!bin) {
    CmdResult r;
    r.err = "SRL_BIN not set";
    return r;
  }
  std::string cmd = std::string("'") + bin + "'";
  for (const std::string& a : args) {
    cmd += " '" + a + "'";
  }
  const std::string out_path = dir.file("cmd.out");
  const std::string err_path = dir.file("cmd.err");
  cmd += " >'" + out_path + "' 2>'" + err_path + "'";
  const int status = std::system(cmd.c_str());
  CmdResult r;
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  if (status >= 0 && WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  return r;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace testutil
