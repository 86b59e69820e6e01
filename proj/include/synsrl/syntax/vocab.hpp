#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "synsrl/conll/conll.hpp"
#include "synsrl/syntax/paths.hpp"
#include "synsrl/syntax/tree.hpp"

namespace synsrl::syntax {

enum class VocabKind { DepWord, RelLabel, DepPath, RelPath, Word, Pos, Role };

const char* vocab_kind_name(VocabKind k);
VocabKind vocab_kind_from_name(const std::string& name);

// Dense string-to-id map with reserved PAD/UNK rows. Ids are deterministic:
// entries sorted by frequency descending, ties broken by byte-wise string
// order ascending.
class SyntaxVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr const char* kPadString = "<PAD>";
  static constexpr const char* kUnkString = "<UNK>";

  SyntaxVocab() = default;
  SyntaxVocab(VocabKind kind,
              const std::unordered_map<std::string, int64_t>& counts,
              int64_t min_freq);

  VocabKind kind() const { return kind_; }
  int size() const { return static_cast<int>(strings_.size()); }
  int id_of(const std::string& s) const;       // kUnk when unseen
  int64_t freq_of(const std::string& s) const; // 0 when unseen
  const std::string& string_of(int id) const;

  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static SyntaxVocab load(std::istream& in, VocabKind kind,
                          const std::string& name);
  static SyntaxVocab load(const std::string& path, VocabKind kind);

 private:
  VocabKind kind_ = VocabKind::RelLabel;
  std::vector<std::string> strings_;
  std::vector<int64_t> freqs_;
  std::unordered_map<std::string, int> ids_;
};

// Collects the strings of `kind` over the whole corpus using trees from the
// selected column set. DepWord collects head word forms, RelLabel relation
// labels (one per token), DepPath/RelPath the per-(predicate, token) path
// strings.
SyntaxVocab build_syntax_vocab(const std::vector<conll::Sentence>& corpus,
                               VocabKind kind, conll::Which which,
                               int64_t min_freq = 1);

// RelPath lookup with the two training-time filters: UNK when the tree
// distance between predicate and candidate exceeds max_dist, or when the
// path's training frequency is below min_freq.
int filter_rel_path(const PathFeature& f, const SyntaxVocab& vocab,
                    int max_dist = 4, int64_t min_freq = 10);

// Token-level vocabularies: Word over FORM, Pos over the POS column (gold
// when present, else predicted), Role over the apred slots with "_" standing
// for the no-role label.
SyntaxVocab build_token_vocab(const std::vector<conll::Sentence>& corpus,
                              VocabKind kind, int64_t min_freq = 1);

// The POS string fed to the model for one token.
const std::string& pos_string(const conll::Token& t);

// All vocabularies one model needs. Syntax members are empty (PAD/UNK only)
// when the mode/representation does not use them.
struct VocabSet {
  SyntaxVocab word;
  SyntaxVocab pos;
  SyntaxVocab role;
  SyntaxVocab dep;
  SyntaxVocab rel;
  SyntaxVocab deppath;
  SyntaxVocab relpath;
};

}  // namespace synsrl::syntax
