#include "synsrl/syntax/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace synsrl::syntax {

const char* vocab_kind_name(VocabKind k) {
  switch (k) {
    case VocabKind::DepWord: return "dep-word";
    case VocabKind::RelLabel: return "rel-label";
    case VocabKind::DepPath: return "dep-path";
    case VocabKind::RelPath: return "rel-path";
    case VocabKind::Word: return "word";
    case VocabKind::Pos: return "pos";
    case VocabKind::Role: return "role";
  }
  return "?";
}

VocabKind vocab_kind_from_name(const std::string& name) {
  if (name == "dep-word") return VocabKind::DepWord;
  if (name == "rel-label") return VocabKind::RelLabel;
  if (name == "dep-path") return VocabKind::DepPath;
  if (name == "rel-path") return VocabKind::RelPath;
  if (name == "word") return VocabKind::Word;
  if (name == "pos") return VocabKind::Pos;
  if (name == "role") return VocabKind::Role;
  throw ConfigError("unknown vocab kind '" + name + "'");
}

SyntaxVocab::SyntaxVocab(
    VocabKind kind, const std::unordered_map<std::string, int64_t>& counts,
    int64_t min_freq)
    : kind_(kind) {
  strings_ = {kPadString, kUnkString};
  freqs_ = {0, 0};
  std::vector<std::pair<std::string, int64_t>> kept;
  kept.reserve(counts.size());
  for (const auto& [s, c] : counts) {
    if (c >= min_freq) kept.emplace_back(s, c);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (auto& [s, c] : kept) {
    strings_.push_back(std::move(s));
    freqs_.push_back(c);
  }
  for (int i = 0; i < static_cast<int>(strings_.size()); ++i) {
    ids_.emplace(strings_[static_cast<size_t>(i)], i);
  }
}

int SyntaxVocab::id_of(const std::string& s) const {
  auto it = ids_.find(s);
  return it == ids_.end() ? kUnk : it->second;
}

int64_t SyntaxVocab::freq_of(const std::string& s) const {
  auto it = ids_.find(s);
  return it == ids_.end() ? 0 : freqs_[static_cast<size_t>(it->second)];
}

const std::string& SyntaxVocab::string_of(int id) const {
  if (id < 0 || id >= size()) {
    throw IndexOutOfRange("vocab id " + std::to_string(id) + " outside [0, " +
                          std::to_string(size()) + ")");
  }
  return strings_[static_cast<size_t>(id)];
}

void SyntaxVocab::save(std::ostream& out) const {
  for (int i = 0; i < size(); ++i) {
    out << strings_[static_cast<size_t>(i)] << '\t' << i << '\t'
        << freqs_[static_cast<size_t>(i)] << '\n';
  }
}

void SyntaxVocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  save(out);
  if (!out) throw IoError("write failed for " + path);
}

SyntaxVocab SyntaxVocab::load(std::istream& in, VocabKind kind,
                              const std::string& name) {
  SyntaxVocab v;
  v.kind_ = kind;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw IoError(name + " line " + std::to_string(line_no) +
                    ": expected <string>\\t<id>\\t<freq>");
    }
    const std::string s = line.substr(0, t1);
    int id = 0;
    int64_t freq = 0;
    try {
      id = std::stoi(line.substr(t1 + 1, t2 - t1 - 1));
      freq = std::stoll(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw IoError(name + " line " + std::to_string(line_no) +
                    ": bad id or frequency");
    }
    if (id != static_cast<int>(v.strings_.size())) {
      throw IoError(name + " line " + std::to_string(line_no) +
                    ": ids must be dense and in order");
    }
    v.strings_.push_back(s);
    v.freqs_.push_back(freq);
    v.ids_.emplace(s, id);
  }
  if (v.size() < 2 || v.strings_[0] != kPadString ||
      v.strings_[1] != kUnkString) {
    throw IoError(name + ": vocab must start with " +
                  std::string(kPadString) + " and " + kUnkString);
  }
  return v;
}

SyntaxVocab SyntaxVocab::load(const std::string& path, VocabKind kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return load(in, kind, path);
}

SyntaxVocab build_syntax_vocab(const std::vector<conll::Sentence>& corpus,
                               VocabKind kind, conll::Which which,
                               int64_t min_freq) {
  std::unordered_map<std::string, int64_t> counts;
  for (const conll::Sentence& s : corpus) {
    const DependencyTree tree = tree_from_sentence(s, which);
    const int n = tree.size();
    switch (kind) {
      case VocabKind::DepWord:
        for (int i = 0; i < n; ++i) ++counts[dep_word(s, tree, i)];
        break;
      case VocabKind::RelLabel:
        for (int i = 0; i < n; ++i) ++counts[tree.label(i)];
        break;
      case VocabKind::DepPath:
      case VocabKind::RelPath:
        for (int p : s.predicates) {
          for (int i = 0; i < n; ++i) {
            const PathFeature f = path_feature(tree, p, i);
            ++counts[kind == VocabKind::DepPath ? f.dep_path : f.rel_path];
          }
        }
        break;
      default:
        throw ConfigError(std::string("build_syntax_vocab does not handle ") +
                          vocab_kind_name(kind));
    }
  }
  return SyntaxVocab(kind, counts, min_freq);
}

const std::string& pos_string(const conll::Token& t) {
  return t.pos.empty() ? t.ppos : t.pos;
}

SyntaxVocab build_token_vocab(const std::vector<conll::Sentence>& corpus,
                              VocabKind kind, int64_t min_freq) {
  std::unordered_map<std::string, int64_t> counts;
  for (const conll::Sentence& s : corpus) {
    switch (kind) {
      case VocabKind::Word:
        for (const conll::Token& t : s.tokens) ++counts[t.form];
        break;
      case VocabKind::Pos:
        for (const conll::Token& t : s.tokens) ++counts[pos_string(t)];
        break;
      case VocabKind::Role:
        for (const conll::Token& t : s.tokens) {
          for (const std::string& r : t.apreds) {
            ++counts[r.empty() ? std::string("_") : r];
          }
        }
        break;
      default:
        throw ConfigError(std::string("build_token_vocab does not handle ") +
                          vocab_kind_name(kind));
    }
  }
  return SyntaxVocab(kind, counts, min_freq);
}

int filter_rel_path(const PathFeature& f, const SyntaxVocab& vocab,
                    int max_dist, int64_t min_freq) {
  if (path_distance(f) > max_dist) return SyntaxVocab::kUnk;
  if (vocab.freq_of(f.rel_path) < min_freq) return SyntaxVocab::kUnk;
  return vocab.id_of(f.rel_path);
}

}  // namespace synsrl::syntax
