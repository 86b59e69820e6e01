#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "synsrl/common.hpp"

namespace synsrl::conll {

// Which annotation columns to read: gold (HEAD/DEPREL/POS) or predicted
// (PHEAD/PDEPREL/PPOS).
enum class Which { Gold, Predicted };

// One CoNLL-2009 row. "_" in the file maps to an absent value: empty string
// for text columns, -1 for head columns. head/phead use the file convention
// of 1-based token ids with 0 for the virtual root.
struct Token {
  int id = 0;
  std::string form;
  std::string lemma;
  std::string plemma;
  std::string pos;
  std::string ppos;
  std::string feat;
  std::string pfeat;
  int head = -1;
  int phead = -1;
  std::string deprel;
  std::string pdeprel;
  bool fill_pred = false;
  std::string pred_sense;           // empty when the token is not a predicate
  std::vector<std::string> apreds;  // one slot per predicate; empty = absent

  int head_for(Which w) const { return w == Which::Gold ? head : phead; }
  const std::string& deprel_for(Which w) const {
    return w == Which::Gold ? deprel : pdeprel;
  }
  const std::string& pos_for(Which w) const {
    return w == Which::Gold ? pos : ppos;
  }
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<int> predicates;  // 0-based token indices, strictly increasing

  size_t size() const { return tokens.size(); }
};

// The SRL unit of work: one predicate of one sentence with its role column.
struct PredicateInstance {
  const Sentence* sentence = nullptr;
  int predicate_index = 0;          // 0-based token index
  std::vector<std::string> roles;   // per token; empty = no role
};

struct ScoreReport {
  int64_t predicted = 0;
  int64_t gold = 0;
  int64_t correct = 0;
  double labeled_precision = 0.0;
  double labeled_recall = 0.0;
  double labeled_f1 = 0.0;
};

// `first_line_no` is the 1-based file line of lines[0], used in errors.
Sentence parse_sentence(const std::vector<std::string>& lines,
                        size_t first_line_no = 1);
std::vector<std::string> write_sentence(const Sentence& s);

std::vector<PredicateInstance> extract_instances(const Sentence& s);

// Returns a copy of `s` whose apred columns hold `roles[k][i]` for predicate
// k and token i (empty string = absent). Senses and all other columns are
// kept as-is.
Sentence replace_roles(const Sentence& s,
                       const std::vector<std::vector<std::string>>& roles);

ScoreReport score(const std::vector<Sentence>& gold,
                  const std::vector<Sentence>& pred,
                  bool exclude_pred_sense = true);

std::vector<Sentence> read_corpus(std::istream& in, const std::string& name);
std::vector<Sentence> read_corpus(const std::string& path);
void write_corpus(std::ostream& out, const std::vector<Sentence>& corpus);
void write_corpus(const std::string& path,
                  const std::vector<Sentence>& corpus);

std::string machine_line(const ScoreReport& r);
std::string human_report(const ScoreReport& r);

}  // namespace synsrl::conll
