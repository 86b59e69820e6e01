#include "synsrl/conll/conll.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace synsrl::conll {

namespace {

constexpr const char* kAbsent = "_";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

int parse_int_field(const std::string& field, const char* what,
                    size_t line_no) {
  int value = 0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw MalformedRow(std::string(what) + " is not an integer: '" + field +
                           "'",
                       line_no);
  }
  return value;
}

// "_" -> -1, otherwise a non-negative integer.
int parse_head_field(const std::string& field, const char* what,
                     size_t line_no) {
  if (field == kAbsent) return -1;
  return parse_int_field(field, what, line_no);
}

std::string absent_to_empty(const std::string& field) {
  return field == kAbsent ? std::string() : field;
}

std::string empty_to_absent(const std::string& field) {
  return field.empty() ? std::string(kAbsent) : field;
}

}  // namespace

Sentence parse_sentence(const std::vector<std::string>& lines,
                        size_t first_line_no) {
  if (lines.empty()) {
    throw MalformedRow("empty sentence block", first_line_no);
  }
  const int n = static_cast<int>(lines.size());
  Sentence s;
  s.tokens.reserve(lines.size());
  size_t apred_count = 0;
  for (int i = 0; i < n; ++i) {
    const size_t line_no = first_line_no + static_cast<size_t>(i);
    const auto fields = split_tabs(lines[static_cast<size_t>(i)]);
    if (fields.size() < 14) {
      throw MalformedRow("expected at least 14 tab-separated fields, got " +
                             std::to_string(fields.size()),
                         line_no);
    }
    Token t;
    t.id = parse_int_field(fields[0], "ID", line_no);
    if (t.id != i + 1) {
      throw MalformedRow("ID " + std::to_string(t.id) +
                             " out of sequence (expected " +
                             std::to_string(i + 1) + ")",
                         line_no);
    }
    t.form = fields[1];
    t.lemma = absent_to_empty(fields[2]);
    t.plemma = absent_to_empty(fields[3]);
    t.pos = absent_to_empty(fields[4]);
    t.ppos = absent_to_empty(fields[5]);
    t.feat = absent_to_empty(fields[6]);
    t.pfeat = absent_to_empty(fields[7]);
    t.head = parse_head_field(fields[8], "HEAD", line_no);
    t.phead = parse_head_field(fields[9], "PHEAD", line_no);
    t.deprel = absent_to_empty(fields[10]);
    t.pdeprel = absent_to_empty(fields[11]);
    if (fields[12] == "Y") {
      t.fill_pred = true;
    } else if (fields[12] == kAbsent) {
      t.fill_pred = false;
    } else {
      throw MalformedRow("FILLPRED must be 'Y' or '_', got '" + fields[12] +
                             "'",
                         line_no);
    }
    t.pred_sense = absent_to_empty(fields[13]);
    if (t.fill_pred != !t.pred_sense.empty()) {
      throw MalformedRow("FILLPRED and PRED disagree", line_no);
    }
    for (size_t c = 14; c < fields.size(); ++c) {
      if (fields[c].empty()) {
        throw MalformedRow("empty APRED field (use '_' for absent)", line_no);
      }
      t.apreds.push_back(absent_to_empty(fields[c]));
    }
    if (i == 0) {
      apred_count = t.apreds.size();
    } else if (t.apreds.size() != apred_count) {
      throw MalformedRow("row has " + std::to_string(t.apreds.size()) +
                             " APRED fields, expected " +
                             std::to_string(apred_count),
                         line_no);
    }
    if (t.fill_pred) s.predicates.push_back(i);
    s.tokens.push_back(std::move(t));
  }
  for (int i = 0; i < n; ++i) {
    const Token& t = s.tokens[static_cast<size_t>(i)];
    const size_t line_no = first_line_no + static_cast<size_t>(i);
    for (int h : {t.head, t.phead}) {
      if (h == -1) continue;
      if (h < 0 || h > n) {
        throw MalformedRow("head " + std::to_string(h) + " outside [0, " +
                               std::to_string(n) + "]",
                           line_no);
      }
      if (h == t.id) {
        throw MalformedRow("token is its own head", line_no);
      }
    }
  }
  if (apred_count != s.predicates.size()) {
    throw MalformedRow("sentence has " + std::to_string(s.predicates.size()) +
                           " predicates but " + std::to_string(apred_count) +
                           " APRED columns",
                       first_line_no);
  }
  return s;
}

std::vector<std::string> write_sentence(const Sentence& s) {
  std::vector<std::string> lines;
  lines.reserve(s.tokens.size());
  for (const Token& t : s.tokens) {
    std::string line = std::to_string(t.id);
    auto push = [&line](const std::string& f) {
      line += '\t';
      line += f;
    };
    push(t.form);
    push(empty_to_absent(t.lemma));
    push(empty_to_absent(t.plemma));
    push(empty_to_absent(t.pos));
    push(empty_to_absent(t.ppos));
    push(empty_to_absent(t.feat));
    push(empty_to_absent(t.pfeat));
    push(t.head == -1 ? std::string(kAbsent) : std::to_string(t.head));
    push(t.phead == -1 ? std::string(kAbsent) : std::to_string(t.phead));
    push(empty_to_absent(t.deprel));
    push(empty_to_absent(t.pdeprel));
    push(t.fill_pred ? "Y" : kAbsent);
    push(empty_to_absent(t.pred_sense));
    for (const std::string& r : t.apreds) push(empty_to_absent(r));
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<PredicateInstance> extract_instances(const Sentence& s) {
  std::vector<PredicateInstance> out;
  out.reserve(s.predicates.size());
  for (size_t k = 0; k < s.predicates.size(); ++k) {
    PredicateInstance inst;
    inst.sentence = &s;
    inst.predicate_index = s.predicates[k];
    inst.roles.reserve(s.tokens.size());
    for (const Token& t : s.tokens) inst.roles.push_back(t.apreds[k]);
    out.push_back(std::move(inst));
  }
  return out;
}

Sentence replace_roles(const Sentence& s,
                       const std::vector<std::vector<std::string>>& roles) {
  if (roles.size() != s.predicates.size()) {
    throw AlignmentError("replace_roles: " + std::to_string(roles.size()) +
                         " role columns for " +
                         std::to_string(s.predicates.size()) + " predicates");
  }
  Sentence out = s;
  for (size_t k = 0; k < roles.size(); ++k) {
    if (roles[k].size() != s.tokens.size()) {
      throw AlignmentError("replace_roles: role column " + std::to_string(k) +
                           " has " + std::to_string(roles[k].size()) +
                           " slots for " + std::to_string(s.tokens.size()) +
                           " tokens");
    }
    for (size_t i = 0; i < out.tokens.size(); ++i) {
      out.tokens[i].apreds[k] = roles[k][i];
    }
  }
  return out;
}

ScoreReport score(const std::vector<Sentence>& gold,
                  const std::vector<Sentence>& pred,
                  bool exclude_pred_sense) {
  if (gold.size() != pred.size()) {
    throw AlignmentError("corpora differ in sentence count: " +
                         std::to_string(gold.size()) + " vs " +
                         std::to_string(pred.size()));
  }
  ScoreReport r;
  for (size_t si = 0; si < gold.size(); ++si) {
    const Sentence& g = gold[si];
    const Sentence& p = pred[si];
    if (g.size() != p.size()) {
      throw AlignmentError("sentence " + std::to_string(si + 1) +
                           " differs in length: " + std::to_string(g.size()) +
                           " vs " + std::to_string(p.size()));
    }
    if (g.predicates != p.predicates) {
      throw AlignmentError("sentence " + std::to_string(si + 1) +
                           " differs in predicate positions");
    }
    for (size_t k = 0; k < g.predicates.size(); ++k) {
      for (size_t i = 0; i < g.tokens.size(); ++i) {
        const std::string& gr = g.tokens[i].apreds[k];
        const std::string& pr = p.tokens[i].apreds[k];
        if (!gr.empty()) ++r.gold;
        if (!pr.empty()) ++r.predicted;
        if (!gr.empty() && gr == pr) ++r.correct;
      }
      if (!exclude_pred_sense) {
        const int t = g.predicates[k];
        const std::string& gs = g.tokens[static_cast<size_t>(t)].pred_sense;
        const std::string& ps = p.tokens[static_cast<size_t>(t)].pred_sense;
        if (!gs.empty()) ++r.gold;
        if (!ps.empty()) ++r.predicted;
        if (!gs.empty() && gs == ps) ++r.correct;
      }
    }
  }
  r.labeled_precision =
      r.predicted > 0 ? static_cast<double>(r.correct) / r.predicted : 0.0;
  r.labeled_recall =
      r.gold > 0 ? static_cast<double>(r.correct) / r.gold : 0.0;
  const double pr_sum = r.labeled_precision + r.labeled_recall;
  r.labeled_f1 =
      pr_sum > 0.0 ? 2.0 * r.labeled_precision * r.labeled_recall / pr_sum
                   : 0.0;
  return r;
}

std::vector<Sentence> read_corpus(std::istream& in, const std::string& name) {
  std::vector<Sentence> corpus;
  std::vector<std::string> block;
  size_t line_no = 0;
  size_t block_start = 1;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!block.empty()) {
        corpus.push_back(parse_sentence(block, block_start));
        block.clear();
      }
      block_start = line_no + 1;
      continue;
    }
    if (block.empty()) block_start = line_no;
    block.push_back(line);
  }
  if (!block.empty()) corpus.push_back(parse_sentence(block, block_start));
  if (in.bad()) throw IoError("read failed for " + name);
  return corpus;
}

std::vector<Sentence> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_corpus(in, path);
}

void write_corpus(std::ostream& out, const std::vector<Sentence>& corpus) {
  for (const Sentence& s : corpus) {
    for (const std::string& line : write_sentence(s)) out << line << '\n';
    out << '\n';
  }
}

void write_corpus(const std::string& path,
                  const std::vector<Sentence>& corpus) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  write_corpus(out, corpus);
  if (!out) throw IoError("write failed for " + path);
}

std::string machine_line(const ScoreReport& r) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "P=%.6f R=%.6f F1=%.6f",
                r.labeled_precision, r.labeled_recall, r.labeled_f1);
  return buf;
}

std::string human_report(const ScoreReport& r) {
  std::ostringstream os;
  os << "labeled argument arcs\n"
     << "  predicted: " << r.predicted << "\n"
     << "  gold:      " << r.gold << "\n"
     << "  correct:   " << r.correct << "\n"
     << "  precision: " << r.labeled_precision << "\n"
     << "  recall:    " << r.labeled_recall << "\n"
     << "  f1:        " << r.labeled_f1 << "\n";
  return os.str();
}

}  // namespace synsrl::conll
