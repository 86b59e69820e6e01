#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "synsrl/conll/conll.hpp"
#include "testutil.hpp"

using namespace synsrl;
using conll::Sentence;
using conll::Token;
using conll::Which;

TEST_CASE("parsing fills every column of the 5-token fixture") {
  const auto corpus = testutil::parse_text(testutil::figure_conll_text());
  REQUIRE(corpus.size() == 1);
  const Sentence& s = corpus[0];
  REQUIRE(s.size() == 5);

  const std::vector<std::string> forms = {"中国", "鼓励", "外商", "投资",
                                          "农业"};
  const std::vector<int> heads = {2, 0, 2, 2, 4};
  const std::vector<std::string> labels = {"SBJ", "ROOT", "COMP", "COMP",
                                           "COMP"};
  for (size_t i = 0; i < 5; ++i) {
    const Token& t = s.tokens[i];
    CHECK(t.id == static_cast<int>(i) + 1);
    CHECK(t.form == forms[i]);
    CHECK(t.lemma == forms[i]);
    CHECK(t.head == heads[i]);
    CHECK(t.phead == heads[i]);
    CHECK(t.deprel == labels[i]);
    CHECK(t.feat.empty());  // "_" becomes empty
    CHECK(t.apreds.size() == 1);
  }
  CHECK(s.tokens[0].pos == "NR");
  CHECK(s.tokens[1].pos == "VV");
  CHECK(s.predicates == std::vector<int>{1});
  CHECK(s.tokens[1].fill_pred);
  CHECK(s.tokens[1].pred_sense == "鼓励.01");
  CHECK(s.tokens[0].apreds[0] == "A0");
  CHECK(s.tokens[1].apreds[0].empty());
  CHECK(s.tokens[2].apreds[0] == "A1");
  CHECK(s.tokens[3].apreds[0] == "A2");
  CHECK(s.tokens[4].apreds[0].empty());

  CHECK(s.tokens[0].head_for(Which::Gold) == 2);
  CHECK(s.tokens[0].head_for(Which::Predicted) == 2);
  CHECK(s.tokens[0].deprel_for(Which::Gold) == "SBJ");
  CHECK(s.tokens[0].pos_for(Which::Predicted) == "NR");
}

TEST_CASE("the 6-token variant keeps the verb as root with roles intact") {
  const auto corpus = testutil::parse_text(testutil::figure_root_conll_text());
  REQUIRE(corpus.size() == 1);
  const Sentence& s = corpus[0];
  REQUIRE(s.size() == 6);
  CHECK(s.tokens[0].form == "$");
  CHECK(s.tokens[0].head == 3);
  CHECK(s.tokens[2].head == 0);  // 鼓励 is the root
  CHECK(s.predicates == std::vector<int>{2});
  // Roles sit on 1-based tokens 2, 4, 5.
  CHECK(s.tokens[1].apreds[0] == "A0");
  CHECK(s.tokens[3].apreds[0] == "A1");
  CHECK(s.tokens[4].apreds[0] == "A2");
  CHECK(s.tokens[0].apreds[0].empty());
  CHECK(s.tokens[2].apreds[0].empty());
  CHECK(s.tokens[5].apreds[0].empty());
}

TEST_CASE("round trip: parse, write, parse is lossless") {
  const std::string orig = testutil::figure_conll_text() +
                           testutil::two_predicate_conll_text();
  const auto corpus = testutil::parse_text(orig);
  REQUIRE(corpus.size() == 2);
  std::ostringstream out;
  conll::write_corpus(out, corpus);
  CHECK(out.str() == orig);

  const auto again = testutil::parse_text(out.str());
  REQUIRE(again.size() == 2);
  CHECK(again[1].predicates == std::vector<int>({1, 3}));
}

TEST_CASE("CRLF line endings and a missing trailing blank line both parse") {
  std::string txt = testutil::figure_conll_text();
  // Re-join with \r\n and drop the final blank line.
  std::string crlf;
  for (const auto& line : testutil::split_lines(txt)) {
    if (line.empty()) continue;
    crlf += line + "\r\n";
  }
  const auto corpus = testutil::parse_text(crlf);
  REQUIRE(corpus.size() == 1);
  CHECK(corpus[0].size() == 5);
  CHECK(corpus[0].tokens[4].apreds[0].empty());
}

TEST_CASE("empty input gives an empty corpus") {
  CHECK(testutil::parse_text("").empty());
  CHECK(testutil::parse_text("\n\n\n").empty());
}

TEST_CASE("malformed rows report the failing line") {
  const auto expect_line = [](const std::string& text, long line) {
    try {
      testutil::parse_text(text);
      FAIL_CHECK("expected MalformedRow for: ", text);
    } catch (const MalformedRow& e) {
      CHECK(e.line == line);
      CHECK(std::string(e.what()).find("line " + std::to_string(line)) !=
            std::string::npos);
    }
  };

  // Too few columns on row 2.
  expect_line(
      "1\ta\ta\ta\tN\tN\t_\t_\t2\t2\tSBJ\tSBJ\t_\t_\t_\n"
      "2\tv\tv\tv\n\n",
      2);
  // IDs out of sequence.
  expect_line(
      "1\ta\ta\ta\tN\tN\t_\t_\t2\t2\tSBJ\tSBJ\t_\t_\t_\n"
      "3\tv\tv\tv\tV\tV\t_\t_\t0\t0\tROOT\tROOT\tY\tv.01\t_\n\n",
      2);
  // Head out of range.
  expect_line("1\tv\tv\tv\tV\tV\t_\t_\t7\t0\tROOT\tROOT\tY\tv.01\t_\n\n", 1);
  // Token its own head.
  expect_line("1\tv\tv\tv\tV\tV\t_\t_\t1\t1\tROOT\tROOT\tY\tv.01\t_\n\n", 1);
  // Non-integer head.
  expect_line("1\tv\tv\tv\tV\tV\t_\t_\tx\t0\tROOT\tROOT\tY\tv.01\t_\n\n", 1);
  // FILLPRED says predicate but PRED is absent.
  expect_line("1\tv\tv\tv\tV\tV\t_\t_\t0\t0\tROOT\tROOT\tY\t_\t_\n\n", 1);
  // FILLPRED garbage.
  expect_line("1\tv\tv\tv\tV\tV\t_\t_\t0\t0\tROOT\tROOT\tq\tv.01\t_\n\n", 1);
  // Ragged APRED columns: row 2 has one fewer than row 1. The blank-line
  // offset in front shifts the block, checking line bookkeeping.
  expect_line(
      "\n\n1\ta\ta\ta\tN\tN\t_\t_\t2\t2\tSBJ\tSBJ\t_\t_\tA0\tA1\n"
      "2\tv\tv\tv\tV\tV\t_\t_\t0\t0\tROOT\tROOT\tY\tv.01\t_\n\n",
      4);
  // One predicate but two APRED columns.
  expect_line(
      "1\ta\ta\ta\tN\tN\t_\t_\t2\t2\tSBJ\tSBJ\t_\t_\tA0\tA1\n"
      "2\tv\tv\tv\tV\tV\t_\t_\t0\t0\tROOT\tROOT\tY\tv.01\t_\t_\n\n",
      1);
}

TEST_CASE("extract_instances splits columns, replace_roles writes them back") {
  const auto corpus = testutil::parse_text(testutil::two_predicate_conll_text());
  const Sentence& s = corpus.at(0);
  const auto insts = conll::extract_instances(s);
  REQUIRE(insts.size() == 2);
  CHECK(insts[0].sentence == &s);
  CHECK(insts[0].predicate_index == 1);  // wants
  CHECK(insts[1].predicate_index == 3);  // go
  CHECK(insts[0].roles ==
        std::vector<std::string>({"A0", "", "", "A1"}));
  CHECK(insts[1].roles == std::vector<std::string>({"A0", "", "", ""}));

  const std::vector<std::vector<std::string>> swapped = {
      {"", "", "A2", ""}, {"", "A0", "", ""}};
  const Sentence replaced = conll::replace_roles(s, swapped);
  CHECK(replaced.tokens[2].apreds[0] == "A2");
  CHECK(replaced.tokens[0].apreds[0].empty());
  CHECK(replaced.tokens[1].apreds[1] == "A0");
  // Everything else untouched.
  CHECK(replaced.tokens[1].pred_sense == "want.01");
  CHECK(replaced.tokens[3].head == 2);

  CHECK_THROWS_AS(conll::replace_roles(s, {{"", "", "", ""}}),
                  AlignmentError);
  CHECK_THROWS_AS(conll::replace_roles(s, {{"", ""}, {"", ""}}),
                  AlignmentError);
}

TEST_CASE("a corpus scored against itself is exactly (1, 1, 1)") {
  const auto corpus = testutil::parse_text(testutil::figure_conll_text() +
                                           testutil::two_predicate_conll_text());
  const auto r = conll::score(corpus, corpus);
  CHECK(r.labeled_precision == 1.0);
  CHECK(r.labeled_recall == 1.0);
  CHECK(r.labeled_f1 == 1.0);
  CHECK(r.gold == 6);  // 3 + 3 argument arcs
  CHECK(r.predicted == 6);
  CHECK(r.correct == 6);
}

TEST_CASE("scorer counts labeled arcs: 3 of 5 predicted, 3 of 4 gold") {
  const auto [gold, pred] = testutil::scorer_fixture();
  const auto r = conll::score(gold, pred);
  CHECK(r.gold == 4);
  CHECK(r.predicted == 5);
  CHECK(r.correct == 3);
  CHECK(r.labeled_precision == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(r.labeled_recall == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(r.labeled_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(conll::machine_line(r) == "P=0.600000 R=0.750000 F1=0.666667");
  const std::string human = conll::human_report(r);
  CHECK(human.find("predicted: 5") != std::string::npos);
  CHECK(human.find("gold:      4") != std::string::npos);
}

TEST_CASE("predicate senses join the counts only when asked") {
  auto [gold, pred] = testutil::scorer_fixture();
  // Same sense on both sides: one extra gold, predicted, and correct arc.
  const auto with = conll::score(gold, pred, /*exclude_pred_sense=*/false);
  CHECK(with.gold == 5);
  CHECK(with.predicted == 6);
  CHECK(with.correct == 4);

  // Change the predicted sense: the arc stops matching.
  pred[0].tokens[1].pred_sense = "v.02";
  const auto wrong = conll::score(gold, pred, false);
  CHECK(wrong.correct == 3);
  CHECK(conll::score(gold, pred, true).correct == 3);  // excluded: no effect
}

TEST_CASE("score refuses misaligned corpora") {
  const auto a = testutil::parse_text(testutil::figure_conll_text());
  const auto b = testutil::parse_text(testutil::figure_root_conll_text());
  CHECK_THROWS_AS(conll::score(a, {}), AlignmentError);
  CHECK_THROWS_AS(conll::score(a, b), AlignmentError);  // 5 vs 6 tokens

  // Same length, different predicate positions.
  auto c = a;
  c[0].tokens[1].fill_pred = false;
  c[0].tokens[1].pred_sense.clear();
  c[0].tokens[3].fill_pred = true;
  c[0].tokens[3].pred_sense = "投资.01";
  c[0].predicates = {3};
  CHECK_THROWS_AS(conll::score(a, c), AlignmentError);
}

TEST_CASE("an all-underscore prediction scores zero without dividing by zero") {
  const auto gold = testutil::parse_text(testutil::figure_conll_text());
  auto pred = gold;
  for (auto& t : pred[0].tokens) {
    for (auto& r : t.apreds) r.clear();
  }
  const auto r = conll::score(gold, pred);
  CHECK(r.predicted == 0);
  CHECK(r.labeled_precision == 0.0);
  CHECK(r.labeled_recall == 0.0);
  CHECK(r.labeled_f1 == 0.0);
}

TEST_CASE("read_corpus throws IoError for a missing file") {
  CHECK_THROWS_AS(conll::read_corpus("/nonexistent/corpus.conll"), IoError);
}
