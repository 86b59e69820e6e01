#include <cmath>
#include <cstring>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "synsrl/tensor/checkpoint.hpp"
#include "synsrl/tensor/gradcheck.hpp"
#include "synsrl/tensor/tensor.hpp"
#include "testutil.hpp"

using namespace synsrl;
using nn::Tape;
using nn::Tensor;

namespace {

Tensor<double> random_tensor(Rng& rng, nn::Shape shape, double lo = -2.0,
                             double hi = 2.0) {
  Tensor<double> t = Tensor<double>::zeros(std::move(shape));
  for (auto& v : t.raw()) v = lo + (hi - lo) * rng.uniform();
  return t;
}

// Uniform in [-2,-0.1] u [0.1,2]; keeps relu and max kinks away from the
// finite-difference step.
Tensor<double> random_away_from_zero(Rng& rng, nn::Shape shape) {
  Tensor<double> t = Tensor<double>::zeros(std::move(shape));
  for (auto& v : t.raw()) {
    const double mag = 0.1 + 1.9 * rng.uniform();
    v = rng.bernoulli(0.5) ? mag : -mag;
  }
  return t;
}

}  // namespace

TEST_CASE("rng: fixed seed reproduces the stream, below stays in range") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(43);
  bool all_equal = true;
  Rng a2(42);
  for (int i = 0; i < 64; ++i) all_equal &= a2.next_u64() == c.next_u64();
  CHECK_FALSE(all_equal);
  Rng d(7);
  for (int i = 0; i < 2000; ++i) {
    const uint64_t v = d.below(13);
    CHECK(v < 13);
  }
  auto saved = d.save_state();
  const uint64_t expect = d.next_u64();
  Rng e(0);
  e.load_state(saved);
  CHECK(e.next_u64() == expect);
}

TEST_CASE("rng: normal draws have roughly standard moments") {
  Rng rng(3);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("tensor basics and shape errors") {
  Tensor<double> t = Tensor<double>::from_vector({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.numel() == 6);
  CHECK(t.at(1, 2) == 6);
  CHECK(t.at(3) == 4);
  CHECK(nn::shape_str(t.shape()) == "{2,3}");

  const Tensor<double> a = Tensor<double>::zeros({2, 3});
  const Tensor<double> b = Tensor<double>::zeros({4, 2});
  try {
    nn::matmul(a, b);
    FAIL("expected ShapeMismatch");
  } catch (const ShapeMismatch& e) {
    const std::string msg = e.what();
    CHECK(msg.find("{2,3}") != std::string::npos);
    CHECK(msg.find("{4,2}") != std::string::npos);
  }

  Tensor<double> not_scalar = Tensor<double>::zeros({2});
  not_scalar.set_requires_grad(true);
  Tape<double> tape;
  Tensor<double> y = nn::scale(not_scalar, 2.0, &tape);
  CHECK_THROWS_AS(tape.backward(y), NotScalarLoss);
}

TEST_CASE("forward values: relu, softmax rows, matmul vs naive") {
  Rng rng(5);
  Tensor<double> x = Tensor<double>::from_vector({1, 2}, {-1.0, 2.0});
  const auto r = nn::relu(x);
  CHECK(r.at(0) == 0.0);
  CHECK(r.at(1) == 2.0);

  Tensor<double> s_in = random_tensor(rng, {4, 9});
  const auto s = nn::softmax(s_in);
  for (int64_t i = 0; i < 4; ++i) {
    double row = 0.0;
    for (int64_t j = 0; j < 9; ++j) {
      CHECK(s.at(i, j) > 0.0);
      row += s.at(i, j);
    }
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }

  Tensor<double> a = random_tensor(rng, {5, 7});
  Tensor<double> b = random_tensor(rng, {7, 3});
  const auto c = nn::matmul(a, b);
  std::vector<double> want(5 * 3);
  testutil::naive_matmul(a.data().data(), b.data().data(), want.data(), 5, 7,
                         3);
  for (int64_t i = 0; i < 15; ++i) {
    CHECK(c.at(i) == doctest::Approx(want[static_cast<size_t>(i)])
                         .epsilon(1e-12));
  }
}

TEST_CASE("layer_norm normalizes each row before gain/bias") {
  Rng rng(6);
  Tensor<double> x = random_tensor(rng, {5, 16});
  Tensor<double> gain = Tensor<double>::full({16}, 1.0);
  Tensor<double> bias = Tensor<double>::zeros({16});
  const auto y = nn::layer_norm(x, gain, bias, 1e-6);
  for (int64_t i = 0; i < 5; ++i) {
    double mean = 0.0, var = 0.0;
    for (int64_t j = 0; j < 16; ++j) mean += y.at(i, j);
    mean /= 16;
    for (int64_t j = 0; j < 16; ++j) {
      var += (y.at(i, j) - mean) * (y.at(i, j) - mean);
    }
    var /= 16;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(var - 1.0) < 1e-4);  // eps shifts variance slightly
  }
}

TEST_CASE("backward: sum gives ones, sum(softmax) conserves to zero") {
  Rng rng(7);
  Tensor<double> x = random_tensor(rng, {3, 4});
  x.set_requires_grad(true);
  {
    Tape<double> tape;
    auto loss = nn::sum(x, &tape);
    tape.backward(loss);
    for (double g : x.grad()) CHECK(g == 1.0);
  }
  x.zero_grad();
  {
    Tape<double> tape;
    auto loss = nn::sum(nn::softmax(x, &tape), &tape);
    tape.backward(loss);
    for (double g : x.grad()) CHECK(std::abs(g) < 1e-10);
  }
}

TEST_CASE("backward accumulates across passes until zero_grad") {
  Tensor<double> x = Tensor<double>::from_vector({2}, {1.0, 2.0});
  x.set_requires_grad(true);
  for (int pass = 0; pass < 2; ++pass) {
    Tape<double> tape;
    auto loss = nn::sum(x, &tape);
    tape.backward(loss);
  }
  CHECK(x.grad()[0] == 2.0);
  x.zero_grad();
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("gradcheck: identity and every primitive under 1e-4") {
  Rng rng(11);

  // f = identity -> zero error by construction.
  {
    Tensor<double> x = random_tensor(rng, {3});
    auto rep = nn::grad_check<double>(
        [&](Tape<double>* t) { return nn::sum(x, t); },
        {{"x", x}}, 1e-5, 1e-4);
    CHECK(rep.max_rel_err < 1e-9);
  }

  const auto check = [&](const char* name,
                         const std::function<Tensor<double>(Tape<double>*)>& f,
                         std::vector<std::pair<std::string, Tensor<double>>>
                             inputs) {
    auto rep = nn::grad_check<double>(f, std::move(inputs), 1e-5, 1e-4);
    INFO(name, ": worst ", rep.worst.name, "[", rep.worst.index,
         "] analytic=", rep.worst.analytic, " numeric=", rep.worst.numeric);
    CHECK(rep.max_rel_err < 1e-4);
  };

  {
    Tensor<double> a = random_tensor(rng, {3, 4});
    Tensor<double> b = random_tensor(rng, {4, 2});
    check("matmul",
          [=](Tape<double>* t) { return nn::sum(nn::matmul(a, b, t), t); },
          {{"a", a}, {"b", b}});
  }
  {
    Tensor<double> a = random_tensor(rng, {3, 4});
    Tensor<double> b = random_tensor(rng, {3, 4});
    Tensor<double> mix = random_tensor(rng, {4, 3});
    check("add",
          [=](Tape<double>* t) {
            return nn::sum(nn::matmul(nn::add(a, b, t), mix, t), t);
          },
          {{"a", a}, {"b", b}});
  }
  {
    Tensor<double> a = random_tensor(rng, {3, 4});
    Tensor<double> b = random_tensor(rng, {4});  // broadcast over rows
    Tensor<double> mix = random_tensor(rng, {4, 3});
    check("add-broadcast",
          [=](Tape<double>* t) {
            return nn::sum(nn::matmul(nn::add(a, b, t), mix, t), t);
          },
          {{"a", a}, {"b", b}});
  }
  {
    Tensor<double> x = random_tensor(rng, {2, 5});
    Tensor<double> mix = random_tensor(rng, {5, 2});
    check("scale",
          [=](Tape<double>* t) {
            return nn::sum(nn::matmul(nn::scale(x, -1.7, t), mix, t), t);
          },
          {{"x", x}});
  }
  {
    Tensor<double> x = random_away_from_zero(rng, {4, 6});
    Tensor<double> mix = random_tensor(rng, {6, 2});
    check("relu",
          [=](Tape<double>* t) {
            return nn::sum(nn::matmul(nn::relu(x, t), mix, t), t);
          },
          {{"x", x}});
  }
  {
    Tensor<double> x = random_tensor(rng, {3, 5});
    Tensor<double> mix = random_tensor(rng, {5, 2});
    check("softmax",
          [=](Tape<double>* t) {
            return nn::sum(nn::matmul(nn::softmax(x, t), mix, t), t);
          },
          {{"x", x}});
  }
  {
    Tensor<double> x = random_tensor(rng, {4, 8});
    Tensor<double> gain = random_tensor(rng, {8}, 0.5, 1.5);
    Tensor<double> bias = random_tensor(rng, {8});
    Tensor<double> mix = random_tensor(rng, {8, 3});
    check("layer_norm",
          [=](Tape<double>* t) {
            return nn::sum(
                nn::matmul(nn::layer_norm(x, gain, bias, 1e-6, t), mix, t),
                t);
          },
          {{"x", x}, {"gain", gain}, {"bias", bias}});
  }
  {
    Tensor<double> table = random_tensor(rng, {5, 4});
    const std::vector<int32_t> ids = {0, 3, 1, 3};
    Tensor<double> mix = random_tensor(rng, {4, 2});
    check("embedding_lookup",
          [=](Tape<double>* t) {
            return nn::sum(
                nn::matmul(nn::embedding_lookup(table, ids, t), mix, t), t);
          },
          {{"table", table}});
  }
  {
    Tensor<double> a = random_tensor(rng, {2, 3});
    Tensor<double> b = random_tensor(rng, {2, 3});
    Tensor<double> mix0 = random_tensor(rng, {3, 2});
    Tensor<double> mix1 = random_tensor(rng, {6, 2});
    check("concat-axis0",
          [=](Tape<double>* t) {
            return nn::sum(nn::matmul(nn::concat<double>({a, b}, 0, t), mix0,
                                      t),
                           t);
          },
          {{"a", a}, {"b", b}});
    check("concat-axis1",
          [=](Tape<double>* t) {
            return nn::sum(nn::matmul(nn::concat<double>({a, b}, 1, t), mix1,
                                      t),
                           t);
          },
          {{"a", a}, {"b", b}});
  }
  {
    Tensor<double> x = random_tensor(rng, {4, 6});
    Tensor<double> mix = random_tensor(rng, {3, 2});
    check("slice",
          [=](Tape<double>* t) {
            return nn::sum(nn::matmul(nn::slice(x, 1, 2, 3, t), mix, t), t);
          },
          {{"x", x}});
  }
  {
    Tensor<double> x = random_tensor(rng, {3, 4});
    Tensor<double> mix = random_tensor(rng, {3, 2});
    check("transpose_last_two",
          [=](Tape<double>* t) {
            return nn::sum(nn::matmul(nn::transpose_last_two(x, t), mix, t),
                           t);
          },
          {{"x", x}});
  }
  {
    Tensor<double> x = random_tensor(rng, {3, 4});
    Tensor<double> w = random_tensor(rng, {4, 2});
    Tensor<double> b = random_tensor(rng, {2});
    check("affine",
          [=](Tape<double>* t) {
            return nn::sum(nn::affine(x, w, b, t), t);
          },
          {{"x", x}, {"w", w}, {"b", b}});
  }
  {
    // Fixed dropout mask: the rng is reseeded identically on every call.
    Tensor<double> x = random_tensor(rng, {4, 5});
    Tensor<double> mix = random_tensor(rng, {5, 2});
    check("dropout-fixed-mask",
          [=](Tape<double>* t) {
            Rng mask_rng(77);
            return nn::sum(
                nn::matmul(nn::dropout(x, 0.4, true, mask_rng, t), mix, t),
                t);
          },
          {{"x", x}});
  }
}

TEST_CASE("dropout: eval identity, train unbiased, rate validated") {
  Rng rng(13);
  Tensor<double> x = Tensor<double>::full({100000}, 1.0);
  Rng mask_rng(21);
  const auto eval = nn::dropout(x, 0.5, false, mask_rng);
  CHECK(eval.storage_id() == x.storage_id());  // true identity

  const auto trained = nn::dropout(x, 0.3, true, mask_rng);
  double mean = 0.0;
  int64_t zeros = 0;
  for (double v : trained.data()) {
    mean += v;
    zeros += v == 0.0;
  }
  mean /= static_cast<double>(x.numel());
  CHECK(std::abs(mean - 1.0) < 0.01);  // unbiased within 1%
  CHECK(std::abs(static_cast<double>(zeros) / static_cast<double>(x.numel()) -
                 0.3) < 0.01);

  CHECK_THROWS_AS(nn::dropout(x, 1.0, true, mask_rng), Error);
  CHECK_THROWS_AS(nn::dropout(x, -0.1, true, mask_rng), Error);
  (void)rng;
}

TEST_CASE("concat then slice recovers the operands exactly") {
  Rng rng(17);
  Tensor<double> a = random_tensor(rng, {2, 3});
  Tensor<double> b = random_tensor(rng, {4, 3});
  const auto cat0 = nn::concat<double>({a, b}, 0);
  const auto back_a = nn::slice(cat0, 0, 0, 2);
  const auto back_b = nn::slice(cat0, 0, 2, 4);
  CHECK(std::memcmp(back_a.data().data(), a.data().data(),
                    sizeof(double) * 6) == 0);
  CHECK(std::memcmp(back_b.data().data(), b.data().data(),
                    sizeof(double) * 12) == 0);

  Tensor<double> c = random_tensor(rng, {2, 5});
  const auto cat1 = nn::concat<double>({a, c}, 1);
  const auto back_a1 = nn::slice(cat1, 1, 0, 3);
  const auto back_c1 = nn::slice(cat1, 1, 3, 5);
  for (int64_t i = 0; i < 2; ++i) {
    for (int64_t j = 0; j < 3; ++j) CHECK(back_a1.at(i, j) == a.at(i, j));
    for (int64_t j = 0; j < 5; ++j) CHECK(back_c1.at(i, j) == c.at(i, j));
  }

  const auto t = nn::transpose_last_two(a);
  const auto tt = nn::transpose_last_two(t);
  CHECK(std::memcmp(tt.data().data(), a.data().data(), sizeof(double) * 6) ==
        0);
}

TEST_CASE("embedding lookup rejects out-of-range ids") {
  Tensor<double> table = Tensor<double>::zeros({3, 2});
  const std::vector<int32_t> bad = {0, 3};
  CHECK_THROWS_AS(nn::embedding_lookup(table, bad), IndexOutOfRange);
  const std::vector<int32_t> neg = {-1};
  CHECK_THROWS_AS(nn::embedding_lookup(table, neg), IndexOutOfRange);
}

TEST_CASE("fixed seed makes forward and backward bit-identical") {
  auto run = [] {
    Rng rng(99);
    Tensor<double> x = Tensor<double>::zeros({4, 6});
    x.fill_normal(rng, 0.0, 1.0);
    x.set_requires_grad(true);
    Tensor<double> w = Tensor<double>::zeros({6, 3});
    w.fill_normal(rng, 0.0, 0.5);
    Tape<double> tape;
    auto y = nn::sum(nn::softmax(nn::matmul(x, w, &tape), &tape), &tape);
    tape.backward(y);
    std::vector<double> out(x.grad().begin(), x.grad().end());
    out.push_back(y.at(0));
    return out;
  };
  const auto a = run();
  const auto b = run();
  CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
}

TEST_CASE("archive round trip is exact and atomic") {
  testutil::TempDir dir;
  nn::Archive a;
  Rng rng(23);
  std::vector<double> vals(12);
  for (auto& v : vals) v = rng.normal();
  a.put_f64("param/w", {3, 4}, vals);
  const std::vector<uint64_t> words = {0, 1, ~0ull, 42};
  a.put_u64("meta/counters", words);

  const std::string path = dir.file("model.ckpt");
  a.save(path);
  const auto loaded = nn::Archive::load(path);
  CHECK(loaded.has("param/w"));
  CHECK(loaded.has("meta/counters"));
  CHECK_FALSE(loaded.has("param/missing"));
  const auto& e = loaded.get_f64("param/w");
  CHECK(e.shape == nn::Shape({3, 4}));
  CHECK(std::memcmp(e.values.data(), vals.data(),
                    sizeof(double) * vals.size()) == 0);
  CHECK(loaded.get_u64("meta/counters").values == words);
  CHECK_THROWS_AS(loaded.get_f64("nope"), Error);

  // tmp+rename leaves exactly the archive behind
  int files = 0;
  for (const auto& p : std::filesystem::directory_iterator(dir.path)) {
    (void)p;
    ++files;
  }
  CHECK(files == 1);
}
