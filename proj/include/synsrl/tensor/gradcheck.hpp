#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "synsrl/tensor/tensor.hpp"

namespace synsrl::nn {

template <class T>
struct GradCheckReport {
  struct Entry {
    std::string name;
    int64_t index;
    T analytic;
    T numeric;
    T rel_err;
  };
  std::vector<Entry> entries;  // one per checked element
  T max_rel_err = T(0);
  Entry worst{};

  bool pass(T tol) const { return max_rel_err < tol; }
};

// Central-difference check of d(loss)/d(input) for every element of every
// named input. `f` must rebuild the forward pass from the current input
// values and return the scalar loss; it is called once with a tape for the
// analytic pass and twice per element for the numeric one.
template <class T>
GradCheckReport<T> grad_check(
    const std::function<Tensor<T>(Tape<T>*)>& f,
    std::vector<std::pair<std::string, Tensor<T>>> inputs, T h, T tol) {
  (void)tol;
  GradCheckReport<T> report;
  for (auto& [name, t] : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  Tape<T> tape;
  Tensor<T> loss = f(&tape);
  tape.backward(loss);

  std::vector<std::vector<T>> analytic;
  analytic.reserve(inputs.size());
  for (auto& [name, t] : inputs) {
    auto g = t.grad_buf();
    analytic.emplace_back(g.begin(), g.end());
  }

  for (size_t k = 0; k < inputs.size(); ++k) {
    auto& [name, t] = inputs[k];
    auto vals = t.raw();
    for (int64_t i = 0; i < t.numel(); ++i) {
      const T saved = vals[static_cast<size_t>(i)];
      vals[static_cast<size_t>(i)] = saved + h;
      const T up = f(nullptr).at(0);
      vals[static_cast<size_t>(i)] = saved - h;
      const T dn = f(nullptr).at(0);
      vals[static_cast<size_t>(i)] = saved;
      const T numeric = (up - dn) / (T(2) * h);
      const T a = analytic[k][static_cast<size_t>(i)];
      const T denom = std::max({T(1), std::abs(a), std::abs(numeric)});
      const T rel = std::abs(a - numeric) / denom;
      typename GradCheckReport<T>::Entry e{name, i, a, numeric, rel};
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst = e;
      }
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

}  // namespace synsrl::nn
