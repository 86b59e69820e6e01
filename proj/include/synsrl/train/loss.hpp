#pragma once

#include <cmath>
#include <memory>
#include <span>

#include "synsrl/tensor/tensor.hpp"

namespace synsrl::train {

using nn::Tape;
using nn::Tensor;

// Cross-entropy of each row's softmax against the smoothed target
// distribution (1-eps on the gold label, eps/(L-1) on the rest), averaged
// over rows. Fused op: the backward rule is (softmax - target)/rows.
template <class T>
Tensor<T> label_smoothed_cross_entropy(const Tensor<T>& logits,
                                       std::span<const int32_t> targets,
                                       T eps, Tape<T>* tape) {
  if (logits.rank() != 2) {
    throw ShapeMismatch("loss: logits must be 2-d, got " +
                        nn::shape_str(logits.shape()));
  }
  const int64_t n = logits.dim(0), l = logits.dim(1);
  if (static_cast<int64_t>(targets.size()) != n) {
    throw LengthMismatch("loss: " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(n) + " rows");
  }
  for (int32_t t : targets) {
    if (t < 0 || t >= l) {
      throw TargetOutOfRange("target " + std::to_string(t) + " outside [0, " +
                             std::to_string(l) + ")");
    }
  }
  if (eps < T(0) || eps >= T(1)) {
    throw ConfigError("label smoothing must be in [0,1)");
  }
  if (eps > T(0) && l < 2) {
    throw ConfigError("label smoothing needs at least 2 labels");
  }
  const T off = eps > T(0) ? eps / static_cast<T>(l - 1) : T(0);
  const T on = T(1) - eps;

  auto probs = std::make_shared<std::vector<T>>(
      logits.data().begin(), logits.data().end());
  const auto& K = kernels::active<T>();
  T total = T(0);
  for (int64_t r = 0; r < n; ++r) {
    T* row = probs->data() + r * l;
    const T m = K.max(row, l);
    T sumexp = T(0);
    for (int64_t j = 0; j < l; ++j) {
      row[j] = std::exp(row[j] - m);
      sumexp += row[j];
    }
    K.scale(T(1) / sumexp, row, row, l);
    const T logz = std::log(sumexp) + m;
    const T* x = logits.data().data() + r * l;
    T qx = T(0);
    for (int64_t j = 0; j < l; ++j) {
      qx += (j == targets[static_cast<size_t>(r)] ? on : off) * x[j];
    }
    total += logz - qx;
  }
  Tensor<T> out = Tensor<T>::scalar(total / static_cast<T>(n));

  if (tape && logits.tracked()) {
    out.mark_tracked();
    std::vector<int32_t> tgt(targets.begin(), targets.end());
    tape->record([logits, out, probs, tgt = std::move(tgt), n, l, on,
                  off]() mutable {
      const T g = out.grad_buf()[0] / static_cast<T>(n);
      Tensor<T> lg = logits;
      T* dx = lg.grad_buf().data();
      const T* p = probs->data();
      for (int64_t r = 0; r < n; ++r) {
        for (int64_t j = 0; j < l; ++j) {
          const T q = j == tgt[static_cast<size_t>(r)] ? on : off;
          dx[r * l + j] += g * (p[r * l + j] - q);
        }
      }
    });
  }
  return out;
}

}  // namespace synsrl::train
