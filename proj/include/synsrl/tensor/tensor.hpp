#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "synsrl/common.hpp"
#include "synsrl/kernels/kernels.hpp"
#include "synsrl/tensor/rng.hpp"

namespace synsrl::nn {

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '{';
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ',';
    os << s[i];
  }
  os << '}';
  return os.str();
}

inline void check_shapes_equal(const Shape& a, const Shape& b,
                               const char* op) {
  if (a != b) {
    throw ShapeMismatch(std::string(op) + ": " + shape_str(a) + " vs " +
                        shape_str(b));
  }
}

// Dense row-major array. A Tensor is a cheap value-semantic handle onto
// shared storage; the stored values are treated as immutable once the tensor
// participates in a recorded computation. Leaves marked requires_grad
// accumulate gradients across backward passes until zero_grad().
template <class T>
class Tensor {
  struct Payload {
    Shape shape;
    std::vector<T> v;
    std::vector<T> grad;  // empty until first needed
    bool tracked = false;
  };

 public:
  Tensor() = default;

  static Tensor zeros(Shape shape) {
    Tensor t;
    t.p_ = std::make_shared<Payload>();
    t.p_->shape = std::move(shape);
    t.p_->v.assign(static_cast<size_t>(shape_numel(t.p_->shape)), T(0));
    return t;
  }

  static Tensor full(Shape shape, T value) {
    Tensor t = zeros(std::move(shape));
    for (auto& x : t.p_->v) x = value;
    return t;
  }

  static Tensor scalar(T value) { return full({1}, value); }

  static Tensor from_vector(Shape shape, std::vector<T> values) {
    if (shape_numel(shape) != static_cast<int64_t>(values.size())) {
      throw ShapeMismatch("from_vector: shape " + shape_str(shape) +
                          " does not hold " + std::to_string(values.size()) +
                          " values");
    }
    Tensor t;
    t.p_ = std::make_shared<Payload>();
    t.p_->shape = std::move(shape);
    t.p_->v = std::move(values);
    return t;
  }

  bool defined() const { return static_cast<bool>(p_); }
  const Shape& shape() const { return p_->shape; }
  int64_t rank() const { return static_cast<int64_t>(p_->shape.size()); }
  int64_t dim(int64_t i) const { return p_->shape[static_cast<size_t>(i)]; }
  int64_t numel() const { return static_cast<int64_t>(p_->v.size()); }

  std::span<const T> data() const { return p_->v; }
  // Mutable view; only for initialization and tests, never on tensors that
  // already sit inside a recorded graph.
  std::span<T> raw() { return p_->v; }

  T at(int64_t i) const { return p_->v[static_cast<size_t>(i)]; }
  T at(int64_t i, int64_t j) const {
    return p_->v[static_cast<size_t>(i * dim(1) + j)];
  }

  void set_requires_grad(bool on) { p_->tracked = on; }
  bool tracked() const { return p_ && p_->tracked; }
  void mark_tracked() { p_->tracked = true; }

  bool has_grad() const { return p_ && !p_->grad.empty(); }
  std::span<const T> grad() const { return p_->grad; }
  std::span<T> grad_buf() {
    if (p_->grad.empty()) p_->grad.assign(p_->v.size(), T(0));
    return p_->grad;
  }
  void zero_grad() {
    if (!p_->grad.empty()) std::fill(p_->grad.begin(), p_->grad.end(), T(0));
  }

  void fill_normal(Rng& rng, double mean, double stddev) {
    for (auto& x : p_->v) x = static_cast<T>(rng.normal(mean, stddev));
  }

  // Identity of storage, for aliasing checks in tests.
  const void* storage_id() const { return p_.get(); }

 private:
  std::shared_ptr<Payload> p_;
};

// Reverse-mode tape. Operations append a backward closure when any input is
// tracked; backward() replays them in reverse and then clears the tape, so a
// tape serves exactly one forward/backward cycle.
template <class T>
class Tape {
 public:
  void record(std::function<void()> bw) { nodes_.push_back(std::move(bw)); }

  void backward(Tensor<T> loss) {
    if (!loss.defined() || loss.numel() != 1) {
      throw NotScalarLoss("backward: loss must be a scalar tensor, got " +
                          (loss.defined() ? shape_str(loss.shape())
                                          : std::string("<null>")));
    }
    loss.grad_buf()[0] += T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    nodes_.clear();
  }

  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  std::vector<std::function<void()>> nodes_;
};

namespace detail {

template <class T>
void transpose_into(const T* src, T* dst, int64_t m, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) dst[j * m + i] = src[i * n + j];
  }
}

template <class T>
bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

template <class T>
bool want_record(Tape<T>* tape, std::initializer_list<const Tensor<T>*> ins) {
  if (!tape) return false;
  for (const Tensor<T>* t : ins) {
    if (t->tracked()) return true;
  }
  return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Primitive operations
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b,
                 Tape<T>* tape = nullptr) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeMismatch("matmul: " + shape_str(a.shape()) + " x " +
                        shape_str(b.shape()));
  }
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor<T> out = Tensor<T>::zeros({m, n});
  const auto& K = kernels::active<T>();
  K.matmul(a.data().data(), b.data().data(), out.raw().data(), m, k, n);
  if (detail::want_record(tape, {&a, &b})) {
    out.mark_tracked();
    tape->record([a, b, out, m, k, n]() mutable {
      const auto& Kb = kernels::active<T>();
      const T* go = out.grad_buf().data();
      if (a.tracked()) {
        // dA += dC * B^T
        std::vector<T> bt(static_cast<size_t>(k * n));
        detail::transpose_into(b.data().data(), bt.data(), k, n);
        std::vector<T> tmp(static_cast<size_t>(m * k));
        Kb.matmul(go, bt.data(), tmp.data(), m, n, k);
        Tensor<T> ag = a;
        Kb.axpy(T(1), tmp.data(), ag.grad_buf().data(), m * k);
      }
      if (b.tracked()) {
        // dB += A^T * dC
        std::vector<T> at(static_cast<size_t>(m * k));
        detail::transpose_into(a.data().data(), at.data(), m, k);
        std::vector<T> tmp(static_cast<size_t>(k * n));
        Kb.matmul(at.data(), go, tmp.data(), k, m, n);
        Tensor<T> bg = b;
        Kb.axpy(T(1), tmp.data(), bg.grad_buf().data(), k * n);
      }
    });
  }
  return out;
}

// Elementwise addition; b may broadcast when its shape is a suffix of a's
// (leading axes of a replicate b). No other broadcasting is supported.
template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b, Tape<T>* tape = nullptr) {
  const bool same = a.shape() == b.shape();
  if (!same && !detail::is_suffix<T>(b.shape(), a.shape())) {
    throw ShapeMismatch("add: " + shape_str(a.shape()) + " vs " +
                        shape_str(b.shape()));
  }
  const int64_t an = a.numel(), bn = b.numel();
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  const auto& K = kernels::active<T>();
  if (same) {
    K.add(a.data().data(), b.data().data(), out.raw().data(), an);
  } else {
    for (int64_t off = 0; off < an; off += bn) {
      K.add(a.data().data() + off, b.data().data(), out.raw().data() + off,
            bn);
    }
  }
  if (detail::want_record(tape, {&a, &b})) {
    out.mark_tracked();
    tape->record([a, b, out, an, bn]() mutable {
      const auto& Kb = kernels::active<T>();
      const T* go = out.grad_buf().data();
      if (a.tracked()) {
        Tensor<T> ag = a;
        Kb.axpy(T(1), go, ag.grad_buf().data(), an);
      }
      if (b.tracked()) {
        Tensor<T> bg = b;
        T* gb = bg.grad_buf().data();
        for (int64_t off = 0; off < an; off += bn) {
          Kb.axpy(T(1), go + off, gb, bn);
        }
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> scale(const Tensor<T>& x, T c, Tape<T>* tape = nullptr) {
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  const auto& K = kernels::active<T>();
  K.scale(c, x.data().data(), out.raw().data(), x.numel());
  if (detail::want_record(tape, {&x})) {
    out.mark_tracked();
    tape->record([x, out, c]() mutable {
      Tensor<T> xg = x;
      kernels::active<T>().axpy(c, out.grad_buf().data(), xg.grad_buf().data(),
                                x.numel());
    });
  }
  return out;
}

template <class T>
Tensor<T> relu(const Tensor<T>& x, Tape<T>* tape = nullptr) {
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  const auto& K = kernels::active<T>();
  K.relu_fwd(x.data().data(), out.raw().data(), x.numel());
  if (detail::want_record(tape, {&x})) {
    out.mark_tracked();
    tape->record([x, out]() mutable {
      Tensor<T> xg = x;
      kernels::active<T>().relu_bwd(x.data().data(), out.grad_buf().data(),
                                    xg.grad_buf().data(), x.numel());
    });
  }
  return out;
}

// Softmax along the last axis, numerically stabilized by the row max.
template <class T>
Tensor<T> softmax(const Tensor<T>& x, Tape<T>* tape = nullptr) {
  if (x.rank() < 1 || x.dim(x.rank() - 1) < 1) {
    throw ShapeMismatch("softmax: needs a non-empty last axis, got " +
                        shape_str(x.shape()));
  }
  const int64_t n = x.dim(x.rank() - 1);
  const int64_t rows = x.numel() / n;
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  const auto& K = kernels::active<T>();
  const T* xp = x.data().data();
  T* yp = out.raw().data();
  for (int64_t r = 0; r < rows; ++r) {
    const T* xr = xp + r * n;
    T* yr = yp + r * n;
    const T m = K.max(xr, n);
    for (int64_t j = 0; j < n; ++j) yr[j] = std::exp(xr[j] - m);
    const T s = K.sum(yr, n);
    K.scale(T(1) / s, yr, yr, n);
  }
  if (detail::want_record(tape, {&x})) {
    out.mark_tracked();
    tape->record([x, out, rows, n]() mutable {
      const auto& Kb = kernels::active<T>();
      Tensor<T> xg = x;
      const T* y = out.data().data();
      const T* gy = out.grad_buf().data();
      T* gx = xg.grad_buf().data();
      for (int64_t r = 0; r < rows; ++r) {
        const T* yr = y + r * n;
        const T* gr = gy + r * n;
        T* dr = gx + r * n;
        const T s = Kb.dot(gr, yr, n);
        for (int64_t j = 0; j < n; ++j) dr[j] += yr[j] * (gr[j] - s);
      }
    });
  }
  return out;
}

// Layer normalization over the last axis with learned gain and bias of that
// width. Variance is the population variance of the row.
template <class T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain,
                     const Tensor<T>& bias, T eps, Tape<T>* tape = nullptr) {
  const int64_t n = x.dim(x.rank() - 1);
  if (gain.shape() != Shape{n} || bias.shape() != Shape{n}) {
    throw ShapeMismatch("layer_norm: gain " + shape_str(gain.shape()) +
                        ", bias " + shape_str(bias.shape()) +
                        " must both be {" + std::to_string(n) + "}");
  }
  const int64_t rows = x.numel() / n;
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  auto xhat = std::make_shared<std::vector<T>>(x.data().begin(),
                                               x.data().end());
  auto inv_std = std::make_shared<std::vector<T>>(static_cast<size_t>(rows));
  const auto& K = kernels::active<T>();
  const T* gp = gain.data().data();
  const T* bp = bias.data().data();
  for (int64_t r = 0; r < rows; ++r) {
    T* xr = xhat->data() + r * n;
    const T mean = K.sum(xr, n) / static_cast<T>(n);
    for (int64_t j = 0; j < n; ++j) xr[j] -= mean;
    const T var = K.dot(xr, xr, n) / static_cast<T>(n);
    const T is = T(1) / std::sqrt(var + eps);
    (*inv_std)[static_cast<size_t>(r)] = is;
    K.scale(is, xr, xr, n);
    T* yr = out.raw().data() + r * n;
    K.mul(xr, gp, yr, n);
    K.add(yr, bp, yr, n);
  }
  if (detail::want_record(tape, {&x, &gain, &bias})) {
    out.mark_tracked();
    tape->record([x, gain, bias, out, xhat, inv_std, rows, n]() mutable {
      const auto& Kb = kernels::active<T>();
      const T* gy = out.grad_buf().data();
      const T* gp = gain.data().data();
      std::vector<T> h(static_cast<size_t>(n));
      for (int64_t r = 0; r < rows; ++r) {
        const T* gr = gy + r * n;
        const T* xh = xhat->data() + r * n;
        if (gain.tracked()) {
          Tensor<T> gg = gain;
          T* dg = gg.grad_buf().data();
          for (int64_t j = 0; j < n; ++j) dg[j] += gr[j] * xh[j];
        }
        if (bias.tracked()) {
          Tensor<T> bg = bias;
          Kb.axpy(T(1), gr, bg.grad_buf().data(), n);
        }
        if (x.tracked()) {
          Tensor<T> xg = x;
          T* dx = xg.grad_buf().data() + r * n;
          Kb.mul(gr, gp, h.data(), n);
          const T mh = Kb.sum(h.data(), n) / static_cast<T>(n);
          const T mhx = Kb.dot(h.data(), xh, n) / static_cast<T>(n);
          const T is = (*inv_std)[static_cast<size_t>(r)];
          for (int64_t j = 0; j < n; ++j) {
            dx[j] += (h[j] - mh - xh[j] * mhx) * is;
          }
        }
      }
    });
  }
  return out;
}

// Row gather: out[i] = table[ids[i]]. Gradient scatter-adds into the table.
template <class T>
Tensor<T> embedding_lookup(const Tensor<T>& table,
                           std::span<const int32_t> ids,
                           Tape<T>* tape = nullptr) {
  if (table.rank() != 2) {
    throw ShapeMismatch("embedding_lookup: table must be 2-d, got " +
                        shape_str(table.shape()));
  }
  const int64_t v = table.dim(0), d = table.dim(1);
  for (int32_t id : ids) {
    if (id < 0 || id >= v) {
      throw IndexOutOfRange("embedding_lookup: id " + std::to_string(id) +
                            " outside table of " + std::to_string(v) +
                            " rows");
    }
  }
  const int64_t n = static_cast<int64_t>(ids.size());
  Tensor<T> out = Tensor<T>::zeros({n, d});
  for (int64_t i = 0; i < n; ++i) {
    std::memcpy(out.raw().data() + i * d, table.data().data() + ids[i] * d,
                sizeof(T) * static_cast<size_t>(d));
  }
  if (detail::want_record(tape, {&table})) {
    out.mark_tracked();
    std::vector<int32_t> idv(ids.begin(), ids.end());
    tape->record([table, out, idv = std::move(idv), d]() mutable {
      const auto& Kb = kernels::active<T>();
      Tensor<T> tg = table;
      T* gt = tg.grad_buf().data();
      const T* go = out.grad_buf().data();
      for (size_t i = 0; i < idv.size(); ++i) {
        Kb.axpy(T(1), go + static_cast<int64_t>(i) * d, gt + idv[i] * d, d);
      }
    });
  }
  return out;
}

// Concatenate 2-d tensors along axis 0 (rows) or 1 (columns).
template <class T>
Tensor<T> concat(std::span<const Tensor<T>> parts, int axis,
                 Tape<T>* tape = nullptr) {
  if (parts.empty()) throw ShapeMismatch("concat: no operands");
  if (axis != 0 && axis != 1) {
    throw ShapeMismatch("concat: axis must be 0 or 1, got " +
                        std::to_string(axis));
  }
  const int64_t fixed = parts[0].dim(1 - axis);
  int64_t total = 0;
  for (const auto& p : parts) {
    if (p.rank() != 2 || p.dim(1 - axis) != fixed) {
      throw ShapeMismatch("concat: operand " + shape_str(p.shape()) +
                          " incompatible along axis " + std::to_string(axis));
    }
    total += p.dim(axis);
  }
  Shape oshape = axis == 0 ? Shape{total, fixed} : Shape{fixed, total};
  Tensor<T> out = Tensor<T>::zeros(oshape);
  if (axis == 0) {
    int64_t row = 0;
    for (const auto& p : parts) {
      std::memcpy(out.raw().data() + row * fixed, p.data().data(),
                  sizeof(T) * static_cast<size_t>(p.numel()));
      row += p.dim(0);
    }
  } else {
    int64_t col = 0;
    for (const auto& p : parts) {
      const int64_t w = p.dim(1);
      for (int64_t i = 0; i < fixed; ++i) {
        std::memcpy(out.raw().data() + i * total + col,
                    p.data().data() + i * w,
                    sizeof(T) * static_cast<size_t>(w));
      }
      col += w;
    }
  }
  bool any_tracked = false;
  for (const auto& p : parts) any_tracked |= p.tracked();
  if (tape && any_tracked) {
    out.mark_tracked();
    std::vector<Tensor<T>> held(parts.begin(), parts.end());
    tape->record([held = std::move(held), out, axis, fixed, total]() mutable {
      const auto& Kb = kernels::active<T>();
      const T* go = out.grad_buf().data();
      if (axis == 0) {
        int64_t row = 0;
        for (auto& p : held) {
          if (p.tracked()) {
            Kb.axpy(T(1), go + row * fixed, p.grad_buf().data(), p.numel());
          }
          row += p.dim(0);
        }
      } else {
        int64_t col = 0;
        for (auto& p : held) {
          const int64_t w = p.dim(1);
          if (p.tracked()) {
            T* gp = p.grad_buf().data();
            for (int64_t i = 0; i < fixed; ++i) {
              Kb.axpy(T(1), go + i * total + col, gp + i * w, w);
            }
          }
          col += w;
        }
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> concat(std::initializer_list<Tensor<T>> parts, int axis,
                 Tape<T>* tape = nullptr) {
  std::vector<Tensor<T>> v(parts);
  return concat(std::span<const Tensor<T>>(v), axis, tape);
}

// Contiguous slice of a 2-d tensor along an axis.
template <class T>
Tensor<T> slice(const Tensor<T>& x, int axis, int64_t start, int64_t len,
                Tape<T>* tape = nullptr) {
  if (x.rank() != 2 || axis < 0 || axis > 1 || start < 0 || len < 0 ||
      start + len > x.dim(axis)) {
    throw ShapeMismatch("slice: [" + std::to_string(start) + "," +
                        std::to_string(start + len) + ") on axis " +
                        std::to_string(axis) + " of " + shape_str(x.shape()));
  }
  const int64_t rows = x.dim(0), cols = x.dim(1);
  Tensor<T> out = axis == 0 ? Tensor<T>::zeros({len, cols})
                            : Tensor<T>::zeros({rows, len});
  if (axis == 0) {
    std::memcpy(out.raw().data(), x.data().data() + start * cols,
                sizeof(T) * static_cast<size_t>(len * cols));
  } else {
    for (int64_t i = 0; i < rows; ++i) {
      std::memcpy(out.raw().data() + i * len,
                  x.data().data() + i * cols + start,
                  sizeof(T) * static_cast<size_t>(len));
    }
  }
  if (detail::want_record(tape, {&x})) {
    out.mark_tracked();
    tape->record([x, out, axis, start, len, rows, cols]() mutable {
      const auto& Kb = kernels::active<T>();
      Tensor<T> xg = x;
      T* gx = xg.grad_buf().data();
      const T* go = out.grad_buf().data();
      if (axis == 0) {
        Kb.axpy(T(1), go, gx + start * cols, len * cols);
      } else {
        for (int64_t i = 0; i < rows; ++i) {
          Kb.axpy(T(1), go + i * len, gx + i * cols + start, len);
        }
      }
    });
  }
  return out;
}

// Inverted dropout: in training mode each element is zeroed with probability
// `rate` and survivors are scaled by 1/(1-rate); in eval mode the input is
// returned unchanged.
template <class T>
Tensor<T> dropout(const Tensor<T>& x, double rate, bool train_mode, Rng& rng,
                  Tape<T>* tape = nullptr) {
  if (rate < 0.0 || rate >= 1.0) {
    throw Error("dropout: rate must be in [0,1), got " + std::to_string(rate));
  }
  if (!train_mode || rate == 0.0) return x;
  const int64_t n = x.numel();
  auto mask = std::make_shared<std::vector<T>>(static_cast<size_t>(n));
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  for (int64_t i = 0; i < n; ++i) {
    (*mask)[static_cast<size_t>(i)] =
        rng.uniform() < rate ? T(0) : keep_scale;
  }
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  const auto& K = kernels::active<T>();
  K.mul(x.data().data(), mask->data(), out.raw().data(), n);
  if (detail::want_record(tape, {&x})) {
    out.mark_tracked();
    tape->record([x, out, mask, n]() mutable {
      const auto& Kb = kernels::active<T>();
      std::vector<T> tmp(static_cast<size_t>(n));
      Kb.mul(out.grad_buf().data(), mask->data(), tmp.data(), n);
      Tensor<T> xg = x;
      Kb.axpy(T(1), tmp.data(), xg.grad_buf().data(), n);
    });
  }
  return out;
}

template <class T>
Tensor<T> transpose_last_two(const Tensor<T>& x, Tape<T>* tape = nullptr) {
  if (x.rank() != 2) {
    throw ShapeMismatch("transpose_last_two: expected 2-d, got " +
                        shape_str(x.shape()));
  }
  const int64_t m = x.dim(0), n = x.dim(1);
  Tensor<T> out = Tensor<T>::zeros({n, m});
  detail::transpose_into(x.data().data(), out.raw().data(), m, n);
  if (detail::want_record(tape, {&x})) {
    out.mark_tracked();
    tape->record([x, out, m, n]() mutable {
      Tensor<T> xg = x;
      T* gx = xg.grad_buf().data();
      const T* go = out.grad_buf().data();
      for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) gx[i * n + j] += go[j * m + i];
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> sum(const Tensor<T>& x, Tape<T>* tape = nullptr) {
  Tensor<T> out = Tensor<T>::scalar(kernels::active<T>().sum(
      x.data().data(), x.numel()));
  if (detail::want_record(tape, {&x})) {
    out.mark_tracked();
    tape->record([x, out]() mutable {
      const T g = out.grad_buf()[0];
      Tensor<T> xg = x;
      T* gx = xg.grad_buf().data();
      const int64_t n = x.numel();
      for (int64_t i = 0; i < n; ++i) gx[i] += g;
    });
  }
  return out;
}

// x * W + b with b broadcast per row.
template <class T>
Tensor<T> affine(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                 Tape<T>* tape = nullptr) {
  return add(matmul(x, w, tape), b, tape);
}

}  // namespace synsrl::nn
