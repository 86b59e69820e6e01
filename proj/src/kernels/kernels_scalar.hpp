#pragma once

#include <cmath>
#include <cstdint>

#include "synsrl/kernels/kernels.hpp"

// Scalar reference kernels. These define the semantics the SIMD variants are
// tested against. Where the AVX2 variant uses a fused multiply-add, the
// reference uses std::fma so both round identically.

namespace synsrl::kernels::scalar {

template <class T>
void matmul(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n) {
  for (int64_t i = 0; i < m * n; ++i) c[i] = T(0);
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t kk = 0; kk < k; ++kk) {
      const T av = a[i * k + kk];
      const T* brow = b + kk * n;
      T* crow = c + i * n;
      for (int64_t j = 0; j < n; ++j) crow[j] = std::fma(av, brow[j], crow[j]);
    }
  }
}

template <class T>
void axpy(T alpha, const T* x, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

template <class T>
void add(const T* a, const T* b, T* c, int64_t n) {
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] + b[i];
}

template <class T>
void mul(const T* a, const T* b, T* c, int64_t n) {
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] * b[i];
}

template <class T>
void scale(T alpha, const T* x, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

template <class T>
void relu_fwd(const T* x, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <class T>
void relu_bwd(const T* x, const T* dy, T* dx, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    if (x[i] > T(0)) dx[i] += dy[i];
  }
}

template <class T>
T sum(const T* x, int64_t n) {
  T s = T(0);
  for (int64_t i = 0; i < n; ++i) s += x[i];
  return s;
}

template <class T>
T dot(const T* x, const T* y, int64_t n) {
  T s = T(0);
  for (int64_t i = 0; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

template <class T>
T max(const T* x, int64_t n) {
  T m = x[0];
  for (int64_t i = 1; i < n; ++i) {
    if (x[i] > m) m = x[i];
  }
  return m;
}

template <class T>
void adadelta_step(T* param, const T* grad, T* acc_g2, T* acc_dx2, T rho, T eps,
                   T lr, int64_t n) {
  const T omr = T(1) - rho;
  const T nlr = -lr;
  for (int64_t i = 0; i < n; ++i) {
    const T g = grad[i];
    acc_g2[i] = rho * acc_g2[i] + omr * (g * g);
    const T step = nlr * std::sqrt((acc_dx2[i] + eps) / (acc_g2[i] + eps)) * g;
    acc_dx2[i] = rho * acc_dx2[i] + omr * (step * step);
    param[i] += step;
  }
}

template <class T>
Ops<T> make_table() {
  Ops<T> t;
  t.matmul = &matmul<T>;
  t.axpy = &axpy<T>;
  t.add = &add<T>;
  t.mul = &mul<T>;
  t.scale = &scale<T>;
  t.relu_fwd = &relu_fwd<T>;
  t.relu_bwd = &relu_bwd<T>;
  t.sum = &sum<T>;
  t.dot = &dot<T>;
  t.max = &max<T>;
  t.adadelta_step = &adadelta_step<T>;
  return t;
}

}  // namespace synsrl::kernels::scalar
