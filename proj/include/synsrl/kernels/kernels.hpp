#pragma once

#include <cstdint>
#include <string>

namespace synsrl::kernels {

// Numeric inner loops used by the tensor layer and the optimizer. Each entry
// has a scalar reference implementation and, on x86-64 with AVX2+FMA, a
// vectorized variant selected at runtime. Elementwise kernels and matmul are
// bit-identical between backends (same per-element operation order, fused
// multiply-add in both); reductions (sum, dot) may differ in accumulation
// order and are equivalence-tested against the reference under a tolerance.
template <class T>
struct Ops {
  // c[m x n] = a[m x k] * b[k x n], row-major, c overwritten.
  void (*matmul)(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n);
  // y += alpha * x
  void (*axpy)(T alpha, const T* x, T* y, int64_t n);
  // c = a + b
  void (*add)(const T* a, const T* b, T* c, int64_t n);
  // c = a * b
  void (*mul)(const T* a, const T* b, T* c, int64_t n);
  // y = alpha * x
  void (*scale)(T alpha, const T* x, T* y, int64_t n);
  // y = max(x, 0)
  void (*relu_fwd)(const T* x, T* y, int64_t n);
  // dx += dy where x > 0
  void (*relu_bwd)(const T* x, const T* dy, T* dx, int64_t n);
  T (*sum)(const T* x, int64_t n);
  T (*dot)(const T* x, const T* y, int64_t n);
  // n >= 1
  T (*max)(const T* x, int64_t n);
  // One fused Adadelta update:
  //   acc_g2   = rho*acc_g2 + (1-rho)*g*g
  //   step     = -lr * sqrt((acc_dx2+eps)/(acc_g2+eps)) * g
  //   acc_dx2  = rho*acc_dx2 + (1-rho)*step*step
  //   param   += step
  void (*adadelta_step)(T* param, const T* grad, T* acc_g2, T* acc_dx2, T rho,
                        T eps, T lr, int64_t n);
};

enum class Backend { Scalar, Avx2 };

// True when this binary carries AVX2 kernels and the CPU reports AVX2+FMA.
bool avx2_available();

// Currently dispatched backend (auto-detected at startup).
Backend active_backend();

// Force a backend; throws synsrl::Error if unavailable. Not thread safe;
// call before any worker starts.
void set_backend(Backend b);
void set_backend_auto();

// Parse "scalar" / "avx2" / "auto"; applies the choice.
void set_backend_by_name(const std::string& name);

const char* backend_name(Backend b);

// Table for an explicit backend (equivalence tests compare these directly).
template <class T>
const Ops<T>& table(Backend b);

template <>
const Ops<float>& table<float>(Backend);
template <>
const Ops<double>& table<double>(Backend);

// Table for the active backend.
template <class T>
inline const Ops<T>& active() {
  return table<T>(active_backend());
}

}  // namespace synsrl::kernels
