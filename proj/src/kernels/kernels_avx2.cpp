// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma -ffp-contract=off; everything is guarded so the build
// degrades to scalar-only on other targets. Elementwise kernels mirror the
// scalar reference operation-for-operation so results are bit-identical
// (contraction stays off so plain a*b+c tails round like the reference,
// while std::fma and _mm256_fmadd_* remain fused); reductions use four
// lanes and a fixed horizontal combine.

#include "kernels_backend.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#define SYNSRL_HAVE_AVX2 1
#include <immintrin.h>
#else
#define SYNSRL_HAVE_AVX2 0
#endif

#include <cmath>

namespace synsrl::kernels::avx2 {

#if SYNSRL_HAVE_AVX2

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s2 = _mm_add_pd(lo, hi);
  __m128d s1 = _mm_add_sd(s2, _mm_unpackhi_pd(s2, s2));
  return _mm_cvtsd_f64(s1);
}

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 s4 = _mm_add_ps(lo, hi);
  __m128 s2 = _mm_add_ps(s4, _mm_movehl_ps(s4, s4));
  __m128 s1 = _mm_add_ss(s2, _mm_shuffle_ps(s2, s2, 1));
  return _mm_cvtss_f32(s1);
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d m2 = _mm_max_pd(lo, hi);
  __m128d m1 = _mm_max_sd(m2, _mm_unpackhi_pd(m2, m2));
  return _mm_cvtsd_f64(m1);
}

inline float hmax(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 m4 = _mm_max_ps(lo, hi);
  __m128 m2 = _mm_max_ps(m4, _mm_movehl_ps(m4, m4));
  __m128 m1 = _mm_max_ss(m2, _mm_shuffle_ps(m2, m2, 1));
  return _mm_cvtss_f32(m1);
}

}  // namespace

// ---------------------------------------------------------------------------
// double, 4 lanes
// ---------------------------------------------------------------------------

void matmul_f64(const double* a, const double* b, double* c, int64_t m,
                int64_t k, int64_t n) {
  for (int64_t i = 0; i < m * n; ++i) c[i] = 0.0;
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t kk = 0; kk < k; ++kk) {
      const double av = a[i * k + kk];
      const __m256d avv = _mm256_set1_pd(av);
      const double* brow = b + kk * n;
      double* crow = c + i * n;
      int64_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d bv = _mm256_loadu_pd(brow + j);
        __m256d cv = _mm256_loadu_pd(crow + j);
        _mm256_storeu_pd(crow + j, _mm256_fmadd_pd(avv, bv, cv));
      }
      for (; j < n; ++j) crow[j] = std::fma(av, brow[j], crow[j]);
    }
  }
}

void axpy_f64(double alpha, const double* x, double* y, int64_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, xv, yv));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void add_f64(const double* a, const double* b, double* c, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        c + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) c[i] = a[i] + b[i];
}

void mul_f64(const double* a, const double* b, double* c, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        c + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) c[i] = a[i] * b[i];
}

void scale_f64(double alpha, const double* x, double* y, int64_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] = alpha * x[i];
}

void relu_fwd_f64(const double* x, double* y, int64_t n) {
  const __m256d zero = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // max_pd returns the second operand on 0/-0 ties and NaN, matching the
    // scalar (x > 0 ? x : 0).
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_f64(const double* x, const double* dy, double* dx, int64_t n) {
  const __m256d zero = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d dyv = _mm256_loadu_pd(dy + i);
    __m256d dxv = _mm256_loadu_pd(dx + i);
    __m256d mask = _mm256_cmp_pd(xv, zero, _CMP_GT_OQ);
    // blend keeps dx bits untouched where x <= 0
    __m256d updated = _mm256_add_pd(dxv, dyv);
    _mm256_storeu_pd(dx + i, _mm256_blendv_pd(dxv, updated, mask));
  }
  for (; i < n; ++i) {
    if (x[i] > 0.0) dx[i] += dy[i];
  }
}

double sum_f64(const double* x, int64_t n) {
  __m256d acc = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double dot_f64(const double* x, const double* y, int64_t n) {
  __m256d acc = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

double max_f64(const double* x, int64_t n) {
  if (n < 4) {
    double m = x[0];
    for (int64_t i = 1; i < n; ++i) {
      if (x[i] > m) m = x[i];
    }
    return m;
  }
  __m256d acc = _mm256_loadu_pd(x);
  int64_t i = 4;
  for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
  double m = hmax(acc);
  for (; i < n; ++i) {
    if (x[i] > m) m = x[i];
  }
  return m;
}

void adadelta_step_f64(double* param, const double* grad, double* acc_g2,
                       double* acc_dx2, double rho, double eps, double lr,
                       int64_t n) {
  const double omr = 1.0 - rho;
  const double nlr = -lr;
  const __m256d rhov = _mm256_set1_pd(rho);
  const __m256d omrv = _mm256_set1_pd(omr);
  const __m256d epsv = _mm256_set1_pd(eps);
  const __m256d nlrv = _mm256_set1_pd(nlr);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d g = _mm256_loadu_pd(grad + i);
    __m256d g2 = _mm256_loadu_pd(acc_g2 + i);
    __m256d dx2 = _mm256_loadu_pd(acc_dx2 + i);
    __m256d p = _mm256_loadu_pd(param + i);
    g2 = _mm256_add_pd(_mm256_mul_pd(rhov, g2),
                       _mm256_mul_pd(omrv, _mm256_mul_pd(g, g)));
    __m256d ratio = _mm256_div_pd(_mm256_add_pd(dx2, epsv),
                                  _mm256_add_pd(g2, epsv));
    __m256d step =
        _mm256_mul_pd(_mm256_mul_pd(nlrv, _mm256_sqrt_pd(ratio)), g);
    dx2 = _mm256_add_pd(_mm256_mul_pd(rhov, dx2),
                        _mm256_mul_pd(omrv, _mm256_mul_pd(step, step)));
    _mm256_storeu_pd(acc_g2 + i, g2);
    _mm256_storeu_pd(acc_dx2 + i, dx2);
    _mm256_storeu_pd(param + i, _mm256_add_pd(p, step));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    acc_g2[i] = rho * acc_g2[i] + omr * (g * g);
    const double step =
        nlr * std::sqrt((acc_dx2[i] + eps) / (acc_g2[i] + eps)) * g;
    acc_dx2[i] = rho * acc_dx2[i] + omr * (step * step);
    param[i] += step;
  }
}

// ---------------------------------------------------------------------------
// float, 8 lanes
// ---------------------------------------------------------------------------

void matmul_f32(const float* a, const float* b, float* c, int64_t m, int64_t k,
                int64_t n) {
  for (int64_t i = 0; i < m * n; ++i) c[i] = 0.0f;
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t kk = 0; kk < k; ++kk) {
      const float av = a[i * k + kk];
      const __m256 avv = _mm256_set1_ps(av);
      const float* brow = b + kk * n;
      float* crow = c + i * n;
      int64_t j = 0;
      for (; j + 8 <= n; j += 8) {
        __m256 bv = _mm256_loadu_ps(brow + j);
        __m256 cv = _mm256_loadu_ps(crow + j);
        _mm256_storeu_ps(crow + j, _mm256_fmadd_ps(avv, bv, cv));
      }
      for (; j < n; ++j) crow[j] = std::fma(av, brow[j], crow[j]);
    }
  }
}

void axpy_f32(float alpha, const float* x, float* y, int64_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(
        y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void add_f32(const float* a, const float* b, float* c, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(
        c + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) c[i] = a[i] + b[i];
}

void mul_f32(const float* a, const float* b, float* c, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(
        c + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) c[i] = a[i] * b[i];
}

void scale_f32(float alpha, const float* x, float* y, int64_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
  }
  for (; i < n; ++i) y[i] = alpha * x[i];
}

void relu_fwd_f32(const float* x, float* y, int64_t n) {
  const __m256 zero = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_bwd_f32(const float* x, const float* dy, float* dx, int64_t n) {
  const __m256 zero = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 xv = _mm256_loadu_ps(x + i);
    __m256 dyv = _mm256_loadu_ps(dy + i);
    __m256 dxv = _mm256_loadu_ps(dx + i);
    __m256 mask = _mm256_cmp_ps(xv, zero, _CMP_GT_OQ);
    __m256 updated = _mm256_add_ps(dxv, dyv);
    _mm256_storeu_ps(dx + i, _mm256_blendv_ps(dxv, updated, mask));
  }
  for (; i < n; ++i) {
    if (x[i] > 0.0f) dx[i] += dy[i];
  }
}

float sum_f32(const float* x, int64_t n) {
  __m256 acc = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

float dot_f32(const float* x, const float* y, int64_t n) {
  __m256 acc = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc);
  }
  float s = hsum(acc);
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

float max_f32(const float* x, int64_t n) {
  if (n < 8) {
    float m = x[0];
    for (int64_t i = 1; i < n; ++i) {
      if (x[i] > m) m = x[i];
    }
    return m;
  }
  __m256 acc = _mm256_loadu_ps(x);
  int64_t i = 8;
  for (; i + 8 <= n; i += 8) acc = _mm256_max_ps(acc, _mm256_loadu_ps(x + i));
  float m = hmax(acc);
  for (; i < n; ++i) {
    if (x[i] > m) m = x[i];
  }
  return m;
}

void adadelta_step_f32(float* param, const float* grad, float* acc_g2,
                       float* acc_dx2, float rho, float eps, float lr,
                       int64_t n) {
  const float omr = 1.0f - rho;
  const float nlr = -lr;
  const __m256 rhov = _mm256_set1_ps(rho);
  const __m256 omrv = _mm256_set1_ps(omr);
  const __m256 epsv = _mm256_set1_ps(eps);
  const __m256 nlrv = _mm256_set1_ps(nlr);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 g = _mm256_loadu_ps(grad + i);
    __m256 g2 = _mm256_loadu_ps(acc_g2 + i);
    __m256 dx2 = _mm256_loadu_ps(acc_dx2 + i);
    __m256 p = _mm256_loadu_ps(param + i);
    g2 = _mm256_add_ps(_mm256_mul_ps(rhov, g2),
                       _mm256_mul_ps(omrv, _mm256_mul_ps(g, g)));
    __m256 ratio =
        _mm256_div_ps(_mm256_add_ps(dx2, epsv), _mm256_add_ps(g2, epsv));
    __m256 step = _mm256_mul_ps(_mm256_mul_ps(nlrv, _mm256_sqrt_ps(ratio)), g);
    dx2 = _mm256_add_ps(_mm256_mul_ps(rhov, dx2),
                        _mm256_mul_ps(omrv, _mm256_mul_ps(step, step)));
    _mm256_storeu_ps(acc_g2 + i, g2);
    _mm256_storeu_ps(acc_dx2 + i, dx2);
    _mm256_storeu_ps(param + i, _mm256_add_ps(p, step));
  }
  for (; i < n; ++i) {
    const float g = grad[i];
    acc_g2[i] = rho * acc_g2[i] + omr * (g * g);
    const float step =
        nlr * std::sqrt((acc_dx2[i] + eps) / (acc_g2[i] + eps)) * g;
    acc_dx2[i] = rho * acc_dx2[i] + omr * (step * step);
    param[i] += step;
  }
}

#endif  // SYNSRL_HAVE_AVX2

const Ops<double>* table_f64() {
#if SYNSRL_HAVE_AVX2
  static const Ops<double> t = [] {
    Ops<double> o;
    o.matmul = &matmul_f64;
    o.axpy = &axpy_f64;
    o.add = &add_f64;
    o.mul = &mul_f64;
    o.scale = &scale_f64;
    o.relu_fwd = &relu_fwd_f64;
    o.relu_bwd = &relu_bwd_f64;
    o.sum = &sum_f64;
    o.dot = &dot_f64;
    o.max = &max_f64;
    o.adadelta_step = &adadelta_step_f64;
    return o;
  }();
  return &t;
#else
  return nullptr;
#endif
}

const Ops<float>* table_f32() {
#if SYNSRL_HAVE_AVX2
  static const Ops<float> t = [] {
    Ops<float> o;
    o.matmul = &matmul_f32;
    o.axpy = &axpy_f32;
    o.add = &add_f32;
    o.mul = &mul_f32;
    o.scale = &scale_f32;
    o.relu_fwd = &relu_fwd_f32;
    o.relu_bwd = &relu_bwd_f32;
    o.sum = &sum_f32;
    o.dot = &dot_f32;
    o.max = &max_f32;
    o.adadelta_step = &adadelta_step_f32;
    return o;
  }();
  return &t;
#else
  return nullptr;
#endif
}

bool compiled_in() { return SYNSRL_HAVE_AVX2 != 0; }

}  // namespace synsrl::kernels::avx2
