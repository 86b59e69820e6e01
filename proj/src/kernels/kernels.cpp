#include "synsrl/kernels/kernels.hpp"

#include "kernels_backend.hpp"
#include "kernels_scalar.hpp"
#include "synsrl/common.hpp"

namespace synsrl::kernels {

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  return (avx2::compiled_in() && cpu_has_avx2_fma()) ? Backend::Avx2
                                                     : Backend::Scalar;
}

Backend g_backend = detect();

const Ops<double> g_scalar_f64 = scalar::make_table<double>();
const Ops<float> g_scalar_f32 = scalar::make_table<float>();

}  // namespace

bool avx2_available() { return avx2::compiled_in() && cpu_has_avx2_fma(); }

Backend active_backend() { return g_backend; }

void set_backend(Backend b) {
  if (b == Backend::Avx2 && !avx2_available()) {
    throw Error("kernel backend avx2 is not available on this machine");
  }
  g_backend = b;
}

void set_backend_auto() { g_backend = detect(); }

void set_backend_by_name(const std::string& name) {
  if (name == "scalar") {
    set_backend(Backend::Scalar);
  } else if (name == "avx2") {
    set_backend(Backend::Avx2);
  } else if (name == "auto") {
    set_backend_auto();
  } else {
    throw Error("unknown kernel backend '" + name +
                "' (expected scalar, avx2, or auto)");
  }
}

const char* backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

template <>
const Ops<double>& table<double>(Backend b) {
  if (b == Backend::Avx2) {
    const Ops<double>* t = avx2::table_f64();
    if (t) return *t;
  }
  return g_scalar_f64;
}

template <>
const Ops<float>& table<float>(Backend b) {
  if (b == Backend::Avx2) {
    const Ops<float>* t = avx2::table_f32();
    if (t) return *t;
  }
  return g_scalar_f32;
}

}  // namespace synsrl::kernels
