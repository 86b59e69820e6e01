#pragma once

#include "synsrl/kernels/kernels.hpp"

namespace synsrl::kernels::avx2 {

// Defined in kernels_avx2.cpp; return nullptr when the build target lacks
// AVX2+FMA support.
const Ops<double>* table_f64();
const Ops<float>* table_f32();
bool compiled_in();

}  // namespace synsrl::kernels::avx2
