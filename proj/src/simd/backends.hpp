#pragma once

#include "lsaga/simd.hpp"

namespace lsaga::simd::detail {

// Each returns nullptr when the backend was not compiled into this build.
// CPU support is checked separately by the dispatcher.
const Kernels* avx2_table();
const Kernels* neon_table();

}  // namespace lsaga::simd::detail
