/*
 * Copyright 2026 The odsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "odsim/simd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace odsim::simd {
namespace {

void jacobi_row_neon(const double* up, const double* mid, const double* down, double* out,
                     std::size_t n) {
  const float64x2_t five = vdupq_n_f64(5.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    float64x2_t acc = vaddq_f64(vld1q_f64(mid + j), vld1q_f64(up + j));
    acc = vaddq_f64(acc, vld1q_f64(down + j));
    acc = vaddq_f64(acc, vld1q_f64(mid + j - 1));
    acc = vaddq_f64(acc, vld1q_f64(mid + j + 1));
    vst1q_f64(out + j, vdivq_f64(acc, five));
  }
  for (; j < n; ++j) {
    out[j] = ((((mid[j] + up[j]) + down[j]) + mid[j - 1]) + mid[j + 1]) / 5.0;
  }
}

void gather_neon(const double* src, std::size_t stride, double* dst, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_dup_f64(src + i * stride);
    v = vld1q_lane_f64(src + (i + 1) * stride, v, 1);
    vst1q_f64(dst + i, v);
  }
  for (; i < n; ++i) dst[i] = src[i * stride];
}

void scatter_neon(const double* src, double* dst, std::size_t stride, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(src + i);
    vst1q_lane_f64(dst + i * stride, v, 0);
    vst1q_lane_f64(dst + (i + 1) * stride, v, 1);
  }
  for (; i < n; ++i) dst[i * stride] = src[i];
}

}  // namespace

const KernelTable* neon_kernels() noexcept {
  static const KernelTable table{Isa::Neon, jacobi_row_neon, gather_neon, scatter_neon};
  return &table;
}

}  // namespace odsim::simd

#else

namespace odsim::simd {
const KernelTable* neon_kernels() noexcept { return nullptr; }
}  // namespace odsim::simd

#endif
