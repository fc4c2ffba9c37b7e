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

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace odsim::simd {
namespace {

// Compiled with -mavx2 (no FMA) so the adds and the divide round exactly
// like the scalar loop.
void jacobi_row_avx2(const double* up, const double* mid, const double* down, double* out,
                     std::size_t n) {
  const __m256d five = _mm256_set1_pd(5.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_add_pd(_mm256_loadu_pd(mid + j), _mm256_loadu_pd(up + j));
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(down + j));
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(mid + j - 1));
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(mid + j + 1));
    _mm256_storeu_pd(out + j, _mm256_div_pd(acc, five));
  }
  for (; j < n; ++j) {
    out[j] = ((((mid[j] + up[j]) + down[j]) + mid[j - 1]) + mid[j + 1]) / 5.0;
  }
}

void gather_avx2(const double* src, std::size_t stride, double* dst, std::size_t n) {
  std::size_t i = 0;
  const auto s = static_cast<long long>(stride);
  // 32-bit scaled offsets would overflow for very wide tiles; fall back there.
  if (stride * 4 < (std::size_t{1} << 28)) {
    const __m256i idx = _mm256_set_epi64x(3 * s, 2 * s, s, 0);
    for (; i + 4 <= n; i += 4) {
      const __m256d v = _mm256_i64gather_pd(src + i * stride, idx, 8);
      _mm256_storeu_pd(dst + i, v);
    }
  }
  for (; i < n; ++i) dst[i] = src[i * stride];
}

void scatter_avx2(const double* src, double* dst, std::size_t stride, std::size_t n) {
  // AVX2 has no scatter; unroll the strided stores from one vector load.
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(src + i);
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    _mm_storel_pd(dst + (i + 0) * stride, lo);
    _mm_storeh_pd(dst + (i + 1) * stride, lo);
    _mm_storel_pd(dst + (i + 2) * stride, hi);
    _mm_storeh_pd(dst + (i + 3) * stride, hi);
  }
  for (; i < n; ++i) dst[i * stride] = src[i];
}

}  // namespace

const KernelTable* avx2_kernels() noexcept {
  static const KernelTable table{Isa::Avx2, jacobi_row_avx2, gather_avx2, scatter_avx2};
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  return &table;
}

}  // namespace odsim::simd

#else

namespace odsim::simd {
const KernelTable* avx2_kernels() noexcept { return nullptr; }
}  // namespace odsim::simd

#endif
