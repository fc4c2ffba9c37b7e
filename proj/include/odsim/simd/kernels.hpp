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

#pragma once

// Data-parallel inner loops of the modeled device kernels.
//
// Every routine has a scalar reference implementation and, where the target
// supports it, an AVX2 or NEON variant. The active variant is chosen once at
// first use from the CPU's capabilities (override with ODSIM_SIMD=scalar).
// All variants perform the same IEEE operations in the same order, so their
// results are bit-identical; the equivalence tests depend on that.

#include <cstddef>
#include <string_view>

namespace odsim::simd {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  /// out[j] = (mid[j] + up[j] + down[j] + mid[j-1] + mid[j+1]) / 5 for j in [0, n).
  /// mid[-1] and mid[n] must be readable.
  void (*jacobi_row)(const double* up, const double* mid, const double* down, double* out,
                     std::size_t n);
  /// dst[i] = src[i * stride]
  void (*gather_strided)(const double* src, std::size_t stride, double* dst, std::size_t n);
  /// dst[i * stride] = src[i]
  void (*scatter_strided)(const double* src, double* dst, std::size_t stride, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
/// Null when the build or the CPU lacks the ISA.
const KernelTable* avx2_kernels() noexcept;
const KernelTable* neon_kernels() noexcept;

/// Runtime-selected table.
const KernelTable& active() noexcept;

std::string_view isa_name(Isa isa) noexcept;

}  // namespace odsim::simd
