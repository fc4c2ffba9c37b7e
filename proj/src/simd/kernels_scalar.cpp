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

namespace odsim::simd {
namespace {

void jacobi_row_scalar(const double* up, const double* mid, const double* down, double* out,
                       std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = ((((mid[j] + up[j]) + down[j]) + mid[j - 1]) + mid[j + 1]) / 5.0;
  }
}

void gather_scalar(const double* src, std::size_t stride, double* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = src[i * stride];
}

void scatter_scalar(const double* src, double* dst, std::size_t stride, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i * stride] = src[i];
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{Isa::Scalar, jacobi_row_scalar, gather_scalar, scatter_scalar};
  return table;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

}  // namespace odsim::simd
