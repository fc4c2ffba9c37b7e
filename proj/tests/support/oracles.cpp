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

#include "oracles.hpp"

#include <utility>
#include <vector>

#include "odsim/apps/apps.hpp"

namespace odsim::oracles {

double serial_jacobi(int rows, int cols, int iterations) {
  const int stride = cols + 2;
  std::vector<double> cur(static_cast<std::size_t>((rows + 2) * stride));
  auto at = [stride](std::vector<double>& g, int i, int j) -> double& {
    return g[static_cast<std::size_t>(i * stride + j)];
  };
  for (int i = 0; i < rows + 2; ++i) {
    for (int j = 0; j < cols + 2; ++j) {
      double v = 0.0;
      if (i == 0) v = 1.0;
      else if (i <= rows && j >= 1 && j <= cols) v = apps::jacobi_initial(i - 1, j - 1);
      at(cur, i, j) = v;
    }
  }
  std::vector<double> next = cur;
  for (int k = 0; k < iterations; ++k) {
    for (int i = 1; i <= rows; ++i) {
      for (int j = 1; j <= cols; ++j) {
        at(next, i, j) = ((((at(cur, i, j) + at(cur, i - 1, j)) + at(cur, i + 1, j)) +
                           at(cur, i, j - 1)) + at(cur, i, j + 1)) / 5.0;
      }
    }
    std::swap(cur, next);
  }
  double sum = 0.0;
  for (int i = 1; i <= rows; ++i) {
    for (int j = 1; j <= cols; ++j) sum += at(cur, i, j);
  }
  return sum;
}

}  // namespace odsim::oracles
