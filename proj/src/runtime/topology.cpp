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

#include "odsim/runtime/topology.hpp"

#include <cstdlib>
#include <optional>
#include <string>
#include <utility>

#include "odsim/errors.hpp"

namespace odsim::runtime {

void Topology::validate() const {
  auto check = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string("topology.") + name + " must be >= 1");
  };
  check(nodes, "nodes");
  check(gpus_per_node, "gpus_per_node");
  check(processes_per_gpu, "processes_per_gpu");
  check(pes_per_process, "pes_per_process");
}

Topology build_topology(int nodes, int gpus_per_node, int processes_per_gpu,
                        int pes_per_process) {
  Topology t{nodes, gpus_per_node, processes_per_gpu, pes_per_process};
  t.validate();
  return t;
}

namespace {

struct Rect {
  int r0, c0, rows, cols;
};

std::optional<std::pair<int, int>> square_split(int units, int rows, int cols) {
  std::optional<std::pair<int, int>> best;
  long best_score = 0;
  for (int kr = 1; kr <= units; ++kr) {
    if (units % kr != 0) continue;
    const int kc = units / kr;
    if (rows % kr != 0 || cols % kc != 0) continue;
    const long score = std::labs(static_cast<long>(rows / kr) - cols / kc);
    if (!best || score < best_score) {
      best = std::make_pair(kr, kc);
      best_score = score;
    }
  }
  return best;
}

void assign(const Rect& rect, int level, PeId base, const int* units, const Dims& dims,
            std::vector<PeId>& out) {
  if (level == 3) {
    for (int r = rect.r0; r < rect.r0 + rect.rows; ++r)
      for (int c = rect.c0; c < rect.c0 + rect.cols; ++c) out[r * dims.cols + c] = base;
    return;
  }
  int pes_below = 1;
  for (int l = level + 1; l < 3; ++l) pes_below *= units[l];

  if (auto split = square_split(units[level], rect.rows, rect.cols)) {
    const auto [kr, kc] = *split;
    const int br = rect.rows / kr;
    const int bc = rect.cols / kc;
    for (int a = 0; a < kr; ++a) {
      for (int b = 0; b < kc; ++b) {
        const auto unit = static_cast<PeId>(a * kc + b);
        assign(Rect{rect.r0 + a * br, rect.c0 + b * bc, br, bc}, level + 1,
               base + unit * static_cast<PeId>(pes_below), units, dims, out);
      }
    }
    return;
  }

  const int pes = units[level] * pes_below;
  const int n = rect.rows * rect.cols;
  const int run = n / pes;
  int i = 0;
  for (int r = rect.r0; r < rect.r0 + rect.rows; ++r) {
    for (int c = rect.c0; c < rect.c0 + rect.cols; ++c, ++i) {
      const int pe = (i < run * pes) ? i / run : (i - run * pes) % pes;
      out[r * dims.cols + c] = base + static_cast<PeId>(pe);
    }
  }
}

}  // namespace

std::vector<PeId> block_map(Dims dims, const Topology& topo) {
  if (dims.rows < 1 || dims.cols < 1) throw ConfigError("collection extents must be >= 1");
  std::vector<PeId> out(static_cast<std::size_t>(dims.size()));
  const int units[3] = {topo.total_gpus(), topo.processes_per_gpu, topo.pes_per_process};
  assign(Rect{0, 0, dims.rows, dims.cols}, 0, 0, units, dims, out);
  return out;
}

PeId block_map(int index, Dims dims, const Topology& topo) {
  if (index < 0 || index >= dims.size()) throw ArgumentError("block_map: index out of range");
  return block_map(dims, topo)[static_cast<std::size_t>(index)];
}

}  // namespace odsim::runtime
