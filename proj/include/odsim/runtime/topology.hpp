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

#include <cstdint>
#include <vector>

#include "odsim/device/device.hpp"

namespace odsim::runtime {

using device::DeviceId;
using device::PeId;
using device::ProcessId;
using NodeId = std::uint32_t;

/// node -> GPU -> process -> PE hierarchy. Ids are assigned row-major, so
/// PE p belongs to process p / pes_per_process, and so on up the tree.
struct Topology {
  int nodes = 1;
  int gpus_per_node = 1;
  int processes_per_gpu = 1;
  int pes_per_process = 1;

  void validate() const;

  int total_gpus() const noexcept { return nodes * gpus_per_node; }
  int total_processes() const noexcept { return total_gpus() * processes_per_gpu; }
  int total_pes() const noexcept { return total_processes() * pes_per_process; }

  ProcessId process_of(PeId pe) const noexcept { return pe / pes_per_process; }
  DeviceId gpu_of_process(ProcessId p) const noexcept { return p / processes_per_gpu; }
  NodeId node_of_gpu(DeviceId g) const noexcept { return g / gpus_per_node; }
  DeviceId gpu_of(PeId pe) const noexcept { return gpu_of_process(process_of(pe)); }
  NodeId node_of(PeId pe) const noexcept { return node_of_gpu(gpu_of(pe)); }
  NodeId node_of_process(ProcessId p) const noexcept { return node_of_gpu(gpu_of_process(p)); }
  PeId first_pe_of(ProcessId p) const noexcept { return p * pes_per_process; }
};

/// Validating constructor; zero or negative counts raise ConfigError.
Topology build_topology(int nodes, int gpus_per_node, int processes_per_gpu, int pes_per_process);

/// Index-space extents of a chare collection. One-dimensional collections
/// use rows == 1.
struct Dims {
  int rows = 1;
  int cols = 1;
  int size() const noexcept { return rows * cols; }
};

/// Maps every chare of a collection (row-major linear index) to a PE.
///
/// The index space is cut into rectangular blocks level by level: first one
/// block per GPU, then per process of that GPU, then per PE of that process.
/// At each level the block grid is the most square factorization that divides
/// the current block evenly. When no such factorization exists the remaining
/// chares are dealt out as contiguous equal runs per PE in row-major order,
/// with the remainder assigned round-robin.
std::vector<PeId> block_map(Dims dims, const Topology& topo);

/// Single-chare form of block_map.
PeId block_map(int index, Dims dims, const Topology& topo);

}  // namespace odsim::runtime
