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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "odsim/runtime/runtime.hpp"

namespace odsim::apps {

using runtime::RuntimeConfig;

/// Optional sinks attached to a run.
struct RunHooks {
  std::ostream* event_trace = nullptr;   // one line per processed event
  std::ostream* transfer_log = nullptr;  // comm transfer CSV, written after the run
};

/// Measurements and counters of one application run. Measurements an app
/// does not produce stay empty.
struct AppResult {
  std::optional<double> completion_us;
  std::optional<double> time_per_step_us;
  std::optional<double> kernels_per_second;
  std::optional<double> comm_us;
  std::optional<double> total_us;
  std::optional<double> checksum;

  runtime::RuntimeStats stats;
  std::uint64_t transfers_intra_process = 0;
  std::uint64_t transfers_intra_node_ipc = 0;
  std::uint64_t transfers_inter_node = 0;
};

/// `odf` kernels of total_work_items / odf items each, full occupancy, one per
/// stream on GPU 0, all parked behind one host flag that is set at t=0.
struct OverlapConfig {
  std::uint64_t total_work_items = 16384;
  int odf = 1;
};
AppResult bench_overlap(const RuntimeConfig& base, const OverlapConfig& cfg, const RunHooks& hooks = {});

/// pes x chares_per_pe chares on one process and GPU, each relaunching an
/// empty full-occupancy kernel from its completion callback. Kernels that
/// complete inside the window are counted.
struct LaunchRateConfig {
  int pes = 1;
  int chares_per_pe = 1;
  double window_us = 100'000.0;
};
AppResult bench_launch_rate(const RuntimeConfig& base, const LaunchRateConfig& cfg,
                            const RunHooks& hooks = {});

/// `odf` sender/receiver pairs across two nodes, each moving total_bytes / odf
/// bytes inter-node. With compute, every receiver then runs a kernel over the
/// received doubles.
struct PipelineConfig {
  std::uint64_t total_bytes = 64ULL << 20;
  int odf = 1;
  bool with_compute = false;
};
AppResult bench_pipeline(const RuntimeConfig& base, const PipelineConfig& cfg,
                         const RunHooks& hooks = {});

/// 5-point Jacobi on a rows x cols interior with fixed borders (top 1.0,
/// others 0.0), tiled over odf x GPUs chares with halo exchange.
struct JacobiConfig {
  int grid_rows = 4096;
  int grid_cols = 4096;
  int odf = 1;
  int iterations = 100;
  double host_compute_us = 1.0;
};
AppResult jacobi2d(const RuntimeConfig& base, const JacobiConfig& cfg, const RunHooks& hooks = {});

/// Initial interior value of cell (i, j).
double jacobi_initial(int i, int j) noexcept;
/// Chare grid (rows, cols) for `chares` tiles over the grid: the most square
/// tiles whose counts divide both extents. Throws ConfigError if none.
runtime::Dims jacobi_tiling(int grid_rows, int grid_cols, int chares);

/// Application parameters for every registered app; each app reads its own.
struct AppParams {
  int odf = 1;
  std::uint64_t total_work_items = 16384;
  int chares_per_pe = 1;
  double window_us = 100'000.0;
  std::uint64_t total_bytes = 64ULL << 20;
  bool with_compute = false;
  int grid_rows = 4096;
  int grid_cols = 4096;
  int iterations = 100;
  double host_compute_us = 1.0;
};

const std::vector<std::string>& app_names();
/// Dispatches to a registered app. Throws ConfigError for unknown names.
AppResult run_app(std::string_view name, const RuntimeConfig& base, const AppParams& params,
                  const RunHooks& hooks = {});

}  // namespace odsim::apps
