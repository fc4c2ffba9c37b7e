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

#include "odsim/errors.hpp"
#include "common.hpp"

namespace odsim::apps {

const std::vector<std::string>& app_names() {
  static const std::vector<std::string> names{"jacobi2d", "launch_rate", "overlap", "pipeline"};
  return names;
}

AppResult run_app(std::string_view name, const RuntimeConfig& base, const AppParams& p,
                  const RunHooks& hooks) {
  if (name == "overlap") return bench_overlap(base, OverlapConfig{p.total_work_items, p.odf}, hooks);
  if (name == "launch_rate") {
    return bench_launch_rate(
        base, LaunchRateConfig{base.topology.pes_per_process, p.chares_per_pe, p.window_us}, hooks);
  }
  if (name == "pipeline") {
    return bench_pipeline(base, PipelineConfig{p.total_bytes, p.odf, p.with_compute}, hooks);
  }
  if (name == "jacobi2d") {
    return jacobi2d(
        base, JacobiConfig{p.grid_rows, p.grid_cols, p.odf, p.iterations, p.host_compute_us}, hooks);
  }
  throw ConfigError("unknown app '" + std::string(name) + "' (expected jacobi2d, launch_rate, overlap or pipeline)");
}

}  // namespace odsim::apps
