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

#include <iosfwd>
#include <string>
#include <vector>

#include "odsim/apps/apps.hpp"
#include "odsim/cli/config.hpp"

namespace odsim::cli {

/// One result row: config echo, measurements and counters of a sweep point.
struct MetricsRecord {
  int run_id = 0;
  Point config;  // echoed keys only
  apps::AppResult result;
};

/// Measurement then counter column names, in output order.
const std::vector<std::string>& measurement_columns();
const std::vector<std::string>& counter_columns();

/// Header: run_id, sorted config keys, measurements, counters. Empty cells
/// for measurements an app does not produce.
void write_csv(std::ostream& os, const std::vector<MetricsRecord>& rows);
/// Array of {run_id, config, measurements, counters} objects.
void write_json(std::ostream& os, const std::vector<MetricsRecord>& rows);

/// Runs every sweep point in order. Trace files (when output.trace is set)
/// are opened before the first run; sweeps of more than one point append
/// ".run<N>" to each path. A failing point aborts with SweepError naming it.
std::vector<MetricsRecord> run_sweep(const RunConfig& cfg);

/// CSV, or JSON when output.json is set.
void write_results(const RunConfig& cfg, const std::vector<MetricsRecord>& rows, std::ostream& os);

}  // namespace odsim::cli
