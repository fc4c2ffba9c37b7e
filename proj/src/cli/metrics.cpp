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

#include "odsim/cli/metrics.hpp"

#include <fstream>
#include <memory>
#include <ostream>

#include <json.hpp>

#include "odsim/errors.hpp"
#include "odsim/util/format.hpp"

namespace odsim::cli {
namespace {

std::vector<std::optional<double>> measurements(const apps::AppResult& r) {
  return {r.completion_us, r.time_per_step_us, r.kernels_per_second, r.comm_us, r.total_us, r.checksum};
}

std::vector<std::string> counters(const apps::AppResult& r) {
  return {std::to_string(r.stats.kernels_launched), std::to_string(r.transfers_intra_process),
          std::to_string(r.transfers_intra_node_ipc), std::to_string(r.transfers_inter_node),
          util::format_double(r.stats.pe_busy_fraction), util::format_double(r.stats.mean_sm_utilization)};
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

nlohmann::ordered_json typed(const std::string& key, const std::string& v) {
  const auto* spec = find_key(key);
  if (spec == nullptr) return v;
  switch (spec->kind) {
    case Kind::Int: return std::stoll(v);
    case Kind::UInt: return std::stoull(v);
    case Kind::Real: return std::stod(v);
    case Kind::Bool: return v == "true";
    case Kind::String: return v;
  }
  return v;
}

std::string suffixed(const std::string& path, std::size_t runs, std::size_t i) {
  return runs > 1 ? path + ".run" + std::to_string(i) : path;
}

std::unique_ptr<std::ofstream> open_out(const std::string& path) {
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

const std::vector<std::string>& measurement_columns() {
  static const std::vector<std::string> cols{"completion_us", "time_per_step_us", "kernels_per_second",
                                             "comm_us",       "total_us",         "checksum"};
  return cols;
}

const std::vector<std::string>& counter_columns() {
  static const std::vector<std::string> cols{"kernels_launched",         "transfers_intra_process",
                                             "transfers_intra_node_ipc", "transfers_inter_node",
                                             "pe_busy_fraction",         "mean_sm_utilization"};
  return cols;
}

void write_csv(std::ostream& os, const std::vector<MetricsRecord>& rows) {
  std::vector<std::string> keys;
  for (const auto& k : schema()) {
    if (echoed(k.key)) keys.push_back(k.key);
  }
  os << "run_id";
  for (const auto& k : keys) os << ',' << k;
  for (const auto& c : measurement_columns()) os << ',' << c;
  for (const auto& c : counter_columns()) os << ',' << c;
  os << '\n';
  for (const auto& r : rows) {
    os << r.run_id;
    for (const auto& k : keys) {
      auto it = r.config.find(k);
      os << ',' << (it == r.config.end() ? std::string() : csv_cell(it->second));
    }
    for (const auto& m : measurements(r.result)) os << ',' << (m ? util::format_double(*m) : "");
    for (const auto& c : counters(r.result)) os << ',' << c;
    os << '\n';
  }
}

void write_json(std::ostream& os, const std::vector<MetricsRecord>& rows) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json rec;
    rec["run_id"] = r.run_id;
    auto& cfg = rec["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.config) cfg[k] = typed(k, v);
    auto& meas = rec["measurements"] = nlohmann::ordered_json::object();
    const auto ms = measurements(r.result);
    for (std::size_t i = 0; i < ms.size(); ++i) {
      meas[measurement_columns()[i]] = ms[i] ? nlohmann::ordered_json(*ms[i]) : nlohmann::ordered_json();
    }
    auto& cnt = rec["counters"] = nlohmann::ordered_json::object();
    cnt["kernels_launched"] = r.result.stats.kernels_launched;
    cnt["transfers_intra_process"] = r.result.transfers_intra_process;
    cnt["transfers_intra_node_ipc"] = r.result.transfers_intra_node_ipc;
    cnt["transfers_inter_node"] = r.result.transfers_inter_node;
    cnt["pe_busy_fraction"] = r.result.stats.pe_busy_fraction;
    cnt["mean_sm_utilization"] = r.result.stats.mean_sm_utilization;
    out.push_back(std::move(rec));
  }
  os << out.dump(2) << '\n';
}

std::vector<MetricsRecord> run_sweep(const RunConfig& cfg) {
  const auto points = cfg.expand();
  const bool trace = cfg.value("output.trace") == "true";
  std::vector<std::unique_ptr<std::ofstream>> traces, logs;
  if (trace) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      traces.push_back(open_out(suffixed(points[i].at("output.trace_path"), points.size(), i)));
      logs.push_back(open_out(suffixed(points[i].at("output.transfer_log"), points.size(), i)));
    }
  }

  std::vector<MetricsRecord> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    MetricsRecord rec;
    rec.run_id = static_cast<int>(i);
    for (const auto& [k, v] : p) {
      if (echoed(k)) rec.config[k] = v;
    }
    try {
      const auto& app = p.at("run.app");
      if (app.empty()) throw ConfigError("run.app: no application selected");
      apps::RunHooks hooks;
      if (trace) {
        hooks.event_trace = traces[i].get();
        hooks.transfer_log = logs[i].get();
      }
      rec.result = apps::run_app(app, runtime_config(p), app_params(p), hooks);
    } catch (const std::exception& e) {
      std::string where;
      for (const auto& [k, vals] : cfg.entries()) {
        if (vals.size() > 1) where += (where.empty() ? "" : ", ") + k + "=" + p.at(k);
      }
      throw SweepError("run " + std::to_string(i) + (where.empty() ? "" : " (" + where + ")") +
                       " failed: " + e.what());
    }
    rows.push_back(std::move(rec));
  }
  return rows;
}

void write_results(const RunConfig& cfg, const std::vector<MetricsRecord>& rows, std::ostream& os) {
  if (cfg.value("output.json") == "true") {
    write_json(os, rows);
  } else {
    write_csv(os, rows);
  }
  if (!os) throw IoError("failed writing results");
}

}  // namespace odsim::cli
