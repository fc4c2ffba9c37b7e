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

#include "odsim/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "odsim/errors.hpp"
#include "odsim/util/format.hpp"

namespace odsim::cli {
namespace {

std::string fmt(double v) { return util::format_double(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

std::vector<KeySpec> build_schema() {
  const runtime::RuntimeConfig rc;
  const apps::AppParams ap;
  const auto& c = rc.cost;
  const auto& n = rc.network;
  std::vector<std::string> app_choices{""};
  for (const auto& a : apps::app_names()) app_choices.push_back(a);

  std::vector<KeySpec> s{
      {"run.app", Kind::String, "", {}, false, app_choices, "application to run"},
      {"topology.nodes", Kind::Int, fmt(rc.topology.nodes), 1, false, {}, ""},
      {"topology.gpus_per_node", Kind::Int, fmt(rc.topology.gpus_per_node), 1, false, {}, ""},
      {"topology.processes_per_gpu", Kind::Int, fmt(rc.topology.processes_per_gpu), 1, false, {}, ""},
      {"topology.pes_per_process", Kind::Int, fmt(rc.topology.pes_per_process), 1, false, {}, ""},
      {"device.launch_host_us", Kind::Real, fmt(c.launch_host_us), 0, false, {}, "PE time per enqueue"},
      {"device.launch_device_us", Kind::Real, fmt(c.launch_device_us), 0, false, {}, "kernel dispatch latency"},
      {"device.d2d_bandwidth_gbps", Kind::Real, fmt(c.d2d_bandwidth_gbps), 0, true, {}, ""},
      {"device.callback_latency_us", Kind::Real, fmt(c.callback_latency_us), 0, false, {}, ""},
      {"device.kernel_throughput_items_per_us", Kind::Real, fmt(c.kernel_throughput_items_per_us), 0, true, {}, ""},
      {"device.min_kernel_us", Kind::Real, fmt(c.min_kernel_us), 0, false, {}, ""},
      {"device.sm_capacity", Kind::Int, fmt(rc.device.sm_capacity), 1, false, {}, ""},
      {"device.sharing_policy", Kind::String, "concurrent", {}, false, {"concurrent", "time_sliced"}, ""},
      {"runtime.send_overhead_us", Kind::Real, fmt(rc.send_overhead_us), 0, false, {}, ""},
      {"runtime.max_events", Kind::UInt, fmt(rc.max_events), 1, false, {}, "livelock guard"},
      {"network.bandwidth_gbps", Kind::Real, fmt(n.bandwidth_gbps), 0, true, {}, ""},
      {"network.latency_us", Kind::Real, fmt(n.latency_us), 0, false, {}, ""},
      {"network.registration_cost_us", Kind::Real, fmt(n.registration_cost_us), 0, false, {}, ""},
      {"network.message_gap_us", Kind::Real, fmt(n.message_gap_us), 0, false, {}, "per-message link occupancy"},
      {"network.shm_latency_us", Kind::Real, fmt(n.shm_latency_us), 0, false, {}, "same-node control latency"},
      {"network.chunk_size", Kind::UInt, fmt(n.chunk_size), 1, false, {}, ""},
      {"network.ring_capacity", Kind::UInt, fmt(n.ring_capacity), 1, false, {}, ""},
      {"network.pool_size", Kind::UInt, fmt(static_cast<std::uint64_t>(n.pool_size)), 1, false, {}, ""},
      {"app.odf", Kind::Int, fmt(ap.odf), 1, false, {}, "chares per GPU / kernels / pairs"},
      {"app.total_work_items", Kind::UInt, fmt(ap.total_work_items), 1, false, {}, "overlap"},
      {"app.chares_per_pe", Kind::Int, fmt(ap.chares_per_pe), 1, false, {}, "launch_rate"},
      {"app.window_us", Kind::Real, fmt(ap.window_us), 0, true, {}, "launch_rate"},
      {"app.total_bytes", Kind::UInt, fmt(ap.total_bytes), 1, false, {}, "pipeline"},
      {"app.with_compute", Kind::Bool, fmt(ap.with_compute), {}, false, {}, "pipeline"},
      {"app.grid_rows", Kind::Int, fmt(ap.grid_rows), 1, false, {}, "jacobi2d"},
      {"app.grid_cols", Kind::Int, fmt(ap.grid_cols), 1, false, {}, "jacobi2d"},
      {"app.iterations", Kind::Int, fmt(ap.iterations), 0, false, {}, "jacobi2d"},
      {"app.host_compute_us", Kind::Real, fmt(ap.host_compute_us), 0, false, {}, "jacobi2d"},
      {"output.out", Kind::String, "", {}, false, {}, "results file (stdout if empty)"},
      {"output.json", Kind::Bool, "false", {}, false, {}, "JSON instead of CSV"},
      {"output.trace", Kind::Bool, "false", {}, false, {}, "write event trace and transfer log"},
      {"output.trace_path", Kind::String, "odsim_trace.tsv", {}, false, {}, ""},
      {"output.transfer_log", Kind::String, "odsim_transfers.csv", {}, false, {}, ""},
  };
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  return s;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end;
}

std::string canonical(const KeySpec& spec, std::string_view raw) {
  const std::string text(raw);
  auto fail = [&](const std::string& why) -> ConfigError {
    return ConfigError(spec.key + ": " + why + " (got '" + text + "')");
  };
  auto check_bounds = [&](double v) {
    if (spec.min && v < *spec.min) throw fail("must be >= " + fmt(*spec.min));
    if (spec.positive && !(v > 0)) throw fail("must be > 0");
  };
  switch (spec.kind) {
    case Kind::Int: {
      long long v = 0;
      if (!parse_number(raw, v) || v < INT32_MIN || v > INT32_MAX) throw fail("expected an integer");
      check_bounds(static_cast<double>(v));
      return std::to_string(v);
    }
    case Kind::UInt: {
      std::uint64_t v = 0;
      if (!parse_number(raw, v)) throw fail("expected a non-negative integer");
      check_bounds(static_cast<double>(v));
      return std::to_string(v);
    }
    case Kind::Real: {
      double v = 0;
      if (!parse_number(raw, v) || !std::isfinite(v)) throw fail("expected a finite number");
      check_bounds(v);
      return fmt(v);
    }
    case Kind::Bool:
      if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return "true";
      if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return "false";
      throw fail("expected true or false");
    case Kind::String:
      if (!spec.choices.empty() &&
          std::find(spec.choices.begin(), spec.choices.end(), text) == spec.choices.end()) {
        std::string list;
        for (const auto& c : spec.choices) {
          if (c.empty()) continue;
          list += (list.empty() ? "" : ", ") + c;
        }
        throw fail("expected one of " + list);
      }
      if (text.find_first_of(",[]\n#;") != std::string::npos) throw fail("contains a reserved character");
      return text;
  }
  return text;
}

const KeySpec& require_key(std::string_view key) {
  const KeySpec* spec = find_key(key);
  if (spec == nullptr) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  return *spec;
}

template <class T>
T get(const Point& p, const std::string& k) {
  T v{};
  if (!parse_number(p.at(k), v)) throw ConfigError(k + ": malformed value '" + p.at(k) + "'");
  return v;
}
double real(const Point& p, const std::string& k) { return get<double>(p, k); }
int integer(const Point& p, const std::string& k) { return get<int>(p, k); }
std::uint64_t uint(const Point& p, const std::string& k) { return get<std::uint64_t>(p, k); }

}  // namespace

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s = build_schema();
  return s;
}

const KeySpec* find_key(std::string_view key) {
  const auto& s = schema();
  auto it = std::lower_bound(s.begin(), s.end(), key,
                             [](const KeySpec& a, std::string_view k) { return a.key < k; });
  return it != s.end() && it->key == key ? &*it : nullptr;
}

RunConfig::RunConfig() {
  for (const auto& k : schema()) entries_[k.key] = {k.default_value};
}

void RunConfig::set(std::string_view key, std::string_view raw) {
  const auto& spec = require_key(key);
  raw = trim(raw);
  std::vector<std::string> vals;
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']') throw ConfigError(spec.key + ": unterminated list");
    auto body = raw.substr(1, raw.size() - 2);
    if (trim(body).empty()) throw ConfigError(spec.key + ": empty list");
    while (true) {
      const auto comma = body.find(',');
      vals.push_back(canonical(spec, trim(body.substr(0, comma))));
      if (comma == std::string_view::npos) break;
      body = body.substr(comma + 1);
    }
  } else {
    vals.push_back(canonical(spec, raw));
  }
  entries_[spec.key] = std::move(vals);
}

const std::vector<std::string>& RunConfig::values(std::string_view key) const {
  auto it = entries_.find(std::string(key));
  if (it == entries_.end()) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  return it->second;
}

std::size_t RunConfig::run_count() const {
  std::size_t n = 1;
  for (const auto& [k, v] : entries_) n *= v.size();
  return n;
}

std::vector<Point> RunConfig::expand() const {
  std::vector<const std::pair<const std::string, std::vector<std::string>>*> keys;
  for (const auto& e : entries_) keys.push_back(&e);
  std::vector<std::size_t> idx(keys.size(), 0);
  std::vector<Point> out;
  out.reserve(run_count());
  while (true) {
    Point p;
    for (std::size_t i = 0; i < keys.size(); ++i) p[keys[i]->first] = keys[i]->second[idx[i]];
    out.push_back(std::move(p));
    std::size_t i = keys.size();
    while (i > 0) {
      --i;
      if (++idx[i] < keys[i]->second.size()) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
    if (keys.empty()) return out;
  }
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  std::string section;
  for (const auto& [key, vals] : entries_) {
    const auto dot = key.find('.');
    const auto sec = key.substr(0, dot);
    if (sec != section) {
      os << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    os << key.substr(dot + 1) << " = ";
    if (vals.size() == 1) {
      os << vals[0];
    } else {
      os << '[';
      for (std::size_t i = 0; i < vals.size(); ++i) os << (i ? "," : "") << vals[i];
      os << ']';
    }
    os << '\n';
  }
  return os.str();
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view l = line;
    if (const auto c = l.find_first_of("#;"); c != std::string_view::npos) l = l.substr(0, c);
    l = trim(l);
    if (l.empty()) continue;
    if (l.front() == '[' && l.find('=') == std::string_view::npos) {
      if (l.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section");
      section = std::string(trim(l.substr(1, l.size() - 2)));
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto name = std::string(trim(l.substr(0, eq)));
    const auto key = section.empty() ? name : section + "." + name;
    try {
      base.set(key, l.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + a + "' is not key=value");
    cfg.set(trim(std::string_view(a).substr(0, eq)), std::string_view(a).substr(eq + 1));
  }
}

runtime::RuntimeConfig runtime_config(const Point& p) {
  runtime::RuntimeConfig rc;
  rc.topology = runtime::build_topology(integer(p, "topology.nodes"), integer(p, "topology.gpus_per_node"),
                                        integer(p, "topology.processes_per_gpu"),
                                        integer(p, "topology.pes_per_process"));
  rc.cost.launch_host_us = real(p, "device.launch_host_us");
  rc.cost.launch_device_us = real(p, "device.launch_device_us");
  rc.cost.d2d_bandwidth_gbps = real(p, "device.d2d_bandwidth_gbps");
  rc.cost.callback_latency_us = real(p, "device.callback_latency_us");
  rc.cost.kernel_throughput_items_per_us = real(p, "device.kernel_throughput_items_per_us");
  rc.cost.min_kernel_us = real(p, "device.min_kernel_us");
  rc.device.sm_capacity = integer(p, "device.sm_capacity");
  rc.device.policy = p.at("device.sharing_policy") == "time_sliced" ? device::SharingPolicy::TimeSliced
                                                                   : device::SharingPolicy::Concurrent;
  rc.send_overhead_us = real(p, "runtime.send_overhead_us");
  rc.max_events = uint(p, "runtime.max_events");
  rc.network.bandwidth_gbps = real(p, "network.bandwidth_gbps");
  rc.network.latency_us = real(p, "network.latency_us");
  rc.network.registration_cost_us = real(p, "network.registration_cost_us");
  rc.network.message_gap_us = real(p, "network.message_gap_us");
  rc.network.shm_latency_us = real(p, "network.shm_latency_us");
  rc.network.chunk_size = uint(p, "network.chunk_size");
  rc.network.ring_capacity = uint(p, "network.ring_capacity");
  rc.network.pool_size = static_cast<std::uint32_t>(uint(p, "network.pool_size"));
  return rc;
}

apps::AppParams app_params(const Point& p) {
  apps::AppParams a;
  a.odf = integer(p, "app.odf");
  a.total_work_items = uint(p, "app.total_work_items");
  a.chares_per_pe = integer(p, "app.chares_per_pe");
  a.window_us = real(p, "app.window_us");
  a.total_bytes = uint(p, "app.total_bytes");
  a.with_compute = p.at("app.with_compute") == "true";
  a.grid_rows = integer(p, "app.grid_rows");
  a.grid_cols = integer(p, "app.grid_cols");
  a.iterations = integer(p, "app.iterations");
  a.host_compute_us = real(p, "app.host_compute_us");
  return a;
}

bool echoed(std::string_view key) { return key.rfind("output.", 0) != 0; }

}  // namespace odsim::cli
