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

#include "odsim/device/device.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "odsim/errors.hpp"

namespace odsim::device {

void CostModel::validate() const {
  auto require = [](bool ok, const char* field, const char* rule) {
    if (!ok) throw ConfigError(std::string("device.") + field + " must be " + rule);
  };
  require(launch_host_us >= 0.0 && std::isfinite(launch_host_us), "launch_host_us", ">= 0");
  require(launch_device_us >= 0.0 && std::isfinite(launch_device_us), "launch_device_us", ">= 0");
  require(callback_latency_us >= 0.0 && std::isfinite(callback_latency_us), "callback_latency_us",
          ">= 0");
  require(min_kernel_us >= 0.0 && std::isfinite(min_kernel_us), "min_kernel_us", ">= 0");
  require(d2d_bandwidth_gbps > 0.0 && std::isfinite(d2d_bandwidth_gbps), "d2d_bandwidth_gbps",
          "> 0");
  require(kernel_throughput_items_per_us > 0.0 && std::isfinite(kernel_throughput_items_per_us),
          "kernel_throughput_items_per_us", "> 0");
}

SimTime CostModel::kernel_duration(std::uint64_t work_items) const {
  return std::max(min_kernel_us,
                  static_cast<double>(work_items) / kernel_throughput_items_per_us);
}

SimTime CostModel::copy_duration(std::uint64_t bytes) const {
  return static_cast<double>(bytes) / (d2d_bandwidth_gbps * 1000.0);
}

DeviceModel::DeviceModel(sim::Engine& engine, CostModel cost, const HostSink* host)
    : engine_(engine), cost_(cost), host_(host) {
  cost_.validate();
}

DeviceId DeviceModel::add_device(DeviceSpec spec) {
  if (spec.sm_capacity < 1) throw ConfigError("device.sm_capacity must be >= 1");
  const auto id = static_cast<DeviceId>(gpus_.size());
  GpuState gpu;
  gpu.spec = spec;
  gpu.entity = engine_.register_entity("gpu" + std::to_string(id));
  gpus_.push_back(std::move(gpu));
  return id;
}

StreamId DeviceModel::create_stream(DeviceId device, ProcessId owner) {
  if (device >= gpus_.size()) throw ArgumentError("create_stream: unknown device");
  const auto id = static_cast<StreamId>(streams_.size());
  streams_.push_back(StreamState{
      device, owner,
      engine_.register_entity("gpu" + std::to_string(device) + ".s" + std::to_string(id)), {}});
  return id;
}

EventId DeviceModel::create_event(DeviceId device, EventScope scope) {
  if (device >= gpus_.size()) throw ArgumentError("create_event: unknown device");
  EventState e;
  e.device = device;
  e.scope = scope;
  events_.push_back(std::move(e));
  return static_cast<EventId>(events_.size() - 1);
}

void DeviceModel::reset_event(EventId event) {
  auto& e = events_.at(event);
  if (!e.waiters.empty()) throw ProtocolError("reset_event: event still has waiters");
  e.allocated = true;
  e.recorded = false;
}

void DeviceModel::free_event(EventId event) {
  auto& e = events_.at(event);
  if (!e.waiters.empty()) throw ProtocolError("free_event: event still has waiters");
  e.allocated = false;
}

bool DeviceModel::event_recorded(EventId event) const { return events_.at(event).recorded; }

FlagId DeviceModel::create_flag() {
  flags_.emplace_back();
  return static_cast<FlagId>(flags_.size() - 1);
}

void DeviceModel::set_host_flag(FlagId flag) {
  auto& f = flags_.at(flag);
  f.set = true;
  auto waiters = std::move(f.waiters);
  f.waiters.clear();
  for (StreamId id : waiters) complete_head(id);
  admit_all();
}

DeviceModel::StreamState& DeviceModel::stream(StreamId id) {
  if (id >= streams_.size()) throw ArgumentError("unknown stream " + std::to_string(id));
  return streams_[id];
}

const DeviceModel::StreamState& DeviceModel::stream(StreamId id) const {
  if (id >= streams_.size()) throw ArgumentError("unknown stream " + std::to_string(id));
  return streams_[id];
}

DeviceId DeviceModel::device_of(StreamId id) const { return stream(id).device; }
ProcessId DeviceModel::owner_of(StreamId id) const { return stream(id).owner; }
int DeviceModel::sm_capacity(DeviceId d) const { return gpus_.at(d).spec.sm_capacity; }
int DeviceModel::sm_in_use(DeviceId d) const { return gpus_.at(d).sm_in_use; }
std::size_t DeviceModel::stream_depth(StreamId id) const { return stream(id).ops.size(); }

bool DeviceModel::quiescent() const noexcept {
  return std::all_of(streams_.begin(), streams_.end(),
                     [](const StreamState& s) { return s.ops.empty(); });
}

void DeviceModel::validate(StreamId id, const StreamOp& op) const {
  const auto& s = stream(id);
  if (const auto* k = std::get_if<Kernel>(&op.kind)) {
    const int cap = gpus_[s.device].spec.sm_capacity;
    if (k->sm_request < 1 || static_cast<int>(k->sm_request) > cap) {
      throw ConfigError("kernel sm_request " + std::to_string(k->sm_request) +
                        " outside [1, " + std::to_string(cap) + "]");
    }
  } else if (const auto* w = std::get_if<WaitEvent>(&op.kind)) {
    if (w->event >= events_.size()) throw ProtocolError("wait on unknown event");
  } else if (const auto* r = std::get_if<RecordEvent>(&op.kind)) {
    if (r->event >= events_.size()) throw ProtocolError("record of unknown event");
  } else if (const auto* f = std::get_if<WaitHostFlag>(&op.kind)) {
    if (f->flag >= flags_.size()) throw ConfigError("wait on unknown host flag");
  } else if (const auto* cb = std::get_if<HostCallback>(&op.kind)) {
    if (host_ == nullptr || !host_->valid_pe(cb->pe)) {
      throw ConfigError("host callback targets invalid PE " + std::to_string(cb->pe));
    }
  }
}

std::uint64_t DeviceModel::submit(StreamId id, StreamOp op) {
  validate(id, op);
  auto& s = stream(id);
  const std::uint64_t seq = next_seq_++;
  if (std::holds_alternative<Kernel>(op.kind)) ++kernels_launched_;
  s.ops.push_back(OpState{std::move(op), seq, engine_.now()});
  if (s.ops.size() == 1) {
    advance(id);
  } else if (s.ops.size() == 2) {
    prefetch(id);
  }
  admit_all();
  return seq;
}

void DeviceModel::start_dispatch(StreamId id, OpState& op) {
  op.phase = Phase::Dispatching;
  const auto seq = op.seq;
  engine_.schedule(cost_.launch_device_us, stream(id).entity, "kernel_dispatch",
                   [this, id, seq] { on_dispatched(id, seq); });
}

// A kernel directly behind a running kernel or copy starts its dispatch
// latency early, so back-to-back kernels on one stream pipeline the launch.
void DeviceModel::prefetch(StreamId id) {
  auto& s = stream(id);
  if (s.ops.size() < 2) return;
  auto& head = s.ops[0];
  auto& next = s.ops[1];
  if (head.phase == Phase::Running && next.phase == Phase::Queued &&
      std::holds_alternative<Kernel>(next.op.kind)) {
    start_dispatch(id, next);
  }
}

void DeviceModel::on_dispatched(StreamId id, std::uint64_t seq) {
  auto& s = stream(id);
  for (std::size_t i = 0; i < s.ops.size() && i < 2; ++i) {
    auto& op = s.ops[i];
    if (op.seq != seq) continue;
    if (i == 0) {
      op.phase = Phase::Blocked;  // waiting for SMs
      gpus_[s.device].pending.emplace(std::make_pair(engine_.now(), seq), id);
      admit(s.device);
    } else {
      op.phase = Phase::Eligible;
    }
    return;
  }
  throw ProtocolError("dispatched kernel is not near its stream head");
}

void DeviceModel::advance(StreamId id) {
  auto& s = stream(id);
  while (!s.ops.empty()) {
    auto& head = s.ops.front();
    if (head.phase == Phase::Eligible) {
      // dispatched while its predecessor ran; becomes eligible on reaching the head
      gpus_[s.device].pending.emplace(std::make_pair(engine_.now(), head.seq), id);
      head.phase = Phase::Blocked;  // waiting for SMs
      return;
    }
    if (head.phase != Phase::Queued) return;

    if (std::holds_alternative<Kernel>(head.op.kind)) {
      start_dispatch(id, head);
      return;
    }
    if (const auto* copy = std::get_if<CopyD2D>(&head.op.kind)) {
      head.phase = Phase::Running;
      head.start = engine_.now();
      engine_.schedule(cost_.copy_duration(copy->bytes), s.entity, "copy_complete",
                       [this, id] { complete_head(id); });
      prefetch(id);
      return;
    }
    if (const auto* rec = std::get_if<RecordEvent>(&head.op.kind)) {
      auto& ev = events_[rec->event];
      if (!ev.allocated) throw ProtocolError("record on freed event " + std::to_string(rec->event));
      ev.recorded = true;
      ev.recorded_at = engine_.now();
      head.start = engine_.now();
      auto waiters = std::move(ev.waiters);
      ev.waiters.clear();
      complete_head(id);
      for (StreamId w : waiters) complete_head(w);
      return;
    }
    if (const auto* wait = std::get_if<WaitEvent>(&head.op.kind)) {
      auto& ev = events_[wait->event];
      if (!ev.allocated) {
        throw ProtocolError("wait on freed event " + std::to_string(wait->event));
      }
      head.start = engine_.now();
      if (ev.recorded) {
        complete_head(id);
      } else {
        head.phase = Phase::Blocked;
        ev.waiters.push_back(id);
      }
      return;
    }
    if (const auto* flag = std::get_if<WaitHostFlag>(&head.op.kind)) {
      auto& f = flags_[flag->flag];
      head.start = engine_.now();
      if (f.set) {
        complete_head(id);
      } else {
        head.phase = Phase::Blocked;
        f.waiters.push_back(id);
      }
      return;
    }
    if (auto* cb = std::get_if<HostCallback>(&head.op.kind)) {
      head.start = engine_.now();
      engine_.schedule(cost_.callback_latency_us, host_->pe_entity(cb->pe), "callback",
                       std::move(cb->deliver));
      complete_head(id);
      return;
    }
  }
}

void DeviceModel::complete_head(StreamId id) {
  auto& s = stream(id);
  if (s.ops.empty()) throw ProtocolError("completion on empty stream");
  OpState op = std::move(s.ops.front());
  s.ops.pop_front();
  if (const auto* k = std::get_if<Kernel>(&op.op.kind)) {
    auto& gpu = gpus_[s.device];
    account(gpu);
    gpu.sm_in_use -= static_cast<int>(k->sm_request);
    std::erase_if(gpu.resident, [&](const Resident& r) { return r.seq == op.seq; });
  }
  if (op.op.on_complete) op.op.on_complete();
  notify(s, id, op, engine_.now());
  advance(id);
  admit_all();
}

void DeviceModel::notify(const StreamState& s, StreamId id, const OpState& op, SimTime complete) {
  if (observers_.empty()) return;
  OpRecord rec{s.device, id, s.owner, op.seq, OpType::Kernel, 0, op.enqueue, op.start, complete};
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Kernel>) {
          rec.type = OpType::Kernel;
          rec.sm_request = k.sm_request;
        } else if constexpr (std::is_same_v<T, CopyD2D>) {
          rec.type = OpType::Copy;
        } else if constexpr (std::is_same_v<T, RecordEvent>) {
          rec.type = OpType::Record;
        } else if constexpr (std::is_same_v<T, WaitEvent>) {
          rec.type = OpType::WaitEvent;
        } else if constexpr (std::is_same_v<T, WaitHostFlag>) {
          rec.type = OpType::WaitFlag;
        } else {
          rec.type = OpType::Callback;
        }
      },
      op.op.kind);
  for (const auto& fn : observers_) fn(rec);
}

void DeviceModel::account(GpuState& gpu) {
  const SimTime now = engine_.now();
  gpu.sm_area += static_cast<double>(gpu.sm_in_use) * (now - gpu.last_change);
  gpu.last_change = now;
}

void DeviceModel::admit_all() {
  for (DeviceId d = 0; d < gpus_.size(); ++d) {
    if (!gpus_[d].pending.empty()) admit(d);
  }
}

// Starts every pending kernel that fits, in (eligibility, seq) order. Under
// TimeSliced a kernel from another context blocks later kernels of the
// resident context, so the device drains before switching.
void DeviceModel::admit(DeviceId device) {
  auto& gpu = gpus_[device];
  bool foreign_waiting = false;
  for (auto it = gpu.pending.begin(); it != gpu.pending.end();) {
    const StreamId sid = it->second;
    auto& s = streams_[sid];
    auto& head = s.ops.front();
    const auto& k = std::get<Kernel>(head.op.kind);
    if (gpu.spec.policy == SharingPolicy::TimeSliced) {
      if (!gpu.resident.empty() && gpu.resident.front().owner != s.owner) {
        foreign_waiting = true;
        ++it;
        continue;
      }
      if (foreign_waiting) {
        ++it;
        continue;
      }
    }
    if (gpu.sm_in_use + static_cast<int>(k.sm_request) > gpu.spec.sm_capacity) {
      ++it;
      continue;
    }
    it = gpu.pending.erase(it);
    account(gpu);
    gpu.sm_in_use += static_cast<int>(k.sm_request);
    gpu.resident.push_back(Resident{head.seq, s.owner, k.sm_request});
    head.phase = Phase::Running;
    head.start = engine_.now();
    engine_.schedule(cost_.kernel_duration(k.work_items), s.entity, "kernel_complete",
                     [this, sid] { complete_head(sid); });
    prefetch(sid);
  }
}

double DeviceModel::mean_sm_utilization(SimTime end) const {
  if (gpus_.empty() || end <= 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& gpu : gpus_) {
    const double area = gpu.sm_area + static_cast<double>(gpu.sm_in_use) * (end - gpu.last_change);
    sum += area / (static_cast<double>(gpu.spec.sm_capacity) * end);
  }
  return sum / static_cast<double>(gpus_.size());
}

}  // namespace odsim::device
