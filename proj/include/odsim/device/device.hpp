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
#include <deque>
#include <functional>
#include <map>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "odsim/sim/engine.hpp"

namespace odsim::device {

using sim::SimTime;
using DeviceId = std::uint32_t;
using StreamId = std::uint32_t;
using EventId = std::uint32_t;
using FlagId = std::uint32_t;
using PeId = std::uint32_t;
using ProcessId = std::uint32_t;

/// Timing parameters of the modeled GPU and its host driver.
struct CostModel {
  double launch_host_us = 5.0;    // PE time per enqueue call
  double launch_device_us = 5.0;  // device dispatch latency per kernel
  double d2d_bandwidth_gbps = 300.0;
  double callback_latency_us = 2.0;
  double kernel_throughput_items_per_us = 640.0;
  double min_kernel_us = 1.0;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  /// max(min_kernel_us, work_items / throughput); occupancy does not change it.
  SimTime kernel_duration(std::uint64_t work_items) const;
  /// bytes / (gbps * 1000) microseconds.
  SimTime copy_duration(std::uint64_t bytes) const;
};

/// Whether kernels from different process contexts may co-reside (MPS-like)
/// or must take turns on the device.
enum class SharingPolicy { Concurrent, TimeSliced };

struct DeviceSpec {
  int sm_capacity = 84;
  SharingPolicy policy = SharingPolicy::Concurrent;
};

enum class EventScope { Process, Ipc };

struct Kernel {
  std::uint64_t work_items = 0;
  std::uint32_t sm_request = 1;
};
struct CopyD2D {
  std::uint64_t bytes = 0;
};
struct RecordEvent {
  EventId event;
};
struct WaitEvent {
  EventId event;
};
struct WaitHostFlag {
  FlagId flag;
};
/// Posts `deliver` to the PE's host queue `callback_latency_us` after the op
/// reaches the stream head.
struct HostCallback {
  PeId pe;
  std::function<void()> deliver;
};

using OpKind = std::variant<Kernel, CopyD2D, RecordEvent, WaitEvent, WaitHostFlag, HostCallback>;

struct StreamOp {
  OpKind kind;
  /// Runs at completion time, before the stream advances. Kernels and copies
  /// use it to apply their effect on buffer contents.
  std::function<void()> on_complete = {};
};

enum class OpType { Kernel, Copy, Record, WaitEvent, WaitFlag, Callback };

/// Completed-op summary handed to observers.
struct OpRecord {
  DeviceId device;
  StreamId stream;
  ProcessId owner;
  std::uint64_t seq;
  OpType type;
  std::uint32_t sm_request;
  SimTime enqueue;
  SimTime start;
  SimTime complete;
};

/// Host side of the device: validates callback targets and names PEs.
class HostSink {
 public:
  virtual ~HostSink() = default;
  virtual bool valid_pe(PeId pe) const = 0;
  virtual sim::EntityId pe_entity(PeId pe) const = 0;
};

/// All GPUs of a run plus the synchronization objects (events, host flags)
/// they share. Stream, event and flag ids are global across devices, which
/// lets an IPC event recorded on one GPU gate a stream on another.
class DeviceModel {
 public:
  DeviceModel(sim::Engine& engine, CostModel cost, const HostSink* host = nullptr);

  DeviceModel(const DeviceModel&) = delete;
  DeviceModel& operator=(const DeviceModel&) = delete;

  DeviceId add_device(DeviceSpec spec);
  StreamId create_stream(DeviceId device, ProcessId owner);

  EventId create_event(DeviceId device, EventScope scope);
  /// Re-arms a pool event: allocated and Unrecorded.
  void reset_event(EventId event);
  /// Returns an event to its pool; waiting on it afterwards is a ProtocolError.
  void free_event(EventId event);
  bool event_recorded(EventId event) const;

  FlagId create_flag();
  /// Releases every stream blocked on `flag` at the current time. The flag
  /// stays set, so later waits pass immediately.
  void set_host_flag(FlagId flag);

  /// Throws ConfigError/ProtocolError for ops that can never be valid on `stream`.
  void validate(StreamId stream, const StreamOp& op) const;

  /// Appends `op` to the stream FIFO at the current time. Returns its sequence number.
  std::uint64_t submit(StreamId stream, StreamOp op);

  void add_observer(std::function<void(const OpRecord&)> fn) { observers_.push_back(std::move(fn)); }

  const CostModel& cost() const noexcept { return cost_; }
  std::size_t device_count() const noexcept { return gpus_.size(); }
  DeviceId device_of(StreamId stream) const;
  ProcessId owner_of(StreamId stream) const;
  int sm_capacity(DeviceId device) const;
  int sm_in_use(DeviceId device) const;
  std::size_t stream_depth(StreamId stream) const;
  bool quiescent() const noexcept;

  std::uint64_t kernels_launched() const noexcept { return kernels_launched_; }
  /// Time-averaged fraction of SMs in use over [0, end], averaged over devices.
  double mean_sm_utilization(SimTime end) const;

 private:
  enum class Phase { Queued, Dispatching, Eligible, Running, Blocked };

  struct OpState {
    StreamOp op;
    std::uint64_t seq;
    SimTime enqueue;
    SimTime start = 0.0;
    Phase phase = Phase::Queued;
  };

  struct StreamState {
    DeviceId device;
    ProcessId owner;
    sim::EntityId entity;
    std::deque<OpState> ops;
  };

  struct Resident {
    std::uint64_t seq;
    ProcessId owner;
    std::uint32_t sm;
  };

  struct GpuState {
    DeviceSpec spec;
    sim::EntityId entity;
    int sm_in_use = 0;
    std::vector<Resident> resident;
    // (eligibility time, seq) -> stream whose head kernel is waiting for SMs
    std::map<std::pair<SimTime, std::uint64_t>, StreamId> pending;
    double sm_area = 0.0;
    SimTime last_change = 0.0;
  };

  struct EventState {
    DeviceId device;
    EventScope scope;
    bool allocated = true;
    bool recorded = false;
    SimTime recorded_at = 0.0;
    std::vector<StreamId> waiters;
  };

  struct FlagState {
    bool set = false;
    std::vector<StreamId> waiters;
  };

  StreamState& stream(StreamId id);
  const StreamState& stream(StreamId id) const;
  void advance(StreamId id);
  void start_dispatch(StreamId id, OpState& op);
  void prefetch(StreamId id);
  void on_dispatched(StreamId id, std::uint64_t seq);
  void complete_head(StreamId id);
  void admit(DeviceId device);
  void admit_all();
  void account(GpuState& gpu);
  void notify(const StreamState& s, StreamId id, const OpState& op, SimTime complete);

  sim::Engine& engine_;
  CostModel cost_;
  const HostSink* host_;
  // deques: handlers may hold references while new entries are appended
  std::deque<GpuState> gpus_;
  std::deque<StreamState> streams_;
  std::deque<EventState> events_;
  std::deque<FlagState> flags_;
  std::vector<std::function<void(const OpRecord&)>> observers_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t kernels_launched_ = 0;
};

}  // namespace odsim::device
