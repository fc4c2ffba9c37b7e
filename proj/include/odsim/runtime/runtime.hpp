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
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "odsim/comm/comm.hpp"
#include "odsim/device/device.hpp"
#include "odsim/runtime/message.hpp"
#include "odsim/runtime/topology.hpp"
#include "odsim/sim/engine.hpp"

namespace odsim::runtime {

struct RuntimeConfig {
  Topology topology;
  device::CostModel cost;
  device::DeviceSpec device;
  double send_overhead_us = 0.5;
  comm::NetworkConfig network;
  std::uint64_t max_events = sim::Engine::kDefaultMaxEvents;
};

class HandlerContext;
class Runtime;

/// Base class for application objects. All messages to a chare run on its
/// home PE, one at a time, in arrival order.
class Chare {
 public:
  virtual ~Chare() = default;

  virtual void receive(HandlerContext& ctx, const EntryMessage& msg) = 0;

  /// Chooses the landing buffer and stream for an incoming device payload.
  /// The default rejects device payloads.
  virtual PostTarget post(const EntryMessage& msg);

  ChareRef ref() const noexcept { return ref_; }
  PeId pe() const noexcept { return pe_; }
  ProcessId process() const noexcept { return process_; }
  DeviceId gpu() const noexcept { return gpu_; }
  device::StreamId stream() const noexcept { return stream_; }

 private:
  friend class Runtime;
  ChareRef ref_;
  PeId pe_ = 0;
  ProcessId process_ = 0;
  DeviceId gpu_ = 0;
  device::StreamId stream_ = 0;
};

using ChareFactory = std::function<std::unique_ptr<Chare>(int index)>;

struct Collection {
  std::string name;
  Dims dims;
  int odf;
  std::vector<std::unique_ptr<Chare>> chares;
};

/// Per-handler cost accounting. The handler body executes instantly in host
/// time; every charge moves a virtual cursor forward, and effects (op
/// appends, message departures) take place at the cursor value when issued.
/// The PE is busy until the final cursor.
class HandlerContext {
 public:
  HandlerContext(Runtime& rt, PeId pe, Chare* self, SimTime start)
      : rt_(rt), pe_(pe), self_(self), cursor_(start) {}

  SimTime now() const noexcept { return cursor_; }
  PeId pe() const noexcept { return pe_; }
  Chare& self() const;
  Runtime& runtime() const noexcept { return rt_; }

  /// Declared host computation.
  void compute(double us);

  /// Enqueues on `stream`, charging launch_host_us. The stream must belong to
  /// this PE's process.
  void enqueue(device::StreamId stream, device::StreamOp op);

  /// Kernel on the chare's own stream; `body` applies its effect at completion.
  void launch_kernel(std::uint64_t work_items, std::uint32_t sm_request,
                     std::function<void()> body = {});

  /// HostCallback on the chare's stream that re-enters this chare with `method`.
  void callback(int method, std::vector<std::int64_t> args = {});

  void send(ChareRef dest, int method, std::vector<std::int64_t> args = {},
            std::vector<std::byte> inline_bytes = {});
  void send_device(ChareRef dest, int method, std::vector<std::int64_t> args, DeviceSlice slice);

 private:
  friend class Runtime;
  friend class comm::Comm;
  void charge(double us) { cursor_ += us; }

  Runtime& rt_;
  PeId pe_;
  Chare* self_;
  SimTime cursor_;
};

/// Busy interval of a PE, reported to observers.
struct BusyInterval {
  PeId pe;
  std::optional<ChareRef> chare;
  SimTime start;
  SimTime end;
};

struct RuntimeStats {
  SimTime end_time = 0.0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t kernels_launched = 0;
  double pe_busy_fraction = 0.0;
  double mean_sm_utilization = 0.0;
};

/// Owns the simulated machine: engine, devices, PEs, chares and the
/// communication layer.
class Runtime : public device::HostSink {
 public:
  explicit Runtime(RuntimeConfig cfg);
  ~Runtime() override;

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const RuntimeConfig& config() const noexcept { return cfg_; }
  const Topology& topology() const noexcept { return cfg_.topology; }
  sim::Engine& engine() noexcept { return engine_; }
  device::DeviceModel& devices() noexcept { return *devices_; }
  comm::Comm& comm() noexcept { return *comm_; }

  /// Instantiates `dims.size()` chares, block-mapped. The element count must
  /// equal odf x total GPUs.
  CollectionId create_collection(std::string name, Dims dims, int odf, const ChareFactory& make);
  /// Same, with an explicit index -> PE mapping.
  CollectionId create_collection(std::string name, Dims dims, int odf, const ChareFactory& make,
                                 const std::function<PeId(int)>& mapping);

  const Collection& collection(CollectionId id) const { return collections_.at(id); }
  Chare& chare(ChareRef ref) const;
  template <class T>
  T& chare_as(ChareRef ref) const {
    return dynamic_cast<T&>(chare(ref));
  }

  BufferId allocate_buffer(DeviceId gpu, std::size_t bytes);
  DeviceBuffer& buffer(BufferId id);
  const DeviceBuffer& buffer(BufferId id) const;

  /// Delivers a message to `dest` at time `at` (>= now) without a sender.
  void inject(ChareRef dest, int method, std::vector<std::int64_t> args = {}, SimTime at = -1.0);

  /// Runs to quiescence: empty event queue, idle PEs, drained streams.
  SimTime run();

  RuntimeStats stats() const;
  void add_busy_observer(std::function<void(const BusyInterval&)> fn) {
    busy_observers_.push_back(std::move(fn));
  }

  // Entry points used by comm and HandlerContext.
  void submit_at(SimTime when, device::StreamId stream, device::StreamOp op);
  void deliver(EntryMessage msg);
  void post_task(PeId pe, std::string_view label, std::function<void(HandlerContext&)> task);
  PostTarget post(const EntryMessage& msg);
  std::uint64_t next_pair_seq(ChareRef src, ChareRef dst);
  void count_send() noexcept { ++sent_; }

  // device::HostSink
  bool valid_pe(PeId pe) const override { return pe < pes_.size(); }
  sim::EntityId pe_entity(PeId pe) const override { return pes_.at(pe).entity; }

 private:
  struct Task {
    std::string_view label;
    std::function<void(HandlerContext&)> run;
    Chare* chare;
  };
  struct Pe {
    sim::EntityId entity;
    std::deque<Task> queue;
    SimTime busy_until = 0.0;
    bool stepping = false;
    double busy_total = 0.0;
  };
  struct Reorder {
    std::uint64_t next = 0;
    std::map<std::uint64_t, EntryMessage> held;
  };

  void enqueue_task(PeId pe, Task task);
  void step(PeId pe);
  void hand_to_pe(EntryMessage msg);

  RuntimeConfig cfg_;
  sim::Engine engine_;
  std::unique_ptr<device::DeviceModel> devices_;
  std::unique_ptr<comm::Comm> comm_;
  std::vector<Pe> pes_;
  std::vector<Collection> collections_;
  std::deque<DeviceBuffer> buffers_;
  std::map<std::pair<ChareRef, ChareRef>, std::uint64_t> pair_send_seq_;
  std::map<std::pair<ChareRef, ChareRef>, Reorder> pair_recv_;
  std::vector<std::function<void(const BusyInterval&)>> busy_observers_;
  std::uint64_t sent_ = 0;
  std::uint64_t delivered_ = 0;
};

}  // namespace odsim::runtime
