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
#include <iosfwd>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "odsim/runtime/message.hpp"
#include "odsim/runtime/topology.hpp"

namespace odsim::runtime {
class Runtime;
}

namespace odsim::comm {

using runtime::ChareRef;
using runtime::EntryMessage;
using runtime::NodeId;
using runtime::PeId;
using runtime::ProcessId;
using sim::SimTime;

struct NetworkConfig {
  double bandwidth_gbps = 21.0;
  double latency_us = 2.0;
  double registration_cost_us = 10.0;
  /// Per-message occupancy of the link ahead of the payload bytes (LogGP gap).
  double message_gap_us = 15.0;
  /// Control-message latency between processes of one node.
  double shm_latency_us = 1.0;
  std::uint64_t chunk_size = 512 * 1024;
  std::uint64_t ring_capacity = 64ULL * 1024 * 1024;
  std::uint32_t pool_size = 128;

  void validate() const;
  SimTime wire_time(std::uint64_t bytes) const {
    return static_cast<double>(bytes) / (bandwidth_gbps * 1000.0);
  }
};

enum class Path { IntraProcess, IntraNodeIpc, InterNode };

std::string_view path_name(Path p) noexcept;

struct Location {
  NodeId node;
  ProcessId process;
  PeId pe;
};

/// Placement of every chare, filled while collections are created and
/// frozen before the run starts.
class LocationTable {
 public:
  void insert(ChareRef chare, Location loc);
  void freeze() noexcept { frozen_ = true; }
  bool frozen() const noexcept { return frozen_; }
  bool contains(ChareRef chare) const { return table_.count(chare) != 0; }
  /// Throws RoutingError for unknown chares.
  const Location& at(ChareRef chare) const;
  std::size_t size() const noexcept { return table_.size(); }

 private:
  std::map<ChareRef, Location> table_;
  bool frozen_ = false;
};

Path select_transport(const Location& src, const Location& dst) noexcept;
Path select_transport(ChareRef src, ChareRef dst, const LocationTable& table);

/// First-fit allocator over a process's shared staging buffer.
class CommBufferRing {
 public:
  explicit CommBufferRing(std::uint64_t capacity) : capacity_(capacity) {}

  std::optional<std::uint64_t> allocate(std::uint64_t bytes);
  /// Throws ProtocolError if `offset` is not a live extent.
  void free(std::uint64_t offset);

  std::uint64_t capacity() const noexcept { return capacity_; }
  std::uint64_t in_use() const noexcept { return in_use_; }
  const std::map<std::uint64_t, std::uint64_t>& extents() const noexcept { return extents_; }

 private:
  std::uint64_t capacity_;
  std::uint64_t in_use_ = 0;
  std::map<std::uint64_t, std::uint64_t> extents_;  // offset -> bytes
};

/// Fixed set of cross-process events; a slot returns to the pool only after
/// its waiter has consumed it.
class IpcEventPool {
 public:
  IpcEventPool() = default;
  explicit IpcEventPool(std::vector<device::EventId> events);

  std::optional<std::uint32_t> acquire();
  void release(std::uint32_t slot);
  device::EventId event(std::uint32_t slot) const { return events_.at(slot); }
  std::size_t size() const noexcept { return events_.size(); }
  std::size_t in_use() const noexcept { return events_.size() - free_.size(); }

 private:
  std::vector<device::EventId> events_;
  std::deque<std::uint32_t> free_;
  std::vector<bool> busy_;
};

/// FIFO bulk channel between two nodes.
struct NetworkLink {
  SimTime free_at = 0.0;
  std::uint64_t transfers = 0;
};

struct TransferRecord {
  std::uint64_t id;
  ChareRef src;
  ChareRef dst;
  std::uint64_t bytes;
  Path path;
  SimTime send = 0.0;
  SimTime staged = 0.0;
  SimTime delivered = -1.0;
  std::uint64_t src_digest = 0;  // payload fingerprint at send time
  std::uint64_t dst_digest = 0;  // destination region fingerprint at delivery
};

/// Event raised on ring/pool state changes, for invariant checks.
struct CommProbe {
  ProcessId process;
  const CommBufferRing* ring;
  const IpcEventPool* pool;
};

/// Routes entry messages over the three GPU transport paths.
class Comm {
 public:
  Comm(runtime::Runtime& rt, NetworkConfig cfg);

  const NetworkConfig& config() const noexcept { return cfg_; }
  LocationTable& table() noexcept { return table_; }
  const LocationTable& table() const noexcept { return table_; }

  /// Creates per-process rings and event pools; called once topology exists.
  void setup();

  /// Sends `msg` departing at `cursor`, advancing `cursor` by the sender-side
  /// costs (copy issue, registration). `src_stream` is the sender's stream.
  void route(EntryMessage msg, PeId src_pe, device::StreamId src_stream, SimTime& cursor);

  const std::vector<TransferRecord>& transfers() const noexcept { return records_; }
  std::uint64_t transfers_on(Path p) const noexcept;
  std::uint64_t outstanding_registrations() const noexcept { return registrations_; }

  const CommBufferRing& ring(ProcessId p) const { return rings_.at(p); }
  const IpcEventPool& pool(ProcessId p) const { return pools_.at(p); }
  const NetworkLink& link(NodeId a, NodeId b) const;

  void add_probe(std::function<void(const CommProbe&)> fn) { probes_.push_back(std::move(fn)); }

  /// CSV: transfer_id,path,bytes,send_us,staged_us,delivered_us
  void write_transfer_log(std::ostream& os) const;

 private:
  struct IpcPending {
    std::uint64_t record;
    EntryMessage msg;
    device::StreamId src_stream;
  };

  void send_control(EntryMessage msg, SimTime depart, SimTime latency);
  void send_intra_process(std::uint64_t rec, EntryMessage msg, SimTime& cursor);
  void send_ipc(std::uint64_t rec, EntryMessage msg, device::StreamId src_stream, SimTime& cursor);
  void ipc_try_start(ProcessId process);
  void ipc_issue(ProcessId process, IpcPending p, std::uint64_t offset, std::uint32_t slot);
  void send_inter_node(std::uint64_t rec, EntryMessage msg, SimTime& cursor);
  void finish(std::uint64_t rec, EntryMessage msg, runtime::PostTarget target);
  NetworkLink& link_between(NodeId a, NodeId b);
  void probe(ProcessId p);
  std::uint64_t digest(const runtime::DeviceSlice& s) const;

  runtime::Runtime& rt_;
  NetworkConfig cfg_;
  LocationTable table_;
  std::vector<CommBufferRing> rings_;
  std::vector<IpcEventPool> pools_;
  std::vector<std::deque<IpcPending>> ipc_waiting_;
  // staged payload bytes, keyed by (process, ring offset)
  std::map<std::pair<ProcessId, std::uint64_t>, std::vector<std::byte>> staging_;
  std::map<std::pair<NodeId, NodeId>, NetworkLink> links_;
  std::vector<TransferRecord> records_;
  std::vector<std::function<void(const CommProbe&)>> probes_;
  std::uint64_t registrations_ = 0;
};

}  // namespace odsim::comm
