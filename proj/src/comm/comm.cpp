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

#include "odsim/comm/comm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>

#include "odsim/errors.hpp"
#include "odsim/runtime/runtime.hpp"
#include "odsim/util/format.hpp"

namespace odsim::comm {

void NetworkConfig::validate() const {
  if (!(bandwidth_gbps > 0.0)) throw ConfigError("network.bandwidth_gbps must be > 0");
  if (!(latency_us >= 0.0)) throw ConfigError("network.latency_us must be >= 0");
  if (!(registration_cost_us >= 0.0)) throw ConfigError("network.registration_cost_us must be >= 0");
  if (!(message_gap_us >= 0.0)) throw ConfigError("network.message_gap_us must be >= 0");
  if (!(shm_latency_us >= 0.0)) throw ConfigError("network.shm_latency_us must be >= 0");
  if (chunk_size == 0) throw ConfigError("network.chunk_size must be > 0");
  if (ring_capacity == 0) throw ConfigError("network.ring_capacity must be > 0");
  if (pool_size == 0) throw ConfigError("network.pool_size must be > 0");
}

std::string_view path_name(Path p) noexcept {
  switch (p) {
    case Path::IntraProcess: return "intra_process";
    case Path::IntraNodeIpc: return "intra_node_ipc";
    case Path::InterNode: return "inter_node";
  }
  return "unknown";
}

void LocationTable::insert(ChareRef chare, Location loc) {
  if (frozen_) throw ProtocolError("location table is frozen");
  table_[chare] = loc;
}

const Location& LocationTable::at(ChareRef chare) const {
  auto it = table_.find(chare);
  if (it == table_.end()) {
    throw RoutingError("no location for chare " + std::to_string(chare.collection) + "[" +
                       std::to_string(chare.index) + "]");
  }
  return it->second;
}

Path select_transport(const Location& src, const Location& dst) noexcept {
  if (src.node != dst.node) return Path::InterNode;
  if (src.process != dst.process) return Path::IntraNodeIpc;
  return Path::IntraProcess;
}

Path select_transport(ChareRef src, ChareRef dst, const LocationTable& table) {
  return select_transport(table.at(src), table.at(dst));
}

std::optional<std::uint64_t> CommBufferRing::allocate(std::uint64_t bytes) {
  if (bytes == 0 || bytes > capacity_ - in_use_) return std::nullopt;
  std::uint64_t pos = 0;
  for (const auto& [off, len] : extents_) {
    if (off - pos >= bytes) break;
    pos = off + len;
  }
  if (capacity_ - pos < bytes) return std::nullopt;
  extents_.emplace(pos, bytes);
  in_use_ += bytes;
  return pos;
}

void CommBufferRing::free(std::uint64_t offset) {
  auto it = extents_.find(offset);
  if (it == extents_.end()) {
    throw ProtocolError("ring free of unknown offset " + std::to_string(offset));
  }
  in_use_ -= it->second;
  extents_.erase(it);
}

IpcEventPool::IpcEventPool(std::vector<device::EventId> events)
    : events_(std::move(events)), busy_(events_.size(), false) {
  for (std::uint32_t i = 0; i < events_.size(); ++i) free_.push_back(i);
}

std::optional<std::uint32_t> IpcEventPool::acquire() {
  if (free_.empty()) return std::nullopt;
  const auto slot = free_.front();
  free_.pop_front();
  busy_[slot] = true;
  return slot;
}

void IpcEventPool::release(std::uint32_t slot) {
  if (slot >= busy_.size() || !busy_[slot]) {
    throw ProtocolError("release of idle event slot " + std::to_string(slot));
  }
  busy_[slot] = false;
  free_.push_back(slot);
}

Comm::Comm(runtime::Runtime& rt, NetworkConfig cfg) : rt_(rt), cfg_(cfg) { cfg_.validate(); }

void Comm::setup() {
  const auto& topo = rt_.topology();
  auto& dev = rt_.devices();
  for (int p = 0; p < topo.total_processes(); ++p) {
    const auto proc = static_cast<ProcessId>(p);
    rings_.emplace_back(cfg_.ring_capacity);
    std::vector<device::EventId> events;
    events.reserve(cfg_.pool_size);
    for (std::uint32_t i = 0; i < cfg_.pool_size; ++i) {
      const auto ev = dev.create_event(topo.gpu_of_process(proc), device::EventScope::Ipc);
      dev.free_event(ev);
      events.push_back(ev);
    }
    pools_.emplace_back(std::move(events));
  }
  ipc_waiting_.resize(rings_.size());
}

std::uint64_t Comm::transfers_on(Path p) const noexcept {
  return static_cast<std::uint64_t>(
      std::count_if(records_.begin(), records_.end(), [p](const auto& r) { return r.path == p; }));
}

const NetworkLink& Comm::link(NodeId a, NodeId b) const {
  auto it = links_.find({a, b});
  if (it == links_.end()) throw ArgumentError("no traffic between the given nodes");
  return it->second;
}

NetworkLink& Comm::link_between(NodeId a, NodeId b) { return links_[{a, b}]; }

void Comm::probe(ProcessId p) {
  if (probes_.empty()) return;
  const CommProbe ev{p, &rings_[p], &pools_[p]};
  for (const auto& fn : probes_) fn(ev);
}

std::uint64_t Comm::digest(const runtime::DeviceSlice& s) const {
  const auto bytes = rt_.buffer(s.buffer).bytes().subspan(s.offset, s.bytes);
  return util::fnv1a(bytes.data(), bytes.size());
}

namespace {

runtime::PostTarget checked_target(runtime::Runtime& rt, const EntryMessage& msg) {
  const auto target = rt.post(msg);
  const auto& buf = rt.buffer(target.buffer);
  const auto bytes = msg.device->bytes;
  if (target.offset + bytes > buf.size()) {
    throw SizeError("payload of " + std::to_string(bytes) + " bytes does not fit buffer " +
                    std::to_string(target.buffer) + " at offset " + std::to_string(target.offset));
  }
  return target;
}

}  // namespace

void Comm::route(EntryMessage msg, PeId src_pe, device::StreamId src_stream, SimTime& cursor) {
  const Location& dst = table_.at(msg.dest);
  const Location src = msg.src ? table_.at(*msg.src) : Location{rt_.topology().node_of(src_pe),
                                                                rt_.topology().process_of(src_pe),
                                                                src_pe};
  const Path path = select_transport(src, dst);
  SimTime control = 0.0;
  if (path == Path::IntraNodeIpc) control = cfg_.shm_latency_us;
  if (path == Path::InterNode) control = cfg_.latency_us;

  if (!msg.device || msg.device->bytes == 0) {
    if (msg.device) {
      TransferRecord rec{records_.size(), *msg.src, msg.dest, 0, path};
      rec.send = cursor;
      rec.staged = rec.delivered = cursor + control;
      records_.push_back(rec);
    }
    send_control(std::move(msg), cursor, control);
    return;
  }

  const auto& slice = *msg.device;
  TransferRecord rec{records_.size(), msg.src.value_or(msg.dest), msg.dest, slice.bytes, path};
  rec.send = cursor;
  rec.src_digest = digest(slice);
  records_.push_back(rec);
  switch (path) {
    case Path::IntraProcess: send_intra_process(rec.id, std::move(msg), cursor); break;
    case Path::IntraNodeIpc: send_ipc(rec.id, std::move(msg), src_stream, cursor); break;
    case Path::InterNode: send_inter_node(rec.id, std::move(msg), cursor); break;
  }
}

void Comm::send_control(EntryMessage msg, SimTime depart, SimTime latency) {
  const auto pe = table_.at(msg.dest).pe;
  rt_.engine().schedule_at(depart + latency, rt_.pe_entity(pe), "control",
                           [this, m = std::move(msg)]() mutable { rt_.deliver(std::move(m)); });
}

void Comm::finish(std::uint64_t rec, EntryMessage msg, runtime::PostTarget target) {
  auto& r = records_[rec];
  r.delivered = rt_.engine().now();
  r.dst_digest = digest(runtime::DeviceSlice{target.buffer, target.offset, r.bytes});
  rt_.deliver(std::move(msg));
}

void Comm::send_intra_process(std::uint64_t rec, EntryMessage msg, SimTime& cursor) {
  const auto target = checked_target(rt_, msg);
  const auto dst_pe = table_.at(msg.dest).pe;
  const auto slice = *msg.device;
  cursor += rt_.devices().cost().launch_host_us;
  rt_.submit_at(cursor, target.stream,
                device::StreamOp{device::CopyD2D{slice.bytes}, [this, rec, slice, target] {
                                   const auto src = rt_.buffer(slice.buffer).bytes();
                                   auto dst = rt_.buffer(target.buffer).bytes();
                                   std::memmove(dst.data() + target.offset,
                                                src.data() + slice.offset, slice.bytes);
                                   records_[rec].staged = rt_.engine().now();
                                 }});
  rt_.submit_at(cursor, target.stream,
                device::StreamOp{device::HostCallback{
                    dst_pe, [this, rec, target, m = std::move(msg)]() mutable {
                      finish(rec, std::move(m), target);
                    }}});
}

void Comm::send_ipc(std::uint64_t rec, EntryMessage msg, device::StreamId src_stream,
                    SimTime& cursor) {
  const auto bytes = msg.device->bytes;
  if (bytes > cfg_.ring_capacity) {
    throw SizeError("payload of " + std::to_string(bytes) +
                    " bytes exceeds the communication ring capacity");
  }
  const auto proc = rt_.topology().process_of(table_.at(*msg.src).pe);
  cursor += 2.0 * rt_.devices().cost().launch_host_us;
  const auto src_pe = table_.at(*msg.src).pe;
  rt_.engine().schedule_at(cursor, rt_.pe_entity(src_pe), "ipc_stage",
                           [this, proc, p = IpcPending{rec, std::move(msg), src_stream}]() mutable {
                             ipc_waiting_[proc].push_back(std::move(p));
                             ipc_try_start(proc);
                           });
}

void Comm::ipc_try_start(ProcessId process) {
  auto& queue = ipc_waiting_[process];
  while (!queue.empty()) {
    const auto bytes = queue.front().msg.device->bytes;
    auto off = rings_[process].allocate(bytes);
    if (!off) break;
    auto slot = pools_[process].acquire();
    if (!slot) {
      rings_[process].free(*off);
      break;
    }
    IpcPending p = std::move(queue.front());
    queue.pop_front();
    ipc_issue(process, std::move(p), *off, *slot);
  }
  probe(process);
}

void Comm::ipc_issue(ProcessId process, IpcPending p, std::uint64_t offset, std::uint32_t slot) {
  auto& dev = rt_.devices();
  const auto ev = pools_[process].event(slot);
  dev.reset_event(ev);
  const auto slice = *p.msg.device;
  const auto rec = p.record;
  const SimTime now = rt_.engine().now();
  rt_.submit_at(now, p.src_stream,
             device::StreamOp{device::CopyD2D{slice.bytes}, [this, process, offset, slice, rec] {
                                const auto src = rt_.buffer(slice.buffer).bytes().subspan(
                                    slice.offset, slice.bytes);
                                staging_[{process, offset}].assign(src.begin(), src.end());
                                records_[rec].staged = rt_.engine().now();
                              }});
  rt_.submit_at(now, p.src_stream, device::StreamOp{device::RecordEvent{ev}});

  const auto dst_pe = table_.at(p.msg.dest).pe;
  const double lh = dev.cost().launch_host_us;
  rt_.engine().schedule_at(
      now + cfg_.shm_latency_us, rt_.pe_entity(dst_pe), "ipc_control",
      [this, process, offset, slot, ev, rec, dst_pe, lh, m = std::move(p.msg)]() mutable {
        rt_.post_task(dst_pe, "ipc_receive",
                      [this, process, offset, slot, ev, rec, dst_pe, lh,
                       m = std::move(m)](runtime::HandlerContext& ctx) mutable {
                        const auto target = checked_target(rt_, m);
                        const auto bytes = m.device->bytes;
                        ctx.charge(lh);
                        rt_.submit_at(ctx.now(), target.stream,
                                      device::StreamOp{device::WaitEvent{ev}});
                        ctx.charge(lh);
                        rt_.submit_at(
                            ctx.now(), target.stream,
                            device::StreamOp{device::CopyD2D{bytes}, [this, process, offset, slot,
                                                                      ev, target] {
                                               auto it = staging_.find({process, offset});
                                               auto dst = rt_.buffer(target.buffer).bytes();
                                               std::copy(it->second.begin(), it->second.end(),
                                                         dst.begin() + static_cast<std::ptrdiff_t>(
                                                                           target.offset));
                                               staging_.erase(it);
                                               rings_[process].free(offset);
                                               pools_[process].release(slot);
                                               rt_.devices().free_event(ev);
                                               ipc_try_start(process);
                                             }});
                        rt_.submit_at(ctx.now(), target.stream,
                                      device::StreamOp{device::HostCallback{
                                          dst_pe, [this, rec, target, m]() mutable {
                                            finish(rec, std::move(m), target);
                                          }}});
                      });
      });
}

void Comm::send_inter_node(std::uint64_t rec, EntryMessage msg, SimTime& cursor) {
  cursor += cfg_.registration_cost_us;
  ++registrations_;
  const auto src_node = table_.at(*msg.src).node;
  const auto dst_loc = table_.at(msg.dest);
  rt_.engine().schedule_at(
      cursor + cfg_.latency_us, rt_.pe_entity(dst_loc.pe), "rdma_control",
      [this, rec, src_node, dst_loc, m = std::move(msg)]() mutable {
        rt_.post_task(dst_loc.pe, "rdma_get",
                      [this, rec, src_node, dst_loc,
                       m = std::move(m)](runtime::HandlerContext& ctx) mutable {
                        const auto target = checked_target(rt_, m);
                        ctx.charge(rt_.config().send_overhead_us);
                        rt_.engine().schedule_at(
                            ctx.now(), rt_.pe_entity(dst_loc.pe), "rdma_issue",
                            [this, rec, src_node, dst_loc, target, m = std::move(m)]() mutable {
                              auto& link = link_between(src_node, dst_loc.node);
                              const SimTime start =
                                  std::max(rt_.engine().now() + cfg_.latency_us, link.free_at);
                              const auto slice = *m.device;
                              const SimTime body = start + cfg_.message_gap_us;
                              link.free_at = body + cfg_.wire_time(slice.bytes);
                              ++link.transfers;
                              records_[rec].staged = start;
                              const auto chunks = (slice.bytes + cfg_.chunk_size - 1) / cfg_.chunk_size;
                              for (std::uint64_t i = 0; i < chunks; ++i) {
                                const auto lo = i * cfg_.chunk_size;
                                const auto hi = std::min(slice.bytes, lo + cfg_.chunk_size);
                                const bool last = i + 1 == chunks;
                                std::function<void()> land = [this, slice, target, lo, hi] {
                                  const auto src = rt_.buffer(slice.buffer).bytes();
                                  auto dst = rt_.buffer(target.buffer).bytes();
                                  std::memmove(dst.data() + target.offset + lo,
                                               src.data() + slice.offset + lo, hi - lo);
                                };
                                if (last) {
                                  land = [this, rec, target, land, m]() mutable {
                                    land();
                                    finish(rec, std::move(m), target);
                                    rt_.engine().schedule(cfg_.latency_us, 0, "rdma_ack",
                                                          [this] { --registrations_; });
                                  };
                                }
                                rt_.engine().schedule_at(body + cfg_.wire_time(hi),
                                                         rt_.pe_entity(dst_loc.pe), "rdma_chunk",
                                                         std::move(land));
                              }
                            });
                      });
      });
}

void Comm::write_transfer_log(std::ostream& os) const {
  os << "transfer_id,path,bytes,send_us,staged_us,delivered_us\n";
  for (const auto& r : records_) {
    os << r.id << ',' << path_name(r.path) << ',' << r.bytes << ','
       << util::format_double(r.send) << ',' << util::format_double(r.staged) << ','
       << util::format_double(r.delivered) << '\n';
  }
}

}  // namespace odsim::comm
