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

#include "odsim/runtime/runtime.hpp"

#include <algorithm>
#include <sstream>

#include "odsim/errors.hpp"
#include "odsim/util/format.hpp"

namespace odsim::runtime {

PostTarget Chare::post(const EntryMessage& msg) {
  throw ProtocolError("chare " + std::to_string(ref_.collection) + "[" +
                      std::to_string(ref_.index) + "] does not accept device payloads (method " +
                      std::to_string(msg.method) + ")");
}

Chare& HandlerContext::self() const {
  if (self_ == nullptr) throw ProtocolError("runtime task has no chare");
  return *self_;
}

void HandlerContext::compute(double us) {
  if (!(us >= 0.0)) throw ArgumentError("compute: negative duration");
  cursor_ += us;
}

void HandlerContext::enqueue(device::StreamId stream, device::StreamOp op) {
  auto& dev = rt_.devices();
  if (dev.owner_of(stream) != rt_.topology().process_of(pe_)) {
    throw ArgumentError("PE " + std::to_string(pe_) + " cannot enqueue on stream " +
                        std::to_string(stream) + " owned by another process");
  }
  dev.validate(stream, op);
  cursor_ += dev.cost().launch_host_us;
  rt_.submit_at(cursor_, stream, std::move(op));
}

void HandlerContext::launch_kernel(std::uint64_t work_items, std::uint32_t sm_request,
                                   std::function<void()> body) {
  enqueue(self().stream(),
          device::StreamOp{device::Kernel{work_items, sm_request}, std::move(body)});
}

void HandlerContext::callback(int method, std::vector<std::int64_t> args) {
  Chare& me = self();
  EntryMessage msg;
  msg.dest = me.ref();
  msg.method = method;
  msg.args = std::move(args);
  msg.send_time = cursor_;
  Runtime* rt = &rt_;
  rt_.count_send();
  enqueue(me.stream(), device::StreamOp{device::HostCallback{
                           me.pe(), [rt, m = std::move(msg)]() mutable { rt->deliver(std::move(m)); }}});
}

void HandlerContext::send(ChareRef dest, int method, std::vector<std::int64_t> args,
                          std::vector<std::byte> inline_bytes) {
  Chare& me = self();
  cursor_ += rt_.config().send_overhead_us;
  EntryMessage msg;
  msg.dest = dest;
  msg.src = me.ref();
  msg.method = method;
  msg.args = std::move(args);
  msg.inline_bytes = std::move(inline_bytes);
  msg.send_time = cursor_;
  msg.pair_seq = rt_.next_pair_seq(me.ref(), dest);
  rt_.count_send();
  rt_.comm().route(std::move(msg), pe_, me.stream(), cursor_);
}

void HandlerContext::send_device(ChareRef dest, int method, std::vector<std::int64_t> args,
                                 DeviceSlice slice) {
  Chare& me = self();
  const DeviceBuffer& buf = rt_.buffer(slice.buffer);
  if (buf.device() != me.gpu()) {
    throw ArgumentError("send_device: buffer " + std::to_string(slice.buffer) +
                        " is not on the sender's GPU");
  }
  if (slice.offset + slice.bytes > buf.size()) {
    throw ArgumentError("send_device: slice exceeds buffer " + std::to_string(slice.buffer));
  }
  cursor_ += rt_.config().send_overhead_us;
  EntryMessage msg;
  msg.dest = dest;
  msg.src = me.ref();
  msg.method = method;
  msg.args = std::move(args);
  msg.device = slice;
  msg.send_time = cursor_;
  msg.pair_seq = rt_.next_pair_seq(me.ref(), dest);
  rt_.count_send();
  rt_.comm().route(std::move(msg), pe_, me.stream(), cursor_);
}

Runtime::Runtime(RuntimeConfig cfg) : cfg_(std::move(cfg)), engine_(cfg_.max_events) {
  cfg_.topology.validate();
  cfg_.cost.validate();
  cfg_.network.validate();
  if (!(cfg_.send_overhead_us >= 0.0)) throw ConfigError("runtime.send_overhead_us must be >= 0");
  devices_ = std::make_unique<device::DeviceModel>(engine_, cfg_.cost, this);
  for (int g = 0; g < cfg_.topology.total_gpus(); ++g) devices_->add_device(cfg_.device);
  pes_.resize(static_cast<std::size_t>(cfg_.topology.total_pes()));
  for (std::size_t p = 0; p < pes_.size(); ++p) {
    pes_[p].entity = engine_.register_entity("pe" + std::to_string(p));
  }
  comm_ = std::make_unique<comm::Comm>(*this, cfg_.network);
  comm_->setup();
}

Runtime::~Runtime() = default;

CollectionId Runtime::create_collection(std::string name, Dims dims, int odf,
                                        const ChareFactory& make) {
  const auto map = block_map(dims, cfg_.topology);
  return create_collection(std::move(name), dims, odf, make,
                           [&map](int i) { return map[static_cast<std::size_t>(i)]; });
}

CollectionId Runtime::create_collection(std::string name, Dims dims, int odf,
                                        const ChareFactory& make,
                                        const std::function<PeId(int)>& mapping) {
  if (comm_->table().frozen()) throw ConfigError("collections must be created before run()");
  if (dims.rows < 1 || dims.cols < 1) throw ConfigError(name + ": extents must be >= 1");
  const int gpus = cfg_.topology.total_gpus();
  if (dims.size() % gpus != 0) {
    throw ConfigError(name + ": " + std::to_string(dims.size()) + " chares over " +
                      std::to_string(gpus) + " GPUs gives a non-integral ODF");
  }
  if (odf < 1 || dims.size() != odf * gpus) {
    throw ConfigError(name + ": extents hold " + std::to_string(dims.size()) +
                      " chares but odf " + std::to_string(odf) + " x " + std::to_string(gpus) +
                      " GPUs requires " + std::to_string(odf * gpus));
  }
  const auto id = static_cast<CollectionId>(collections_.size());
  Collection coll{std::move(name), dims, odf, {}};
  coll.chares.reserve(static_cast<std::size_t>(dims.size()));
  for (int i = 0; i < dims.size(); ++i) {
    const PeId pe = mapping(i);
    if (!valid_pe(pe)) throw ConfigError(coll.name + ": mapping sends chare to invalid PE");
    auto chare = make(i);
    chare->ref_ = ChareRef{id, i};
    chare->pe_ = pe;
    chare->process_ = cfg_.topology.process_of(pe);
    chare->gpu_ = cfg_.topology.gpu_of(pe);
    chare->stream_ = devices_->create_stream(chare->gpu_, chare->process_);
    comm_->table().insert(chare->ref_, comm::Location{cfg_.topology.node_of(pe), chare->process_, pe});
    coll.chares.push_back(std::move(chare));
  }
  collections_.push_back(std::move(coll));
  return id;
}

Chare& Runtime::chare(ChareRef ref) const {
  if (ref.collection >= collections_.size()) throw RoutingError("unknown collection");
  const auto& c = collections_[ref.collection];
  if (ref.index < 0 || ref.index >= static_cast<int>(c.chares.size())) {
    throw RoutingError(c.name + ": no chare with index " + std::to_string(ref.index));
  }
  return *c.chares[static_cast<std::size_t>(ref.index)];
}

BufferId Runtime::allocate_buffer(DeviceId gpu, std::size_t bytes) {
  if (gpu >= devices_->device_count()) throw ArgumentError("allocate_buffer: unknown GPU");
  const auto id = static_cast<BufferId>(buffers_.size());
  buffers_.emplace_back(id, gpu, bytes);
  return id;
}

DeviceBuffer& Runtime::buffer(BufferId id) {
  if (id >= buffers_.size()) throw ArgumentError("unknown buffer " + std::to_string(id));
  return buffers_[id];
}

const DeviceBuffer& Runtime::buffer(BufferId id) const {
  if (id >= buffers_.size()) throw ArgumentError("unknown buffer " + std::to_string(id));
  return buffers_[id];
}

void Runtime::inject(ChareRef dest, int method, std::vector<std::int64_t> args, SimTime at) {
  chare(dest);
  EntryMessage msg;
  msg.dest = dest;
  msg.method = method;
  msg.args = std::move(args);
  const SimTime when = at < 0.0 ? engine_.now() : at;
  msg.send_time = when;
  ++sent_;
  engine_.schedule_at(when, 0, "inject", [this, m = std::move(msg)]() mutable { deliver(std::move(m)); });
}

void Runtime::submit_at(SimTime when, device::StreamId stream, device::StreamOp op) {
  engine_.schedule_at(when, 0, "enqueue", [this, stream, o = std::move(op)]() mutable {
    devices_->submit(stream, std::move(o));
  });
}

std::uint64_t Runtime::next_pair_seq(ChareRef src, ChareRef dst) {
  return pair_send_seq_[{src, dst}]++;
}

PostTarget Runtime::post(const EntryMessage& msg) { return chare(msg.dest).post(msg); }

void Runtime::deliver(EntryMessage msg) {
  if (!msg.src) {
    hand_to_pe(std::move(msg));
    return;
  }
  auto& r = pair_recv_[{*msg.src, msg.dest}];
  r.held.emplace(msg.pair_seq, std::move(msg));
  for (auto it = r.held.find(r.next); it != r.held.end(); it = r.held.find(r.next)) {
    EntryMessage ready = std::move(it->second);
    r.held.erase(it);
    ++r.next;
    hand_to_pe(std::move(ready));
  }
}

void Runtime::hand_to_pe(EntryMessage msg) {
  ++delivered_;
  Chare* target = &chare(msg.dest);
  enqueue_task(target->pe(),
               Task{"entry",
                    [target, m = std::move(msg)](HandlerContext& ctx) { target->receive(ctx, m); },
                    target});
}

void Runtime::post_task(PeId pe, std::string_view label,
                        std::function<void(HandlerContext&)> task) {
  enqueue_task(pe, Task{label, std::move(task), nullptr});
}

void Runtime::enqueue_task(PeId pe, Task task) {
  auto& p = pes_.at(pe);
  p.queue.push_back(std::move(task));
  if (!p.stepping) {
    p.stepping = true;
    engine_.schedule_at(std::max(engine_.now(), p.busy_until), p.entity, "pe_step",
                        [this, pe] { step(pe); });
  }
}

void Runtime::step(PeId pe) {
  auto& p = pes_[pe];
  Task task = std::move(p.queue.front());
  p.queue.pop_front();
  const SimTime start = engine_.now();
  HandlerContext ctx(*this, pe, task.chare, start);
  try {
    task.run(ctx);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    std::ostringstream what;
    what << "handler failed on pe" << pe;
    if (task.chare != nullptr) {
      const auto ref = task.chare->ref();
      what << " in " << collections_[ref.collection].name << "[" << ref.index << "]";
    }
    what << " at t=" << util::format_double(start) << "us: " << e.what();
    throw HandlerError(what.str());
  }
  const SimTime end = ctx.now();
  p.busy_total += end - start;
  p.busy_until = end;
  if (!busy_observers_.empty()) {
    BusyInterval iv{pe, std::nullopt, start, end};
    if (task.chare != nullptr) iv.chare = task.chare->ref();
    for (const auto& fn : busy_observers_) fn(iv);
  }
  if (p.queue.empty()) {
    p.stepping = false;
  } else {
    engine_.schedule_at(end, p.entity, "pe_step", [this, pe] { step(pe); });
  }
}

SimTime Runtime::run() {
  comm_->table().freeze();
  engine_.run_until_quiescent();
  const bool queues_empty =
      std::all_of(pes_.begin(), pes_.end(), [](const Pe& p) { return p.queue.empty(); });
  const bool held_empty = std::all_of(pair_recv_.begin(), pair_recv_.end(),
                                      [](const auto& kv) { return kv.second.held.empty(); });
  if (!queues_empty || !held_empty || !devices_->quiescent()) {
    throw ProtocolError("event queue drained with work outstanding (blocked stream or lost message)");
  }
  return stats().end_time;
}

RuntimeStats Runtime::stats() const {
  RuntimeStats s;
  s.end_time = engine_.now();
  double busy = 0.0;
  for (const auto& p : pes_) {
    s.end_time = std::max(s.end_time, p.busy_until);
    busy += p.busy_total;
  }
  s.messages_sent = sent_;
  s.messages_delivered = delivered_;
  s.kernels_launched = devices_->kernels_launched();
  if (s.end_time > 0.0) {
    s.pe_busy_fraction = busy / (static_cast<double>(pes_.size()) * s.end_time);
  }
  s.mean_sm_utilization = devices_->mean_sm_utilization(s.end_time);
  return s;
}

}  // namespace odsim::runtime
