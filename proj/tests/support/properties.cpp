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

#include "properties.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <vector>

#include "odsim/comm/comm.hpp"
#include "odsim/device/device.hpp"
#include "odsim/runtime/runtime.hpp"
#include "odsim/sim/engine.hpp"

namespace odsim::props {

namespace {

template <typename... Args>
std::string fail(int round, const Args&... parts) {
  std::ostringstream os;
  os << "round " << round << ": ";
  (os << ... << parts);
  return os.str();
}

struct RefEvent {
  double time;
  std::uint64_t seq;
  int node;
};

std::vector<int> reference_order(const std::vector<std::vector<std::pair<int, int>>>& children,
                                 const std::vector<std::pair<int, int>>& roots) {
  std::vector<RefEvent> pending;
  std::uint64_t seq = 0;
  for (auto [node, t] : roots) pending.push_back({double(t), seq++, node});
  std::vector<int> order;
  while (!pending.empty()) {
    auto it = std::min_element(pending.begin(), pending.end(), [](auto& a, auto& b) {
      return a.time != b.time ? a.time < b.time : a.seq < b.seq;
    });
    RefEvent ev = *it;
    pending.erase(it);
    order.push_back(ev.node);
    for (auto [child, d] : children[ev.node]) pending.push_back({ev.time + d, seq++, child});
  }
  return order;
}

class OnePe : public device::HostSink {
 public:
  explicit OnePe(sim::Engine& e) : entity_(e.register_entity("pe0")) {}
  bool valid_pe(device::PeId pe) const override { return pe == 0; }
  sim::EntityId pe_entity(device::PeId) const override { return entity_; }

 private:
  sim::EntityId entity_;
};

using runtime::HandlerContext;
using runtime::EntryMessage;
using Handler = std::function<void(HandlerContext&, const EntryMessage&)>;

class Endpoint : public runtime::Chare {
 public:
  Endpoint(runtime::Runtime& rt, Handler fn) : rt_(rt), fn_(std::move(fn)) {}
  void receive(HandlerContext& ctx, const EntryMessage& msg) override { fn_(ctx, msg); }
  runtime::PostTarget post(const EntryMessage& msg) override {
    const auto buf = rt_.allocate_buffer(gpu(), msg.device->bytes + 16);
    return runtime::PostTarget{buf, 8u, stream()};
  }

 private:
  runtime::Runtime& rt_;
  Handler fn_;
};

}  // namespace

std::string engine_dag_order(int rounds, std::uint32_t seed) {
  std::mt19937 rng(seed);
  for (int round = 0; round < rounds; ++round) {
    const int n = 1 + static_cast<int>(rng() % 20);
    std::vector<std::vector<std::pair<int, int>>> children(n);
    std::vector<std::pair<int, int>> roots;
    for (int v = 0; v < n; ++v) {
      const int delay = static_cast<int>(rng() % 4);
      if (v == 0 || rng() % 3 == 0) {
        roots.emplace_back(v, delay);
      } else {
        children[rng() % v].emplace_back(v, delay);
      }
    }
    sim::Engine e;
    std::vector<int> order;
    std::function<void(int)> fire = [&](int v) {
      order.push_back(v);
      for (auto [c, d] : children[v]) e.schedule(d, 0, "node", [&, c] { fire(c); });
    };
    for (auto [v, t] : roots) e.schedule(t, 0, "root", [&, v] { fire(v); });
    e.run_until_quiescent();
    if (order != reference_order(children, roots)) return fail(round, "firing order differs");
  }
  return {};
}

std::string device_workloads(int rounds, std::uint32_t seed) {
  using namespace device;
  std::mt19937 rng(seed);
  for (int round = 0; round < rounds; ++round) {
    const auto policy = rng() % 2 ? SharingPolicy::Concurrent : SharingPolicy::TimeSliced;
    const int cap = 4 + static_cast<int>(rng() % 60);
    sim::Engine engine;
    OnePe host(engine);
    DeviceModel dev(engine, CostModel{}, &host);
    dev.add_device(DeviceSpec{cap, policy});
    std::vector<OpRecord> recs;
    dev.add_observer([&](const OpRecord& r) { recs.push_back(r); });
    auto at = [&](double t, StreamId s, StreamOp op) {
      engine.schedule_at(t, 0, "submit", [&dev, s, o = std::move(op)]() mutable {
        dev.submit(s, std::move(o));
      });
    };
    const int nstreams = 1 + static_cast<int>(rng() % 6);
    std::vector<StreamId> streams;
    for (int i = 0; i < nstreams; ++i) streams.push_back(dev.create_stream(0, rng() % 3));
    auto flag = dev.create_flag();
    const int nops = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < nops; ++i) {
      const auto s = streams[rng() % streams.size()];
      const double t = static_cast<double>(rng() % 200);
      switch (rng() % 5) {
        case 0: at(t, s, StreamOp{CopyD2D{rng() % 100000}}); break;
        case 1: at(t, s, StreamOp{WaitHostFlag{flag}}); break;
        default:
          at(t, s, StreamOp{Kernel{rng() % 40000, 1 + static_cast<std::uint32_t>(rng() % cap)}});
      }
    }
    engine.schedule_at(250, 0, "flag", [&] { dev.set_host_flag(flag); });
    engine.run_until_quiescent();
    if (!dev.quiescent()) return fail(round, "device not quiescent");
    if (recs.size() != static_cast<std::size_t>(nops)) return fail(round, "ops lost");

    std::map<StreamId, std::vector<OpRecord>> by_stream;
    for (const auto& r : recs) by_stream[r.stream].push_back(r);
    for (auto& [s, v] : by_stream) {
      std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.seq < b.seq; });
      for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i - 1].complete > v[i].complete) return fail(round, "FIFO violated on stream ", s);
      }
    }
    for (const auto& probe : recs) {
      if (probe.type != OpType::Kernel) continue;
      int in_use = 0;
      for (const auto& r : recs) {
        if (r.type != OpType::Kernel) continue;
        if (r.start <= probe.start && probe.start < r.complete) {
          in_use += static_cast<int>(r.sm_request);
          if (policy == SharingPolicy::TimeSliced && r.owner != probe.owner) {
            return fail(round, "mixed residency under time slicing");
          }
        }
      }
      if (in_use > cap) return fail(round, "SM capacity exceeded at t=", probe.start);
    }
  }
  return {};
}

std::string transfer_storms(int rounds, std::uint32_t seed) {
  using namespace runtime;
  std::mt19937 rng(seed);
  for (int round = 0; round < rounds; ++round) {
    const int nodes = 1 + static_cast<int>(rng() % 2);
    const int gpus = 1 + static_cast<int>(rng() % 2);
    const int procs = 1 + static_cast<int>(rng() % 3);
    const int pes = 1 + static_cast<int>(rng() % 2);
    RuntimeConfig cfg;
    cfg.topology = build_topology(nodes, gpus, procs, pes);
    cfg.network.ring_capacity = 200'000 + rng() % 300'000;
    cfg.network.pool_size = 1 + rng() % 4;
    cfg.network.chunk_size = 10'000 + rng() % 200'000;
    cfg.network.message_gap_us = static_cast<double>(rng() % 20);
    const int odf = 1 + static_cast<int>(rng() % 4);
    const int nchares = odf * nodes * gpus;
    std::mt19937 plan(rng());

    Runtime rt(cfg);
    CollectionId id = 0;
    std::vector<BufferId> src;
    Handler fn = [&](HandlerContext& ctx, const EntryMessage& m) {
      if (m.method != 0) {
        ctx.compute(0.25);
        return;
      }
      const int me = ctx.self().ref().index;
      const int sends = 1 + static_cast<int>(plan() % 6);
      for (int k = 0; k < sends; ++k) {
        const ChareRef dst{id, static_cast<int>(plan() % static_cast<unsigned>(nchares))};
        const std::size_t bytes = plan() % 4 == 0 ? 0 : 1 + plan() % 150'000;
        const std::size_t off = plan() % 1000;
        if (plan() % 5 == 0) {
          ctx.send(dst, 1, {k});
        } else {
          ctx.send_device(dst, 1, {k}, DeviceSlice{src[static_cast<std::size_t>(me)], off, bytes});
        }
      }
    };
    id = rt.create_collection("ep", Dims{1, nchares}, odf,
                              [&](int) { return std::make_unique<Endpoint>(rt, fn); });
    for (int i = 0; i < nchares; ++i) {
      auto b = rt.allocate_buffer(rt.chare({id, i}).gpu(), 200'000);
      auto bytes = rt.buffer(b).bytes();
      for (std::size_t k = 0; k < bytes.size(); ++k) {
        bytes[k] = static_cast<std::byte>((k * 131 + static_cast<std::size_t>(i) * 17) & 0xff);
      }
      src.push_back(b);
    }
    bool safe = true;
    rt.comm().add_probe([&](const comm::CommProbe& p) {
      std::uint64_t end = 0, total = 0;
      for (auto [off, len] : p.ring->extents()) {
        if (off < end) safe = false;
        end = off + len;
        total += len;
      }
      if (end > p.ring->capacity() || total != p.ring->in_use()) safe = false;
      if (p.pool->in_use() > p.pool->size()) safe = false;
    });
    for (int i = 0; i < nchares; ++i) rt.inject({id, i}, 0, {}, static_cast<double>(rng() % 50));
    rt.run();
    if (!safe) return fail(round, "ring or pool invariant broken");
    const auto& comm = rt.comm();
    for (const auto& rec : comm.transfers()) {
      if (rec.delivered < rec.staged || rec.staged < rec.send) {
        return fail(round, "transfer ", rec.id, " times out of order");
      }
      if (rec.src_digest != rec.dst_digest) return fail(round, "transfer ", rec.id, " corrupted");
      if (rec.path != comm::select_transport(rec.src, rec.dst, comm.table())) {
        return fail(round, "transfer ", rec.id, " took the wrong path");
      }
    }
    for (int p = 0; p < cfg.topology.total_processes(); ++p) {
      if (comm.ring(static_cast<ProcessId>(p)).in_use() != 0 ||
          comm.pool(static_cast<ProcessId>(p)).in_use() != 0) {
        return fail(round, "process ", p, " still holds staging space");
      }
    }
    if (comm.outstanding_registrations() != 0) return fail(round, "registrations leaked");
    const auto st = rt.stats();
    if (st.messages_sent != st.messages_delivered) {
      return fail(round, st.messages_sent, " sent but ", st.messages_delivered, " delivered");
    }
  }
  return {};
}

}  // namespace odsim::props
