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

#include <algorithm>

#include "common.hpp"

namespace odsim::apps {
namespace {

using runtime::EntryMessage;
using runtime::HandlerContext;

enum Method { kStart, kReceive, kComputed };

class Sender : public runtime::Chare {
 public:
  Sender(int peer, runtime::BufferId buf, std::size_t bytes) : peer_(peer), buf_(buf), bytes_(bytes) {}

  void receive(HandlerContext& ctx, const EntryMessage&) override {
    ctx.send_device({ref().collection, peer_}, kReceive, {}, runtime::DeviceSlice{buf_, 0, bytes_});
  }

 private:
  int peer_;
  runtime::BufferId buf_;
  std::size_t bytes_;
};

class Receiver : public runtime::Chare {
 public:
  Receiver(bool with_compute, std::uint32_t sm) : with_compute_(with_compute), sm_(sm) {}

  void set_buffer(runtime::BufferId buf) { buf_ = buf; }

  runtime::PostTarget post(const EntryMessage&) override { return {buf_, 0, stream()}; }

  void receive(HandlerContext& ctx, const EntryMessage& msg) override {
    if (msg.method == kReceive) {
      delivered = ctx.now();
      finished = ctx.now();
      if (with_compute_) {
        ctx.launch_kernel(msg.device->bytes / sizeof(double), sm_);
        ctx.callback(kComputed);
      }
    } else {
      finished = ctx.now();
    }
  }

  sim::SimTime delivered = 0.0;
  sim::SimTime finished = 0.0;

 private:
  bool with_compute_;
  std::uint32_t sm_;
  runtime::BufferId buf_ = 0;
};

}  // namespace

AppResult bench_pipeline(const RuntimeConfig& base, const PipelineConfig& cfg,
                         const RunHooks& hooks) {
  detail::require(cfg.odf >= 1, "app.odf must be >= 1");
  detail::require(cfg.total_bytes > 0, "app.total_bytes must be > 0");
  detail::require(cfg.total_bytes % static_cast<std::uint64_t>(cfg.odf) == 0,
                  "app.total_bytes must be divisible by app.odf");

  // Two endpoints, one GPU per node; processes and PEs per GPU come from base.
  RuntimeConfig rc = base;
  const auto& bt = base.topology;
  rc.topology = runtime::build_topology(2, 1, bt.processes_per_gpu, bt.pes_per_process);
  runtime::Runtime rt(rc);
  detail::attach(rt, hooks);

  const int odf = cfg.odf;
  const auto bytes = static_cast<std::size_t>(cfg.total_bytes / static_cast<std::uint64_t>(odf));
  const auto sm = static_cast<std::uint32_t>(rt.devices().sm_capacity(0));
  const auto node = runtime::build_topology(1, 1, bt.processes_per_gpu, bt.pes_per_process);
  const auto node_map = runtime::block_map(runtime::Dims{1, odf}, node);
  const auto pes_per_node = static_cast<runtime::PeId>(node.total_pes());

  std::vector<runtime::BufferId> src(static_cast<std::size_t>(odf));
  for (int i = 0; i < odf; ++i) src[static_cast<std::size_t>(i)] = rt.allocate_buffer(0, bytes);
  for (auto b : src) {
    auto d = rt.buffer(b).as_doubles();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = static_cast<double>(k % 1024) * 0.5;
  }

  const auto id = rt.create_collection(
      "pairs", runtime::Dims{1, 2 * odf}, odf,
      [&](int i) -> std::unique_ptr<runtime::Chare> {
        if (i < odf) {
          return std::make_unique<Sender>(odf + i, src[static_cast<std::size_t>(i)], bytes);
        }
        return std::make_unique<Receiver>(cfg.with_compute, sm);
      },
      [&](int i) {
        const auto local = node_map[static_cast<std::size_t>(i % odf)];
        return i < odf ? local : pes_per_node + local;
      });
  for (int i = 0; i < odf; ++i) {
    auto& r = rt.chare_as<Receiver>({id, odf + i});
    r.set_buffer(rt.allocate_buffer(r.gpu(), bytes));
  }
  for (int i = 0; i < odf; ++i) rt.inject({id, i}, kStart, {}, 0.0);
  rt.run();

  auto res = detail::collect(rt, hooks);
  double comm = 0.0, total = 0.0;
  for (int i = 0; i < odf; ++i) {
    const auto& r = rt.chare_as<Receiver>({id, odf + i});
    comm = std::max(comm, r.delivered);
    total = std::max(total, r.finished);
  }
  res.comm_us = comm;
  res.total_us = total;
  return res;
}

}  // namespace odsim::apps
