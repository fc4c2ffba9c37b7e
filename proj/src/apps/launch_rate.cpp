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

#include "common.hpp"

namespace odsim::apps {
namespace {

using runtime::EntryMessage;
using runtime::HandlerContext;

class Firer : public runtime::Chare {
 public:
  Firer(double window_us, std::uint32_t sm) : window_us_(window_us), sm_(sm) {}

  void receive(HandlerContext& ctx, const EntryMessage&) override {
    if (ctx.now() >= window_us_) return;
    ctx.launch_kernel(0, sm_);
    ctx.callback(0);
  }

 private:
  double window_us_;
  std::uint32_t sm_;
};

}  // namespace

AppResult bench_launch_rate(const RuntimeConfig& base, const LaunchRateConfig& cfg,
                            const RunHooks& hooks) {
  detail::require(cfg.pes >= 1, "topology.pes_per_process must be >= 1");
  detail::require(cfg.chares_per_pe >= 1, "app.chares_per_pe must be >= 1");
  detail::require(cfg.window_us > 0.0, "app.window_us must be > 0");

  RuntimeConfig rc = base;
  rc.topology = runtime::build_topology(1, 1, 1, cfg.pes);
  runtime::Runtime rt(rc);
  detail::attach(rt, hooks);

  std::uint64_t in_window = 0;
  rt.devices().add_observer([&](const device::OpRecord& r) {
    if (r.type == device::OpType::Kernel && r.complete <= cfg.window_us) ++in_window;
  });

  const int n = cfg.pes * cfg.chares_per_pe;
  const auto sm = static_cast<std::uint32_t>(rt.devices().sm_capacity(0));
  const auto id = rt.create_collection("firers", runtime::Dims{1, n}, n, [&](int) {
    return std::make_unique<Firer>(cfg.window_us, sm);
  });
  for (int i = 0; i < n; ++i) rt.inject({id, i}, 0, {}, 0.0);
  rt.run();

  auto res = detail::collect(rt, hooks);
  res.kernels_per_second = static_cast<double>(in_window) * 1e6 / cfg.window_us;
  return res;
}

}  // namespace odsim::apps
