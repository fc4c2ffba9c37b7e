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

AppResult bench_overlap(const RuntimeConfig& base, const OverlapConfig& cfg, const RunHooks& hooks) {
  detail::require(cfg.odf >= 1, "app.odf must be >= 1");
  detail::require(cfg.total_work_items % static_cast<std::uint64_t>(cfg.odf) == 0,
                  "app.total_work_items must be divisible by app.odf");
  runtime::Runtime rt(base);
  detail::attach(rt, hooks);
  auto& dev = rt.devices();

  sim::SimTime last = 0.0;
  dev.add_observer([&last](const device::OpRecord& r) {
    if (r.type == device::OpType::Kernel) last = std::max(last, r.complete);
  });

  const auto flag = dev.create_flag();
  const auto sm = static_cast<std::uint32_t>(dev.sm_capacity(0));
  const auto per_kernel = cfg.total_work_items / static_cast<std::uint64_t>(cfg.odf);
  for (int i = 0; i < cfg.odf; ++i) {
    const auto s = dev.create_stream(0, 0);
    dev.submit(s, device::StreamOp{device::WaitHostFlag{flag}});
    dev.submit(s, device::StreamOp{device::Kernel{per_kernel, sm}});
  }
  dev.set_host_flag(flag);
  rt.run();

  auto res = detail::collect(rt, hooks);
  res.completion_us = last;
  return res;
}

}  // namespace odsim::apps
