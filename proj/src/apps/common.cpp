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

#include "odsim/errors.hpp"

namespace odsim::apps::detail {

void attach(runtime::Runtime& rt, const RunHooks& hooks) {
  if (hooks.event_trace != nullptr) rt.engine().trace_to(*hooks.event_trace);
}

AppResult collect(runtime::Runtime& rt, const RunHooks& hooks) {
  AppResult res;
  res.stats = rt.stats();
  const auto& comm = rt.comm();
  res.transfers_intra_process = comm.transfers_on(comm::Path::IntraProcess);
  res.transfers_intra_node_ipc = comm.transfers_on(comm::Path::IntraNodeIpc);
  res.transfers_inter_node = comm.transfers_on(comm::Path::InterNode);
  if (hooks.transfer_log != nullptr) comm.write_transfer_log(*hooks.transfer_log);
  return res;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace odsim::apps::detail
