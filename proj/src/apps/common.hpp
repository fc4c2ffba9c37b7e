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

#include "odsim/apps/apps.hpp"

namespace odsim::apps::detail {

void attach(runtime::Runtime& rt, const RunHooks& hooks);
/// Fills stats and transfer counters, and writes the transfer log if hooked.
AppResult collect(runtime::Runtime& rt, const RunHooks& hooks);

void require(bool ok, const std::string& what);

}  // namespace odsim::apps::detail
