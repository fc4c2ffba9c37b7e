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

#include "odsim/sim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "odsim/errors.hpp"
#include "odsim/util/format.hpp"

namespace odsim::sim {

Engine::Engine(std::uint64_t max_events) : max_events_(max_events) {
  register_entity("engine");
}

EntityId Engine::register_entity(std::string name) {
  names_.push_back(std::move(name));
  per_entity_.push_back(0);
  return static_cast<EntityId>(names_.size() - 1);
}

const std::string& Engine::entity_name(EntityId id) const {
  if (id >= names_.size()) throw ArgumentError("unknown entity id " + std::to_string(id));
  return names_[id];
}

EventHandle Engine::schedule(SimTime delay, EntityId target, std::string_view action, Action fn) {
  if (!(delay >= 0.0) || !std::isfinite(delay)) {
    std::ostringstream msg;
    msg << "schedule: delay must be finite and >= 0, got " << delay;
    throw ArgumentError(msg.str());
  }
  return schedule_at(now_ + delay, target, action, std::move(fn));
}

EventHandle Engine::schedule_at(SimTime when, EntityId target, std::string_view action, Action fn) {
  if (!std::isfinite(when) || when < now_) {
    std::ostringstream msg;
    msg << "schedule_at: time " << when << " precedes now " << now_;
    throw ArgumentError(msg.str());
  }
  if (target >= names_.size()) throw ArgumentError("schedule: unknown target entity");
  const std::uint64_t seq = next_seq_++;
  heap_.push_back(Pending{when, seq, target, action, std::move(fn)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return EventHandle{seq};
}

bool Engine::cancel(EventHandle handle) {
  const bool pending = std::any_of(heap_.begin(), heap_.end(),
                                   [&](const Pending& p) { return p.seq == handle.seq; });
  if (!pending) return false;
  return cancelled_.insert(handle.seq).second;
}

SimTime Engine::run_until_quiescent() {
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Pending ev = std::move(heap_.back());
    heap_.pop_back();
    if (auto it = cancelled_.find(ev.seq); it != cancelled_.end()) {
      cancelled_.erase(it);
      continue;
    }
    if (processed_ >= max_events_) {
      const auto hot = std::max_element(per_entity_.begin(), per_entity_.end());
      const auto hot_id = static_cast<std::size_t>(hot - per_entity_.begin());
      throw LivelockError("event limit " + std::to_string(max_events_) +
                          " exceeded; hottest entity '" + names_[hot_id] + "' with " +
                          std::to_string(*hot) + " events");
    }
    now_ = ev.time;
    ++processed_;
    ++per_entity_[ev.target];
    if (trace_) trace_(TraceRecord{ev.time, ev.seq, ev.target, ev.action});
    if (ev.fn) ev.fn();
  }
  return now_;
}

void Engine::trace_to(std::ostream& os) {
  set_trace_sink([this, &os](const TraceRecord& r) {
    os << util::format_double(r.time) << '\t' << r.seq << '\t' << names_[r.target] << '\t'
       << r.action << '\n';
  });
}

}  // namespace odsim::sim
