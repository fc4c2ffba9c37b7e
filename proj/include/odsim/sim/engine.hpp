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
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace odsim::sim {

/// Virtual time in microseconds.
using SimTime = double;

using EntityId = std::uint32_t;

struct EventHandle {
  std::uint64_t seq = 0;
};

/// One processed event, as seen by trace observers.
struct TraceRecord {
  SimTime time;
  std::uint64_t seq;
  EntityId target;
  std::string_view action;
};

/// Deterministic discrete-event engine.
///
/// Events are totally ordered by (time, seq) where seq is a global counter
/// incremented on every schedule call. Equal-time events therefore fire in
/// the order they were scheduled, and repeated runs of the same model
/// produce identical traces.
class Engine {
 public:
  using Action = std::function<void()>;
  using TraceSink = std::function<void(const TraceRecord&)>;

  static constexpr std::uint64_t kDefaultMaxEvents = 100'000'000;

  explicit Engine(std::uint64_t max_events = kDefaultMaxEvents);

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Interns a printable entity name; the returned id is used as event target.
  EntityId register_entity(std::string name);
  const std::string& entity_name(EntityId id) const;

  /// Schedules `fn` at now() + delay. `action` must outlive the engine
  /// (string literals in practice). Throws ArgumentError on negative or
  /// non-finite delay.
  EventHandle schedule(SimTime delay, EntityId target, std::string_view action, Action fn);

  /// Schedules at an absolute time, which must not precede now().
  EventHandle schedule_at(SimTime when, EntityId target, std::string_view action, Action fn);

  /// Cancels a pending event. Returns false if it already fired or was cancelled.
  bool cancel(EventHandle handle);

  /// Processes events until none remain; returns the final clock.
  SimTime run_until_quiescent();

  SimTime now() const noexcept { return now_; }
  bool idle() const noexcept { return heap_.size() == cancelled_.size(); }
  std::uint64_t events_processed() const noexcept { return processed_; }
  std::uint64_t max_events() const noexcept { return max_events_; }
  void set_max_events(std::uint64_t n) noexcept { max_events_ = n; }

  void set_trace_sink(TraceSink sink) { trace_ = std::move(sink); }

  /// Writes `time_us seq target action` tab-separated lines to `os`.
  void trace_to(std::ostream& os);

 private:
  struct Pending {
    SimTime time;
    std::uint64_t seq;
    EntityId target;
    std::string_view action;
    Action fn;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const noexcept {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::vector<Pending> heap_;
  std::unordered_set<std::uint64_t> cancelled_;
  std::vector<std::string> names_;
  std::vector<std::uint64_t> per_entity_;
  TraceSink trace_;
  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
  std::uint64_t max_events_;
};

}  // namespace odsim::sim
