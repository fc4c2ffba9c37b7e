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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "odsim/apps/apps.hpp"
#include "odsim/runtime/runtime.hpp"

namespace odsim::cli {

enum class Kind { Int, UInt, Real, Bool, String };

struct KeySpec {
  std::string key;  // "section.name"
  Kind kind;
  std::string default_value;
  std::optional<double> min;  // inclusive lower bound for numeric keys
  bool positive = false;      // numeric keys that must be > 0
  std::vector<std::string> choices;
  std::string help;
};

/// Every accepted key, sorted by name. Defaults mirror the library structs.
const std::vector<KeySpec>& schema();
const KeySpec* find_key(std::string_view key);

/// One resolved sweep point: key -> canonical scalar value.
using Point = std::map<std::string, std::string>;

/// Resolved configuration. Each key holds one value, or several for a sweep.
class RunConfig {
 public:
  /// Every schema key at its default.
  RunConfig();

  /// Type-checks `raw` (scalar or "[a,b,...]") against the schema and stores
  /// it in canonical form. Throws ConfigError naming the key.
  void set(std::string_view key, std::string_view raw);
  const std::vector<std::string>& values(std::string_view key) const;
  const std::string& value(std::string_view key) const { return values(key).front(); }

  std::size_t run_count() const;
  /// Cartesian product over sorted keys; the last key varies fastest.
  std::vector<Point> expand() const;

  /// Sectioned key/value text that parse_config reads back to an equal config.
  std::string serialize() const;

  const std::map<std::string, std::vector<std::string>>& entries() const noexcept { return entries_; }
  bool operator==(const RunConfig&) const = default;

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

/// Applies `text` on top of `base`. Sections are "[name]"; keys are
/// "name = value" inside a section or fully qualified outside one.
/// '#' and ';' start comments.
RunConfig parse_config(std::string_view text, RunConfig base = {});

/// Applies "key=value" overrides in order.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& assignments);

runtime::RuntimeConfig runtime_config(const Point& p);
apps::AppParams app_params(const Point& p);

/// Keys echoed into result rows: everything except output.*.
bool echoed(std::string_view key);

}  // namespace odsim::cli
