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

#include <stdexcept>
#include <string>

namespace odsim {

// Tag base shared by every simulator error, so callers can tell them apart
// from exceptions raised by application code.
struct Error {
  virtual ~Error() = default;
};

// Bad argument to an API call (negative delay, out-of-range id).
struct ArgumentError : std::invalid_argument, Error {
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration: topology counts, cost model, unknown config keys.
struct ConfigError : std::runtime_error, Error {
  using std::runtime_error::runtime_error;
};

struct RoutingError : std::runtime_error, Error {
  using std::runtime_error::runtime_error;
};

// Violation of the communication protocol state machines.
struct ProtocolError : std::runtime_error, Error {
  using std::runtime_error::runtime_error;
};

// A payload does not fit its destination or staging area.
struct SizeError : std::runtime_error, Error {
  using std::runtime_error::runtime_error;
};

struct LivelockError : std::runtime_error, Error {
  using std::runtime_error::runtime_error;
};

// An application handler threw; carries chare identity and virtual time.
struct HandlerError : std::runtime_error, Error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error, Error {
  using std::runtime_error::runtime_error;
};

// One point of a parameter sweep failed; the message names the point.
struct SweepError : std::runtime_error, Error {
  using std::runtime_error::runtime_error;
};

}  // namespace odsim
