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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "odsim/device/device.hpp"

namespace odsim::runtime {

using sim::SimTime;
using CollectionId = std::uint32_t;
using BufferId = std::uint32_t;

struct ChareRef {
  CollectionId collection = 0;
  int index = 0;
  auto operator<=>(const ChareRef&) const = default;
};

/// Region of a device buffer.
struct DeviceSlice {
  BufferId buffer = 0;
  std::size_t offset = 0;
  std::size_t bytes = 0;
};

/// Where the receiver wants an incoming device payload to land, and which of
/// its streams should carry the copy.
struct PostTarget {
  BufferId buffer = 0;
  std::size_t offset = 0;
  device::StreamId stream = 0;
};

/// Asynchronous method invocation. Device payloads name a slice of a buffer
/// on the sender's GPU.
struct EntryMessage {
  ChareRef dest;
  std::optional<ChareRef> src;
  int method = 0;
  std::vector<std::int64_t> args;
  std::vector<std::byte> inline_bytes;
  std::optional<DeviceSlice> device;
  SimTime send_time = 0.0;
  std::uint64_t pair_seq = 0;  // per (src, dest) send counter
};

/// Host-resident stand-in for a device allocation.
class DeviceBuffer {
 public:
  DeviceBuffer(BufferId id, device::DeviceId device, std::size_t bytes)
      : id_(id), device_(device), data_(bytes) {}

  BufferId id() const noexcept { return id_; }
  device::DeviceId device() const noexcept { return device_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<std::byte> bytes() noexcept { return data_; }
  std::span<const std::byte> bytes() const noexcept { return data_; }

  std::span<double> as_doubles() noexcept {
    return {reinterpret_cast<double*>(data_.data()), data_.size() / sizeof(double)};
  }
  std::span<const double> as_doubles() const noexcept {
    return {reinterpret_cast<const double*>(data_.data()), data_.size() / sizeof(double)};
  }

 private:
  BufferId id_;
  device::DeviceId device_;
  std::vector<std::byte> data_;
};

}  // namespace odsim::runtime
