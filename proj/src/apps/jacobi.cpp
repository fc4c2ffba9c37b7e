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
#include <array>
#include <cstdlib>
#include <cstring>
#include <map>
#include <optional>

#include "common.hpp"
#include "odsim/errors.hpp"
#include "odsim/simd/kernels.hpp"

namespace odsim::apps {
namespace {

using runtime::EntryMessage;
using runtime::HandlerContext;

enum Method { kStart, kPacked, kHalo, kDone };
enum Face { kNorth, kSouth, kWest, kEast };
constexpr std::array<int, 4> kOpposite{kSouth, kNorth, kEast, kWest};

double boundary_or_initial(int gi, int gj, int rows, int cols) {
  if (gi == 0) return 1.0;
  if (gi == rows + 1 || gj == 0 || gj == cols + 1) return 0.0;
  return jacobi_initial(gi - 1, gj - 1);
}

class JacobiChare : public runtime::Chare {
 public:
  JacobiChare(const JacobiConfig& cfg, int h, int w) : cfg_(cfg), h_(h), w_(w) {}

  void setup(runtime::Runtime& rt, int r, int c, std::array<std::optional<int>, 4> nb,
             std::uint32_t full_sm) {
    nb_ = nb;
    full_sm_ = full_sm;
    stride_ = static_cast<std::size_t>(w_) + 2;
    const std::size_t cells = stride_ * (static_cast<std::size_t>(h_) + 2);
    for (auto& t : tile_) {
      t = rt.buffer(rt.allocate_buffer(gpu(), cells * sizeof(double))).as_doubles().data();
      for (int li = 0; li < h_ + 2; ++li) {
        for (int lj = 0; lj < w_ + 2; ++lj) {
          t[static_cast<std::size_t>(li) * stride_ + static_cast<std::size_t>(lj)] =
              boundary_or_initial(r * h_ + li, c * w_ + lj, cfg_.grid_rows, cfg_.grid_cols);
        }
      }
    }
    for (int f = 0; f < 4; ++f) {
      if (!nb_[f]) continue;
      ++faces_;
      const auto bytes = strip(f) * sizeof(double);
      for (int p = 0; p < 2; ++p) {
        send_id_[f][p] = rt.allocate_buffer(gpu(), bytes);
        send_[f][p] = rt.buffer(send_id_[f][p]).as_doubles().data();
        recv_id_[f][p] = rt.allocate_buffer(gpu(), bytes);
        recv_[f][p] = rt.buffer(recv_id_[f][p]).as_doubles().data();
      }
    }
  }

  runtime::PostTarget post(const EntryMessage& msg) override {
    const auto k = msg.args.at(0);
    const auto face = msg.args.at(1);
    return {recv_id_[face][k % 2], 0, stream()};
  }

  void receive(HandlerContext& ctx, const EntryMessage& msg) override {
    switch (msg.method) {
      case kStart:
        ctx.compute(cfg_.host_compute_us);
        start(ctx, 0);
        break;
      case kPacked: {
        ctx.compute(cfg_.host_compute_us);
        const auto k = msg.args.at(0);
        for (int f = 0; f < 4; ++f) {
          if (!nb_[f]) continue;
          ctx.send_device({ref().collection, *nb_[f]}, kHalo, {k, kOpposite[f]},
                          runtime::DeviceSlice{send_id_[f][k % 2], 0, strip(f) * sizeof(double)});
        }
        break;
      }
      case kHalo: {
        ctx.compute(cfg_.host_compute_us);
        const auto k = static_cast<int>(msg.args.at(0));
        ++halos_[k];
        maybe_step(ctx, k);
        break;
      }
      case kDone: {
        ctx.compute(cfg_.host_compute_us);
        const auto k = static_cast<int>(msg.args.at(0));
        if (k + 1 < cfg_.iterations) {
          start(ctx, k + 1);
        } else {
          finished = ctx.now();
        }
        break;
      }
      default:
        throw std::logic_error("jacobi: unknown method " + std::to_string(msg.method));
    }
  }

  double at(int li, int lj, int parity) const {
    return tile_[parity][static_cast<std::size_t>(li) * stride_ + static_cast<std::size_t>(lj)];
  }

  sim::SimTime finished = 0.0;

 private:
  std::size_t strip(int f) const {
    return static_cast<std::size_t>(f == kNorth || f == kSouth ? w_ : h_);
  }

  void start(HandlerContext& ctx, int k) {
    current_ = k;
    const int p = k % 2;
    for (int f = 0; f < 4; ++f) {
      if (!nb_[f]) continue;
      ctx.launch_kernel(strip(f), 1, [this, f, p] { pack(f, p); });
    }
    if (faces_ > 0) ctx.callback(kPacked, {k});
    maybe_step(ctx, k);
  }

  void maybe_step(HandlerContext& ctx, int k) {
    if (current_ != k || halos_[k] != faces_) return;
    halos_.erase(k);
    const int p = k % 2;
    for (int f = 0; f < 4; ++f) {
      if (!nb_[f]) continue;
      ctx.launch_kernel(strip(f), 1, [this, f, p] { unpack(f, p); });
    }
    ctx.launch_kernel(static_cast<std::uint64_t>(h_) * static_cast<std::uint64_t>(w_), full_sm_,
                      [this, p] { stencil(p); });
    ctx.callback(kDone, {k});
  }

  void pack(int f, int p) {
    const double* t = tile_[p];
    const auto& kt = simd::active();
    switch (f) {
      case kNorth: std::memcpy(send_[f][p], t + stride_ + 1, strip(f) * sizeof(double)); break;
      case kSouth:
        std::memcpy(send_[f][p], t + static_cast<std::size_t>(h_) * stride_ + 1,
                    strip(f) * sizeof(double));
        break;
      case kWest: kt.gather_strided(t + stride_ + 1, stride_, send_[f][p], strip(f)); break;
      case kEast:
        kt.gather_strided(t + stride_ + static_cast<std::size_t>(w_), stride_, send_[f][p], strip(f));
        break;
    }
  }

  void unpack(int f, int p) {
    double* t = tile_[p];
    const auto& kt = simd::active();
    switch (f) {
      case kNorth: std::memcpy(t + 1, recv_[f][p], strip(f) * sizeof(double)); break;
      case kSouth:
        std::memcpy(t + (static_cast<std::size_t>(h_) + 1) * stride_ + 1, recv_[f][p],
                    strip(f) * sizeof(double));
        break;
      case kWest: kt.scatter_strided(recv_[f][p], t + stride_, stride_, strip(f)); break;
      case kEast:
        kt.scatter_strided(recv_[f][p], t + stride_ + static_cast<std::size_t>(w_) + 1, stride_,
                           strip(f));
        break;
    }
  }

  void stencil(int p) {
    const double* cur = tile_[p];
    double* nxt = tile_[1 - p];
    const auto& kt = simd::active();
    for (std::size_t i = 1; i <= static_cast<std::size_t>(h_); ++i) {
      kt.jacobi_row(cur + (i - 1) * stride_ + 1, cur + i * stride_ + 1, cur + (i + 1) * stride_ + 1,
                    nxt + i * stride_ + 1, static_cast<std::size_t>(w_));
    }
  }

  const JacobiConfig& cfg_;
  int h_, w_;
  std::size_t stride_ = 0;
  std::uint32_t full_sm_ = 1;
  std::array<std::optional<int>, 4> nb_{};
  int faces_ = 0;
  int current_ = -1;
  std::map<int, int> halos_;
  std::array<double*, 2> tile_{};
  std::array<std::array<runtime::BufferId, 2>, 4> send_id_{}, recv_id_{};
  std::array<std::array<double*, 2>, 4> send_{}, recv_{};
};

}  // namespace

double jacobi_initial(int i, int j) noexcept {
  return static_cast<double>((i * 37 + j * 101) % 97) / 96.0;
}

runtime::Dims jacobi_tiling(int grid_rows, int grid_cols, int chares) {
  std::optional<runtime::Dims> best;
  int best_score = 0;
  for (int cr = 1; cr <= chares; ++cr) {
    if (chares % cr != 0) continue;
    const int cc = chares / cr;
    if (grid_rows % cr != 0 || grid_cols % cc != 0) continue;
    const int score = std::abs(grid_rows / cr - grid_cols / cc);
    if (!best || score < best_score) {
      best = runtime::Dims{cr, cc};
      best_score = score;
    }
  }
  if (!best) {
    throw ConfigError("no tiling of " + std::to_string(chares) + " chares divides the " +
                      std::to_string(grid_rows) + "x" + std::to_string(grid_cols) + " grid");
  }
  return *best;
}

AppResult jacobi2d(const RuntimeConfig& base, const JacobiConfig& cfg, const RunHooks& hooks) {
  detail::require(cfg.grid_rows >= 1 && cfg.grid_cols >= 1, "app.grid_rows and app.grid_cols must be >= 1");
  detail::require(cfg.odf >= 1, "app.odf must be >= 1");
  detail::require(cfg.iterations >= 0, "app.iterations must be >= 0");
  detail::require(cfg.host_compute_us >= 0.0, "app.host_compute_us must be >= 0");

  runtime::Runtime rt(base);
  detail::attach(rt, hooks);
  const auto dims = jacobi_tiling(cfg.grid_rows, cfg.grid_cols, cfg.odf * base.topology.total_gpus());
  const int h = cfg.grid_rows / dims.rows;
  const int w = cfg.grid_cols / dims.cols;
  const auto id = rt.create_collection("jacobi", dims, cfg.odf, [&](int) {
    return std::make_unique<JacobiChare>(cfg, h, w);
  });

  const auto full_sm = static_cast<std::uint32_t>(rt.devices().sm_capacity(0));
  for (int r = 0; r < dims.rows; ++r) {
    for (int c = 0; c < dims.cols; ++c) {
      std::array<std::optional<int>, 4> nb{};
      if (r > 0) nb[kNorth] = (r - 1) * dims.cols + c;
      if (r + 1 < dims.rows) nb[kSouth] = (r + 1) * dims.cols + c;
      if (c > 0) nb[kWest] = r * dims.cols + c - 1;
      if (c + 1 < dims.cols) nb[kEast] = r * dims.cols + c + 1;
      rt.chare_as<JacobiChare>({id, r * dims.cols + c}).setup(rt, r, c, nb, full_sm);
    }
  }
  if (cfg.iterations > 0) {
    for (int i = 0; i < dims.size(); ++i) rt.inject({id, i}, kStart, {}, 0.0);
  }
  rt.run();

  auto res = detail::collect(rt, hooks);
  const int parity = cfg.iterations % 2;
  double sum = 0.0;
  for (int gi = 0; gi < cfg.grid_rows; ++gi) {
    for (int gj = 0; gj < cfg.grid_cols; ++gj) {
      const auto& ch = rt.chare_as<JacobiChare>({id, (gi / h) * dims.cols + gj / w});
      sum += ch.at(gi % h + 1, gj % w + 1, parity);
    }
  }
  double last = 0.0;
  for (int i = 0; i < dims.size(); ++i) last = std::max(last, rt.chare_as<JacobiChare>({id, i}).finished);
  res.checksum = sum;
  res.time_per_step_us = cfg.iterations > 0 ? last / cfg.iterations : 0.0;
  return res;
}

}  // namespace odsim::apps
