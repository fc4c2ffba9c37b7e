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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Thresholds are trend and ratio checks on the modeled
// workloads.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "odsim/apps/apps.hpp"
#include "odsim/cli/config.hpp"
#include "odsim/cli/metrics.hpp"
#include "odsim/comm/comm.hpp"
#include "odsim/runtime/runtime.hpp"
#include "oracles.hpp"
#include "properties.hpp"

namespace {

using namespace odsim;
using apps::RuntimeConfig;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

RuntimeConfig with_topology(int nodes, int gpus, int procs, int pes) {
  RuntimeConfig cfg;
  cfg.topology = runtime::build_topology(nodes, gpus, procs, pes);
  return cfg;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void overlap_shape(Outcome& out) {
  const RuntimeConfig base;
  const std::uint64_t small = apps::OverlapConfig{}.total_work_items;
  auto completion = [&](std::uint64_t work, int odf) {
    return *apps::bench_overlap(base, {work, odf}).completion_us;
  };
  const double s1 = completion(small, 1), s8 = completion(small, 8), s64 = completion(small, 64);
  const double l1 = completion(16 * small, 1), l64 = completion(16 * small, 64);
  out.detail << "small odf1/8/64 = " << fmt(s1) << "/" << fmt(s8) << "/" << fmt(s64)
             << "us, large odf1/64 = " << fmt(l1) << "/" << fmt(l64) << "us ";
  out.check(s8 / s1 <= 1.25, "small odf8/odf1 <= 1.25");
  out.check(s64 / s1 >= 2.0, "small odf64/odf1 >= 2.0");
  out.check(l64 / l1 <= 1.10, "large odf64/odf1 <= 1.10");
}

void launch_rate_shape(Outcome& out) {
  const RuntimeConfig base;
  auto rate = [&](int chares, int pes) {
    return *apps::bench_launch_rate(base, {pes, chares, 100'000.0}).kernels_per_second;
  };
  const double r11 = rate(1, 1), r21 = rate(2, 1), r41 = rate(4, 1);
  out.detail << "rate(1,1)=" << fmt(r11) << " rate(2,1)=" << fmt(r21) << " rate(4,1)=" << fmt(r41);
  out.check(r21 >= 1.2 * r11, "rate(2,1) >= 1.2 rate(1,1)");
  out.check(std::abs(r41 - r21) <= 0.10 * r21, "rate(4,1) within 10% of rate(2,1)");
  for (int chares : {1, 2, 4}) {
    double prev = 0.0;
    for (int pes : {1, 2, 4}) {
      const double r = rate(chares, pes);
      out.check(r >= prev, "non-decreasing in pes at chares/pe=" + std::to_string(chares));
      prev = r;
    }
    out.detail << " pes4@" << chares << "=" << fmt(prev);
  }
}

void pipeline_knee(Outcome& out) {
  const RuntimeConfig base;
  auto comm = [&](int odf) { return *apps::bench_pipeline(base, {64ULL << 20, odf, false}).comm_us; };
  double lo = 1e300, hi = 0.0;
  for (int odf : {1, 2, 4, 8, 16}) {
    const double c = comm(odf);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  const double c1 = comm(1), c64 = comm(64);
  out.detail << "comm_us odf1..16 in [" << fmt(lo) << ", " << fmt(hi) << "], odf64 = " << fmt(c64)
             << " (" << fmt(c64 / c1) << "x odf1)";
  out.check(hi <= 1.10 * lo, "odf 1..16 spread <= 10%");
  out.check(c64 >= 1.25 * c1, "odf64 >= 1.25 odf1");
}

// 128 MiB keeps every per-pair payload at or above 4 MiB for odf <= 32.
void overlap_benefit(Outcome& out) {
  const RuntimeConfig base;
  const std::uint64_t total = 128ULL << 20;
  auto total_us = [&](int odf) { return *apps::bench_pipeline(base, {total, odf, true}).total_us; };
  const double t1 = total_us(1);
  double best = 1e300;
  int best_odf = 0;
  for (int odf : {2, 4, 8, 16, 32}) {
    const double t = total_us(odf);
    if (t < best) best = t, best_odf = odf;
  }
  out.detail << "total_us odf1 = " << fmt(t1) << ", best = " << fmt(best) << " at odf " << best_odf;
  out.check(best < t1, "some odf in 2..32 beats odf1");
}

void jacobi_correctness(Outcome& out) {
  const double oracle = oracles::serial_jacobi(1024, 1024, 20);
  out.detail << "oracle checksum " << fmt(oracle) << "; ";
  struct Topo {
    int nodes, gpus, procs, pes;
  };
  int runs = 0;
  for (const Topo t : {Topo{1, 1, 1, 1}, Topo{1, 2, 2, 2}, Topo{2, 4, 1, 4}}) {
    for (int odf : {1, 2, 4, 8, 16}) {
      const auto res = apps::jacobi2d(with_topology(t.nodes, t.gpus, t.procs, t.pes),
                                      {1024, 1024, odf, 20, 1.0});
      ++runs;
      std::ostringstream where;
      where << "(" << t.nodes << "," << t.gpus << "," << t.procs << "," << t.pes << ") odf " << odf
            << " gave " << fmt(*res.checksum);
      out.check(*res.checksum == oracle, where.str());
    }
  }
  out.detail << runs << " runs compared bitwise";
}

void jacobi_flat_odf(Outcome& out) {
  const auto base = with_topology(1, 4, 1, 1);
  auto tps = [&](int odf) { return *apps::jacobi2d(base, {4096, 4096, odf, 100, 1.0}).time_per_step_us; };
  const double t1 = tps(1);
  out.detail << "time/step odf1 = " << fmt(t1) << "us";
  for (int odf : {4, 8, 16}) {
    const double t = tps(odf);
    out.detail << ", odf" << odf << " = " << fmt(t) << "us (" << fmt(100.0 * (t / t1 - 1.0)) << "%)";
    out.check(std::abs(t - t1) <= 0.10 * t1, "odf " + std::to_string(odf) + " within 10%");
  }
}

class Sink : public runtime::Chare {
 public:
  explicit Sink(runtime::Runtime& rt) : rt_(rt) {}
  void receive(runtime::HandlerContext&, const runtime::EntryMessage&) override {}
  runtime::PostTarget post(const runtime::EntryMessage& msg) override {
    return runtime::PostTarget{rt_.allocate_buffer(gpu(), msg.device->bytes), 0, stream()};
  }

 private:
  runtime::Runtime& rt_;
};

class Source : public runtime::Chare {
 public:
  explicit Source(runtime::BufferId* buf) : buf_(buf) {}
  void receive(runtime::HandlerContext& ctx, const runtime::EntryMessage&) override {
    ctx.send_device({ref().collection, 1}, 0, {}, runtime::DeviceSlice{*buf_, 0, kBytes});
  }
  static constexpr std::size_t kBytes = 4u << 20;

 private:
  runtime::BufferId* buf_;
};

// End-to-end time of a single 4 MB transfer between the two chares of a
// fresh runtime; the topology decides the path.
std::pair<comm::Path, double> one_transfer(int nodes, int procs, int odf) {
  runtime::Runtime rt(with_topology(nodes, 1, procs, 1));
  runtime::BufferId buf = 0;
  const auto id = rt.create_collection("pair", runtime::Dims{1, 2}, odf, [&](int i) {
    return i == 0 ? std::unique_ptr<runtime::Chare>(std::make_unique<Source>(&buf))
                  : std::unique_ptr<runtime::Chare>(std::make_unique<Sink>(rt));
  });
  buf = rt.allocate_buffer(rt.chare({id, 0}).gpu(), Source::kBytes);
  rt.inject({id, 0}, 0);
  rt.run();
  const auto& rec = rt.comm().transfers().at(0);
  return {rec.path, rec.delivered - rec.send};
}

void transport_hierarchy(Outcome& out) {
  const auto intra = one_transfer(1, 1, 2);
  const auto ipc = one_transfer(1, 2, 2);
  const auto inter = one_transfer(2, 1, 1);
  out.detail << "4MB intra_process = " << fmt(intra.second) << "us, intra_node_ipc = "
             << fmt(ipc.second) << "us, inter_node = " << fmt(inter.second) << "us";
  out.check(intra.first == comm::Path::IntraProcess && ipc.first == comm::Path::IntraNodeIpc &&
                inter.first == comm::Path::InterNode,
            "placements hit the intended paths");
  out.check(intra.second < ipc.second, "intra_process < intra_node_ipc");
  out.check(ipc.second < inter.second, "intra_node_ipc < inter_node");
}

void property_suites(Outcome& out) {
  const std::pair<const char*, std::function<std::string()>> suites[] = {
      {"engine order (1000 DAGs)", [] { return props::engine_dag_order(1000); }},
      {"device invariants (500 cases)", [] { return props::device_workloads(500); }},
      {"transfer storms (500 cases)", [] { return props::transfer_storms(500); }},
  };
  for (const auto& [name, run] : suites) {
    const auto err = run();
    out.check(err.empty(), std::string(name) + ": " + err);
    out.detail << name << (err.empty() ? " ok; " : " FAILED; ");
  }
  auto cfg = cli::parse_config(
      "[run]\napp = [jacobi2d, pipeline]\n[topology]\nnodes = 2\nprocesses_per_gpu = 2\n"
      "[app]\nodf = [1,2,4]\ngrid_rows = 128\ngrid_cols = 128\niterations = 5\n"
      "total_bytes = 4194304\nwith_compute = true\n");
  auto csv = [&] {
    std::ostringstream os;
    cli::write_csv(os, cli::run_sweep(cfg));
    return os.str();
  };
  const auto a = csv(), b = csv();
  out.check(a == b && !a.empty(), "two identical sweeps give byte-identical CSV");
  out.detail << "sweep CSV " << a.size() << " bytes, " << (a == b ? "identical" : "different");
}

}  // namespace

int main() {
  const std::pair<const char*, void (*)(Outcome&)> criteria[] = {
      {"overlap overhead shape", overlap_shape},
      {"launch rate shape", launch_rate_shape},
      {"pipelined communication knee", pipeline_knee},
      {"overlap benefit with compute", overlap_benefit},
      {"jacobi2d correctness", jacobi_correctness},
      {"jacobi2d flat odf cost", jacobi_flat_odf},
      {"transport hierarchy", transport_hierarchy},
      {"property suites and determinism", property_suites},
  };
  int failed = 0, n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Outcome out;
    try {
      fn(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "[error: " << e.what() << "]";
    }
    if (!out.pass) ++failed;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name
              << "): " << out.detail.str() << std::endl;
  }
  std::cout << (n - failed) << "/" << n << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
