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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "odsim/cli/config.hpp"
#include "odsim/cli/metrics.hpp"
#include "odsim/errors.hpp"

namespace {

using namespace odsim::cli;
namespace fs = std::filesystem;

std::string expect_config_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const odsim::ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected ConfigError";
  return {};
}

std::string csv_of(const RunConfig& cfg) {
  std::ostringstream os;
  write_csv(os, run_sweep(cfg));
  return os.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::size_t column(const std::string& header, const std::string& name) {
  const auto h = cells(header);
  return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
}

TEST(Config, EmptyTextGivesDefaults) {
  EXPECT_EQ(parse_config(""), RunConfig());
  EXPECT_EQ(RunConfig().value("network.bandwidth_gbps"), "21");
  EXPECT_EQ(RunConfig().run_count(), 1u);
}

TEST(Config, FlagsOverrideFile) {
  auto cfg = parse_config("[network]\nbandwidth_gbps = 21\n");
  apply_overrides(cfg, {"network.bandwidth_gbps=10"});
  EXPECT_EQ(cfg.value("network.bandwidth_gbps"), "10");
}

TEST(Config, SectionsCommentsAndQualifiedKeys) {
  auto cfg = parse_config(
      "# header comment\n"
      "topology.nodes = 2   ; trailing comment\n"
      "[device]\n"
      "sharing_policy = time_sliced\n"
      "\n"
      "[app]\n"
      "with_compute = yes\n");
  EXPECT_EQ(cfg.value("topology.nodes"), "2");
  EXPECT_EQ(cfg.value("device.sharing_policy"), "time_sliced");
  EXPECT_EQ(cfg.value("app.with_compute"), "true");
}

TEST(Config, ListMakesSweep) {
  auto cfg = parse_config("[app]\nodf = [1,2,4]\n");
  EXPECT_EQ(cfg.run_count(), 3u);
  EXPECT_EQ(cfg.expand().size(), 3u);
}

TEST(Config, LastSortedKeyVariesFastest) {
  auto cfg = parse_config("[topology]\nnodes = [1,2]\n[app]\nodf = [1, 2]\n");
  const auto pts = cfg.expand();
  ASSERT_EQ(pts.size(), 4u);
  std::vector<std::pair<std::string, std::string>> got;
  for (const auto& p : pts) got.emplace_back(p.at("app.odf"), p.at("topology.nodes"));
  EXPECT_EQ(got, (std::vector<std::pair<std::string, std::string>>{
                     {"1", "1"}, {"1", "2"}, {"2", "1"}, {"2", "2"}}));
}

TEST(Config, ErrorsNameTheKey) {
  auto msg = expect_config_error([] { parse_config("[app]\nodff = 3\n"); });
  EXPECT_NE(msg.find("app.odff"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  msg = expect_config_error([] { parse_config("[network]\nlatency_us = fast\n"); });
  EXPECT_NE(msg.find("network.latency_us"), std::string::npos) << msg;
  msg = expect_config_error([] { parse_config("[topology]\nnodes = 0\n"); });
  EXPECT_NE(msg.find("topology.nodes"), std::string::npos) << msg;
  msg = expect_config_error([] { parse_config("[device]\nsharing_policy = round_robin\n"); });
  EXPECT_NE(msg.find("device.sharing_policy"), std::string::npos) << msg;
  msg = expect_config_error([] { parse_config("[app]\nodf = [1,,2]\n"); });
  EXPECT_NE(msg.find("app.odf"), std::string::npos) << msg;
  msg = expect_config_error([] { parse_config("[app]\nodf = 2.5\n"); });
  EXPECT_NE(msg.find("app.odf"), std::string::npos) << msg;
  msg = expect_config_error([] { parse_config("[network]\nchunk_size = -1\n"); });
  EXPECT_NE(msg.find("network.chunk_size"), std::string::npos) << msg;
  expect_config_error([] { parse_config("just words\n"); });
}

TEST(Config, SerializeRoundTripsRandomConfigs) {
  std::mt19937 rng(5);
  for (int round = 0; round < 200; ++round) {
    RunConfig cfg;
    for (const auto& k : schema()) {
      if (rng() % 3 != 0) continue;
      const int n = 1 + static_cast<int>(rng() % 3);
      std::string raw = n > 1 ? "[" : "";
      for (int i = 0; i < n; ++i) {
        if (i) raw += ",";
        switch (k.kind) {
          case Kind::Int: raw += std::to_string(1 + rng() % 100); break;
          case Kind::UInt: raw += std::to_string(1 + rng() % 100000); break;
          case Kind::Real: raw += std::to_string(1 + rng() % 1000) + "." + std::to_string(rng() % 1000); break;
          case Kind::Bool: raw += rng() % 2 ? "true" : "off"; break;
          case Kind::String:
            raw += k.choices.empty() ? "file" + std::to_string(rng() % 10) + ".out"
                                     : k.choices[1 + rng() % (k.choices.size() - 1)];
            break;
        }
      }
      cfg.set(k.key, raw + (n > 1 ? "]" : ""));
    }
    ASSERT_EQ(parse_config(cfg.serialize()), cfg) << cfg.serialize();
  }
}

TEST(Config, PointsMapOntoLibraryStructs) {
  auto cfg = parse_config(
      "[topology]\nnodes = 2\npes_per_process = 3\n[device]\nsharing_policy = time_sliced\n"
      "[network]\nchunk_size = 4096\n[app]\nodf = 8\nwith_compute = true\n");
  const auto p = cfg.expand().front();
  const auto rc = runtime_config(p);
  EXPECT_EQ(rc.topology.total_pes(), 6);
  EXPECT_EQ(rc.device.policy, odsim::device::SharingPolicy::TimeSliced);
  EXPECT_EQ(rc.network.chunk_size, 4096u);
  const auto ap = app_params(p);
  EXPECT_EQ(ap.odf, 8);
  EXPECT_TRUE(ap.with_compute);
}

TEST(Sweep, OverlapRowsCarryCompletion) {
  auto cfg = parse_config("[run]\napp = overlap\n[app]\nodf = [1,8,64]\n");
  const auto text = csv_of(cfg);
  const auto ls = lines(text);
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[0].rfind("run_id,", 0), 0u);
  const auto col = column(ls[0], "completion_us");
  const auto odf = column(ls[0], "app.odf");
  EXPECT_EQ(cells(ls[3])[odf], "64");
  for (std::size_t i = 1; i < ls.size(); ++i) {
    EXPECT_FALSE(cells(ls[i])[col].empty());
    EXPECT_TRUE(cells(ls[i])[column(ls[0], "checksum")].empty());
  }
}

TEST(Sweep, HeaderOrder) {
  const auto header = lines(csv_of(parse_config("[run]\napp = overlap\n")))[0];
  const auto h = cells(header);
  EXPECT_EQ(h.front(), "run_id");
  EXPECT_TRUE(std::is_sorted(h.begin() + 1, h.begin() + static_cast<long>(column(header, "completion_us"))));
  EXPECT_EQ(h.back(), "mean_sm_utilization");
  EXPECT_EQ(column(header, "output.out"), h.size());
}

TEST(Sweep, IdenticalConfigsGiveIdenticalBytes) {
  auto cfg = parse_config(
      "[run]\napp = jacobi2d\n[topology]\nnodes = 2\ngpus_per_node = 2\nprocesses_per_gpu = 2\n"
      "[app]\ngrid_rows = 64\ngrid_cols = 64\niterations = 4\nodf = [1,2,4]\n");
  EXPECT_EQ(csv_of(cfg), csv_of(cfg));
}

TEST(Sweep, JacobiChecksumConstantAcrossRows) {
  auto cfg = parse_config(
      "[run]\napp = jacobi2d\n[topology]\ngpus_per_node = [1,2]\n"
      "[app]\ngrid_rows = 96\ngrid_cols = 64\niterations = 5\nodf = [1,2,4,8]\n");
  const auto ls = lines(csv_of(cfg));
  ASSERT_EQ(ls.size(), 9u);
  const auto col = column(ls[0], "checksum");
  for (std::size_t i = 2; i < ls.size(); ++i) EXPECT_EQ(cells(ls[i])[col], cells(ls[1])[col]);
}

TEST(Sweep, FailingPointIsNamed) {
  auto cfg = parse_config("[run]\napp = jacobi2d\n[topology]\ngpus_per_node = 4\n"
                          "[app]\ngrid_rows = [8,7]\ngrid_cols = 7\niterations = 1\n");
  try {
    run_sweep(cfg);
    FAIL() << "expected SweepError";
  } catch (const odsim::SweepError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("run 1"), std::string::npos) << what;
    EXPECT_NE(what.find("app.grid_rows=7"), std::string::npos) << what;
  }
}

TEST(Sweep, MissingAppIsReported) {
  EXPECT_THROW(run_sweep(RunConfig()), odsim::SweepError);
}

TEST(Sweep, JsonIsArrayOfRecords) {
  auto cfg = parse_config("[run]\napp = launch_rate\n[app]\nchares_per_pe = [1,2]\nwindow_us = 1000\n");
  std::ostringstream os;
  write_json(os, run_sweep(cfg));
  const auto doc = nlohmann::json::parse(os.str());
  ASSERT_TRUE(doc.is_array());
  ASSERT_EQ(doc.size(), 2u);
  EXPECT_EQ(doc[1]["config"]["app.chares_per_pe"], 2);
  EXPECT_GT(doc[1]["measurements"]["kernels_per_second"].get<double>(), 0.0);
  EXPECT_TRUE(doc[1]["measurements"]["checksum"].is_null());
}

class TraceFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("odsim_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(TraceFiles, OffWritesNothing) {
  auto cfg = parse_config("[run]\napp = overlap\n");
  cfg.set("output.trace_path", (dir_ / "t.tsv").string());
  cfg.set("output.transfer_log", (dir_ / "x.csv").string());
  run_sweep(cfg);
  EXPECT_TRUE(fs::is_empty(dir_));
}

TEST_F(TraceFiles, UnwritablePathFailsBeforeRunning) {
  auto cfg = parse_config("[run]\napp = jacobi2d\n[output]\ntrace = true\n");
  cfg.set("output.trace_path", (dir_ / "missing" / "t.tsv").string());
  EXPECT_THROW(run_sweep(cfg), odsim::IoError);
}

TEST_F(TraceFiles, TransferLogRowsMatchCounters) {
  auto cfg = parse_config(
      "[run]\napp = jacobi2d\n[topology]\nnodes = 2\nprocesses_per_gpu = 2\n"
      "[app]\ngrid_rows = 32\ngrid_cols = 32\niterations = 2\nodf = [2,4]\n[output]\ntrace = true\n");
  cfg.set("output.trace_path", (dir_ / "t.tsv").string());
  cfg.set("output.transfer_log", (dir_ / "x.csv").string());
  const auto rows = run_sweep(cfg);
  ASSERT_EQ(rows.size(), 2u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::ifstream log(dir_ / ("x.csv.run" + std::to_string(i)));
    std::string text((std::istreambuf_iterator<char>(log)), {});
    const auto n = lines(text).size() - 1;
    const auto& r = rows[i].result;
    EXPECT_EQ(n, r.transfers_intra_process + r.transfers_intra_node_ipc + r.transfers_inter_node);
    EXPECT_GT(n, 0u);
    EXPECT_TRUE(fs::file_size(dir_ / ("t.tsv.run" + std::to_string(i))) > 0);
  }
}

// One handler launching one kernel with a completion callback: the trace is
// the injection, the handler step, two enqueues (kernel, callback), the
// kernel's dispatch and completion, the callback arriving 2us later, and
// the re-entry step.
TEST(Trace, OneKernelRunEnumerated) {
  odsim::runtime::RuntimeConfig rc;
  odsim::runtime::Runtime rt(rc);
  std::ostringstream os;
  rt.engine().trace_to(os);
  struct Once : odsim::runtime::Chare {
    void receive(odsim::runtime::HandlerContext& ctx, const odsim::runtime::EntryMessage& m) override {
      if (m.method == 0) {
        ctx.launch_kernel(0, 84);
        ctx.callback(1);
      }
    }
  };
  auto id = rt.create_collection("once", {1, 1}, 1, [](int) { return std::make_unique<Once>(); });
  rt.inject({id, 0}, 0);
  rt.run();
  std::vector<std::string> actions, times;
  for (const auto& l : lines(os.str())) {
    std::istringstream in(l);
    std::string t, seq, target, action;
    std::getline(in, t, '\t');
    std::getline(in, seq, '\t');
    std::getline(in, target, '\t');
    std::getline(in, action, '\t');
    actions.push_back(action);
    times.push_back(t);
  }
  EXPECT_EQ(actions, (std::vector<std::string>{"inject", "pe_step", "enqueue", "enqueue",
                                               "kernel_dispatch", "kernel_complete", "callback",
                                               "pe_step"}));
  EXPECT_EQ(times, (std::vector<std::string>{"0", "0", "5", "10", "10", "11", "13", "13"}));
}

}  // namespace
