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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "odsim/errors.hpp"
#include "properties.hpp"
#include "odsim/sim/engine.hpp"

namespace {

using odsim::sim::Engine;
using odsim::sim::SimTime;

TEST(Engine, EqualTimeFiresInScheduleOrder) {
  Engine e;
  std::vector<int> order;
  e.schedule(10, 0, "a", [&] { order.push_back(1); });
  e.schedule(10, 0, "b", [&] { order.push_back(2); });
  e.run_until_quiescent();
  EXPECT_EQ(order, (std::vector<int>{1, 2}));
}

TEST(Engine, ZeroDelayRunsAfterCurrentEvent) {
  Engine e;
  std::vector<std::string> order;
  e.schedule(5, 0, "outer", [&] {
    e.schedule(0, 0, "inner", [&] {
      order.push_back("inner@" + std::to_string(e.now()));
    });
    order.push_back("outer");
  });
  e.run_until_quiescent();
  ASSERT_EQ(order.size(), 2u);
  EXPECT_EQ(order[0], "outer");
  EXPECT_EQ(order[1], "inner@" + std::to_string(5.0));
}

TEST(Engine, RejectsNegativeAndNonFiniteDelay) {
  Engine e;
  EXPECT_THROW(e.schedule(-1, 0, "x", [] {}), odsim::ArgumentError);
  EXPECT_THROW(e.schedule(std::numeric_limits<double>::infinity(), 0, "x", [] {}),
               odsim::ArgumentError);
  EXPECT_THROW(e.schedule(std::nan(""), 0, "x", [] {}), odsim::ArgumentError);
}

TEST(Engine, EmptyRunReturnsZero) {
  Engine e;
  EXPECT_EQ(e.now(), 0.0);
  EXPECT_EQ(e.run_until_quiescent(), 0.0);
}

TEST(Engine, OrdersByTimeThenSeq) {
  Engine e;
  std::vector<int> order;
  e.schedule(5, 0, "a", [&] { order.push_back(0); });
  e.schedule(5, 0, "b", [&] { order.push_back(1); });
  e.schedule(3, 0, "c", [&] { order.push_back(2); });
  e.run_until_quiescent();
  EXPECT_EQ(order, (std::vector<int>{2, 0, 1}));
}

TEST(Engine, ChainOfFourLinksEndsAtForty) {
  Engine e;
  int links = 0;
  std::function<void()> link = [&] {
    if (++links < 4) e.schedule(10, 0, "link", link);
  };
  e.schedule(10, 0, "link", link);
  EXPECT_EQ(e.run_until_quiescent(), 40.0);
  EXPECT_EQ(e.now(), 40.0);
}

TEST(Engine, NowInsideEvent) {
  Engine e;
  SimTime seen = -1;
  e.schedule(17, 0, "probe", [&] { seen = e.now(); });
  e.run_until_quiescent();
  EXPECT_EQ(seen, 17.0);
}

TEST(Engine, CancelledEventDoesNotFire) {
  Engine e;
  bool fired = false;
  auto h = e.schedule(3, 0, "x", [&] { fired = true; });
  EXPECT_TRUE(e.cancel(h));
  EXPECT_FALSE(e.cancel(h));
  e.run_until_quiescent();
  EXPECT_FALSE(fired);
}

TEST(Engine, LivelockGuardNamesHotEntity) {
  Engine e(1000);
  auto hot = e.register_entity("spinner");
  std::function<void()> spin = [&] { e.schedule(0, hot, "spin", spin); };
  e.schedule(0, hot, "spin", spin);
  try {
    e.run_until_quiescent();
    FAIL() << "expected livelock error";
  } catch (const odsim::LivelockError& err) {
    EXPECT_NE(std::string(err.what()).find("spinner"), std::string::npos);
  }
}

TEST(Engine, TraceIsDeterministic) {
  auto trace = [] {
    Engine e;
    std::ostringstream os;
    e.trace_to(os);
    auto a = e.register_entity("a");
    std::mt19937 rng(7);
    std::function<void(int)> spawn = [&](int depth) {
      if (depth == 0) return;
      for (int i = 0; i < 2; ++i) {
        e.schedule(rng() % 4, a, "spawn", [&, depth] { spawn(depth - 1); });
      }
    };
    spawn(6);
    e.run_until_quiescent();
    return os.str();
  };
  const auto first = trace();
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(first, trace());
}

TEST(Engine, RandomDagsMatchBruteForceOrder) { EXPECT_EQ(odsim::props::engine_dag_order(1000), ""); }

}  // namespace
