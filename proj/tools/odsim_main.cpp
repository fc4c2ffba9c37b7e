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

// odsim: run simulated workloads and sweeps from the command line.
//
//   odsim run --app jacobi2d --set app.odf=[1,2,4,8] --out jacobi.csv
//   odsim keys

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "odsim/cli/config.hpp"
#include "odsim/cli/metrics.hpp"
#include "odsim/errors.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw odsim::IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kind_name(odsim::cli::Kind k) {
  switch (k) {
    case odsim::cli::Kind::Int: return "int";
    case odsim::cli::Kind::UInt: return "uint";
    case odsim::cli::Kind::Real: return "real";
    case odsim::cli::Kind::Bool: return "bool";
    case odsim::cli::Kind::String: return "string";
  }
  return "?";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator of an overdecomposed GPU tasking runtime"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one app, or a sweep when any key holds a list");
  std::string app_name, config_path, out_path;
  std::vector<std::string> sets;
  bool json = false, trace = false;
  run->add_option("--app", app_name, "jacobi2d | launch_rate | overlap | pipeline");
  run->add_option("--config", config_path, "Sectioned key = value file");
  run->add_option("--set", sets, "key=value override, repeatable; value may be a list [a,b]")
      ->allow_extra_args(false);
  run->add_option("--out", out_path, "Results file (default stdout)");
  run->add_flag("--json", json, "Emit JSON instead of CSV");
  run->add_flag("--trace", trace, "Write the event trace and transfer log");

  auto* keys = app.add_subcommand("keys", "List configuration keys and defaults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (keys->parsed()) {
      for (const auto& k : odsim::cli::schema()) {
        std::cout << k.key << '\t' << kind_name(k.kind) << '\t' << k.default_value;
        if (!k.help.empty()) std::cout << "\t# " << k.help;
        std::cout << '\n';
      }
      return 0;
    }

    odsim::cli::RunConfig cfg;
    if (!config_path.empty()) cfg = odsim::cli::parse_config(read_file(config_path), cfg);
    odsim::cli::apply_overrides(cfg, sets);
    if (!app_name.empty()) cfg.set("run.app", app_name);
    if (!out_path.empty()) cfg.set("output.out", out_path);
    if (json) cfg.set("output.json", "true");
    if (trace) cfg.set("output.trace", "true");

    std::unique_ptr<std::ofstream> file;
    if (const auto& path = cfg.value("output.out"); !path.empty()) {
      file = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file) throw odsim::IoError("cannot open '" + path + "' for writing");
    }
    const auto rows = odsim::cli::run_sweep(cfg);
    odsim::cli::write_results(cfg, rows, file ? *file : std::cout);
    return 0;
  } catch (const odsim::ConfigError& e) {
    std::cerr << "odsim: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "odsim: error: " << e.what() << '\n';
    return 1;
  }
}
