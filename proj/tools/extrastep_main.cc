// Copyright 2026 The Extrastep Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: gen, run, sweep, verify, report.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "extrastep/commands.h"
#include "extrastep/config.h"
#include "extrastep/errors.h"

namespace {

using extrastep::Config;
using extrastep::ConfigError;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void Attach(CLI::App* app) {
    app->add_option("-c,--config", path, "Config file (section.key = value)");
    app->add_option("-s,--set", overrides, "Override, e.g. solver.K=500")
        ->take_all();
  }

  Config Load(bool require_solver = true) const {
    const std::string text = path.empty() ? std::string() : ReadFile(path);
    return extrastep::ParseConfig(text, overrides, require_solver);
  }
};

template <typename F>
int Guard(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error:\n" << e.what() << '\n';
    return extrastep::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return extrastep::kExitRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extra-step solvers for variational inequalities"};
  app.require_subcommand(1);

  ConfigArgs gen_args;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen", "Generate a problem and print its parameters");
  gen_args.Attach(gen);
  gen->add_option("-o,--out", gen_out, "Output file (default: stdout)");

  ConfigArgs run_args;
  std::string run_out;
  CLI::App* run = app.add_subcommand("run", "Run one experiment and write its trace");
  run_args.Attach(run);
  run->add_option("-o,--out", run_out, "Trace path (overrides output.trace)");

  ConfigArgs sweep_args;
  std::string sweep_dir;
  CLI::App* sweep = app.add_subcommand("sweep", "Run the cross product of list-valued fields");
  sweep_args.Attach(sweep);
  sweep->add_option("-d,--dir", sweep_dir, "Output directory (overrides output.dir)");

  ConfigArgs verify_args;
  std::string verify_out;
  CLI::App* verify = app.add_subcommand("verify", "Check estimator unbiasedness and constants");
  verify_args.Attach(verify);
  verify->add_option("-o,--out", verify_out, "Report CSV path (default: stdout)");

  std::string report_dir;
  std::string report_axis;
  CLI::App* report = app.add_subcommand("report", "Rebuild comparison CSVs from traces");
  report->add_option("-d,--dir", report_dir, "Trace directory")->required();
  report->add_option("-a,--axis", report_axis, "Budget axis (default: per estimator)");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    return Guard([&] {
      const Config config = gen_args.Load(false);
      if (gen_out.empty()) {
        extrastep::CmdGen(config, std::cout);
      } else {
        std::ofstream out(gen_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open '" + gen_out + "'");
        extrastep::CmdGen(config, out);
      }
      return static_cast<int>(extrastep::kExitOk);
    });
  }
  if (run->parsed()) {
    return Guard([&] {
      Config config = run_args.Load();
      if (!run_out.empty()) config.trace_path = run_out;
      extrastep::CmdRun(config, std::cout);
      return static_cast<int>(extrastep::kExitOk);
    });
  }
  if (sweep->parsed()) {
    return Guard([&] {
      Config config = sweep_args.Load();
      if (!sweep_dir.empty()) config.directory = sweep_dir;
      extrastep::CmdSweep(config, std::cout);
      return static_cast<int>(extrastep::kExitOk);
    });
  }
  if (verify->parsed()) {
    return Guard([&] {
      const Config config = verify_args.Load(false);
      if (verify_out.empty()) return extrastep::CmdVerify(config, std::cout, std::cerr);
      std::ofstream out(verify_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot open '" + verify_out + "'");
      return extrastep::CmdVerify(config, out, std::cout);
    });
  }
  return Guard([&] {
    std::optional<std::string> axis;
    if (!report_axis.empty()) axis = report_axis;
    extrastep::CmdReport(report_dir, axis, std::cout);
    return static_cast<int>(extrastep::kExitOk);
  });
}
