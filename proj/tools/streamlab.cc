// streamlab: run simulated streaming jobs, sweeps and microbenches.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "streamlab/bench/config.h"
#include "streamlab/bench/microbench.h"
#include "streamlab/bench/report_io.h"
#include "streamlab/bench/runner.h"

namespace fs = std::filesystem;
using namespace streamlab;
using namespace streamlab::bench;

namespace {

// --out wins, then STREAMLAB_OUT, then the config's "out", then out/<name>.
std::string OutputRoot(const std::string& flag, const std::string& from_config, const std::string& name) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("STREAMLAB_OUT"); env && *env) return env;
  if (!from_config.empty()) return from_config;
  return (fs::path("out") / name).string();
}

int CmdRun(const std::string& config, const std::vector<std::string>& sets, const std::string& out_flag) {
  RunConfig cfg;
  try {
    cfg = LoadRunConfig(config, sets);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::string dir = OutputRoot(out_flag, cfg.out, cfg.name);
  try {
    auto res = RunAndWrite(cfg, dir);
    const auto& r = res.report;
    std::cout << "run " << cfg.name << " seed=" << cfg.seed << " -> " << dir << "\n";
    if (!r.valid) {
      std::cerr << "engine error: " << r.error << " (partial report written)\n";
      return res.exit_code;
    }
    std::cout << "  completed=" << (r.completed ? "yes" : "no") << " qps_mean=" << r.qps_mean
              << " ckpt_success_pct=" << r.checkpoint_success_pct() << " recoveries=" << r.recoveries.size()
              << " dropped=" << r.records_dropped << " duplicates=" << r.duplicates << "\n";
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    if (res.verdict) std::cout << "  slo: " << res.verdict->explanation << "\n";
    return res.exit_code;
  } catch (const Error& e) {
    std::cerr << "engine error: " << e.what() << "\n";
    return kExitEngine;
  }
}

int CmdSweep(const std::string& config, const std::vector<std::string>& sets, const std::vector<std::string>& grid,
             int parallel, const std::string& out_flag) {
  nlohmann::json base;
  std::vector<GridAxis> axes;
  try {
    base = LoadJsonFile(config);
    for (const auto& kv : sets) {
      auto [k, v] = SplitOverride(kv);
      SetPath(base, k, v);
    }
    for (const auto& g : grid) axes.push_back(ParseGridFlag(g));
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  SweepOptions opts;
  opts.parallel = parallel;
  opts.base_dir = fs::path(config).parent_path().string();
  if (opts.base_dir.empty()) opts.base_dir = ".";
  opts.out_dir = OutputRoot(out_flag, base.value("out", std::string()), base.value("name", std::string("sweep")));
  try {
    return RunSweep(base, axes, opts, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int CmdMicro(int reps, double scale, const std::string& out_file) {
  MicroOptions o;
  o.reps = reps;
  o.scale = scale;
  auto res = RunMicrobench(o);
  std::cout << MicroTable(res);
  if (!out_file.empty()) {
    std::ofstream f(out_file);
    f << MicroToJson(res, o).dump(2) << "\n";
    if (!f) {
      std::cerr << "cannot write " << out_file << "\n";
      return 1;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streamlab: deterministic stream processing resiliency lab"};
  app.require_subcommand(1);

  std::string config, out;
  std::vector<std::string> sets, grid, dirs;
  int parallel = 1, reps = 5;
  double scale = 1.0;
  bool csv = false;
  std::string micro_out;

  auto* run = app.add_subcommand("run", "run one configuration");
  run->add_option("--config,-c", config, "config file")->required();
  run->add_option("--set", sets, "override key=value (dot notation)")->allow_extra_args(false);
  run->add_option("--out,-o", out, "output directory");

  auto* sweep = app.add_subcommand("sweep", "run the cartesian product of a grid");
  sweep->add_option("--config,-c", config, "base config file")->required();
  sweep->add_option("--set", sets, "override key=value applied to every cell")->allow_extra_args(false);
  sweep->add_option("--grid,-g", grid, "axis path=v1,v2 or path=[json,..]")->allow_extra_args(false);
  sweep->add_option("--parallel,-j", parallel, "cells run at once")->check(CLI::PositiveNumber);
  sweep->add_option("--out,-o", out, "output root");

  auto* report = app.add_subcommand("report", "compare run directories");
  report->add_option("dirs", dirs, "run directories");
  report->add_flag("--csv", csv, "print CSV instead of a table");

  auto* micro = app.add_subcommand("microbench", "time state, routing and scheduler hot paths");
  micro->add_option("--reps", reps, "repetitions")->check(CLI::PositiveNumber);
  micro->add_option("--scale", scale, "work multiplier")->check(CLI::PositiveNumber);
  micro->add_option("--out,-o", micro_out, "JSON output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (*run) return CmdRun(config, sets, out);
  if (*sweep) return CmdSweep(config, sets, grid, parallel, out);
  if (*report) return CompareReports(dirs, csv, std::cout, std::cerr);
  if (*micro) return CmdMicro(reps, scale, micro_out);
  return kExitConfig;
}
