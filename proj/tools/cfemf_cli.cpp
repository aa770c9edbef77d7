// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfemf/harness.hpp"

namespace {

struct RunArgs {
  std::string config_path;
  std::string out_dir = ".";
  long long seed = -1;
  int drops = -1;
  int threads = -1;
  bool verbose = false;
  bool timings = false;
};

int run_campaign_cmd(const RunArgs& args, bool require_sweep) {
  cfemf::CampaignSpec spec = cfemf::load_config(args.config_path);
  if (args.seed >= 0) spec.master_seed = static_cast<std::uint64_t>(args.seed);
  if (args.drops > 0) spec.num_drops = args.drops;
  if (args.threads >= 0) spec.threads = args.threads;
  spec.verbose = args.verbose;
  spec.record_timings = args.timings;

  if (require_sweep && spec.sweep_num_users.empty() && spec.sweep_sar_caps.empty()) {
    std::cerr << "sweep: config has no sweep grid "
                 "(set sweep_num_users or sweep_sar_cap_w_kg)\n";
    return 1;
  }

  const cfemf::ResultTable table = cfemf::run_campaign(spec);
  std::filesystem::create_directories(args.out_dir);
  const std::string out =
      (std::filesystem::path(args.out_dir) / "results.csv").string();
  table.write_csv(out);
  std::cout << "wrote " << table.rows.size() << " rows to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cell-free massive MIMO simulator with EMF-aware power control"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto add_campaign_flags = [&](CLI::App* cmd) {
    cmd->add_option("config", run_args.config_path, "campaign config file")
        ->required();
    cmd->add_option("--seed", run_args.seed, "override master_seed");
    cmd->add_option("--drops", run_args.drops, "override num_drops");
    cmd->add_option("--out-dir", run_args.out_dir, "output directory");
    cmd->add_option("--threads", run_args.threads, "worker threads (0 = auto)");
    cmd->add_flag("--verbose", run_args.verbose, "solver traces on stderr");
    cmd->add_flag("--timings", run_args.timings,
                  "record wall-clock solve times (output no longer bit-stable)");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run a Monte-Carlo campaign");
  add_campaign_flags(run_cmd);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "run a campaign over its sweep grids");
  add_campaign_flags(sweep_cmd);

  std::string table_path;
  std::string metric = "rate";
  std::string group_by = "scheme,deployment,direction";
  std::string cdf_out_dir = ".";
  CLI::App* cdf_cmd =
      app.add_subcommand("cdf", "empirical CDFs from a results table");
  cdf_cmd->add_option("table", table_path, "results.csv from a campaign")
      ->required();
  cdf_cmd->add_option("--metric", metric, "rate | ipd | sar");
  cdf_cmd->add_option("--group-by", group_by,
                      "comma list of scheme,deployment,direction,sweep_k,sweep_e");
  cdf_cmd->add_option("--out-dir", cdf_out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return run_campaign_cmd(run_args, false);
    if (sweep_cmd->parsed()) return run_campaign_cmd(run_args, true);
    if (cdf_cmd->parsed()) {
      const cfemf::ResultTable table = cfemf::ResultTable::read_csv(table_path);
      std::vector<std::string> keys;
      std::stringstream ss(group_by);
      std::string key;
      while (std::getline(ss, key, ','))
        if (!key.empty()) keys.push_back(key);
      const auto files = cfemf::emit_cdf(table, metric, keys, cdf_out_dir);
      for (const auto& f : files) std::cout << "wrote " << f << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
