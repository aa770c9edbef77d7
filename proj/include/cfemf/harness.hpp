// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cfemf/baselines.hpp"
#include "cfemf/dl_opt.hpp"
#include "cfemf/estimation.hpp"
#include "cfemf/scenario.hpp"

namespace cfemf {

enum class Direction { dl, ul };

std::string to_string(Direction direction);
std::string to_string(DeploymentMode mode);

/// One Monte-Carlo campaign: base network, exposure caps, schemes to run, and
/// optional sweep grids over the user count and the SAR cap.
struct CampaignSpec {
  NetworkConfig base;
  double ipd_cap_w_m2 = 10.0;
  double sar_cap_w_kg = 0.08;
  double sar_coeff_per_kg = 8.0;
  int num_body_parts = 1;

  std::vector<SchemeId> schemes = {SchemeId::opc, SchemeId::uo, SchemeId::upc,
                                   SchemeId::ppc, SchemeId::fpc};
  std::vector<DeploymentMode> deployments = {DeploymentMode::cell_free,
                                             DeploymentMode::multi_cell};
  std::vector<Direction> directions = {Direction::dl, Direction::ul};
  int num_drops = 100;
  std::uint64_t master_seed = 1;

  std::vector<int> sweep_num_users;     // empty: no sweep
  std::vector<double> sweep_sar_caps;   // empty: no sweep

  double fpc_exponent = 0.5;
  bool baselines_respect_emf = false;
  PilotPairing pilot_pairing = PilotPairing::max_distance;
  bool auto_pilot_length = true;  // tau_p = ceil(K/2), tau_d = tau_u = (tau_c - tau_p)/2

  DlSolveOptions dl_options;
  double ul_bisect_tol = 1e-4;

  int threads = 0;              // 0: hardware concurrency
  bool record_timings = false;  // keep solve_time_s zero so output is bit-stable
  bool verbose = false;
};

struct ResultRow {
  int drop = 0;
  DeploymentMode deployment = DeploymentMode::cell_free;
  Direction direction = Direction::dl;
  SchemeId scheme = SchemeId::opc;
  int user = 0;
  double rate_bps = 0.0;
  double ipd_w_m2 = 0.0;
  double sar_w_kg = 0.0;
  double solve_time_s = 0.0;
  int sweep_k = 0;
  double sweep_e = 0.0;
  bool failed = false;  // serialized as a nan rate
};

struct ResultTable {
  std::vector<ResultRow> rows;

  std::string to_csv() const;
  void write_csv(const std::string& path) const;
  static ResultTable from_csv(std::istream& in);
  static ResultTable read_csv(const std::string& path);
};

/// Parses the line-oriented `key = value` format (# comments). Unknown keys
/// and constraint-violating values raise std::runtime_error with the line
/// number. An empty file yields the default campaign.
CampaignSpec parse_config(std::istream& in, const std::string& name = "<config>");
CampaignSpec load_config(const std::string& path);

/// Runs every (sweep point, drop, deployment, direction, scheme) combination,
/// evaluating the designed powers on the true channels. Deterministic given
/// the spec; drops are dispatched to a worker pool. A scheme inapplicable to
/// a direction (ppc in UL, fpc in DL) contributes no rows. Individual solve
/// failures are recorded as failure rows and the campaign continues.
ResultTable run_campaign(const CampaignSpec& spec);

/// Writes per-group empirical-CDF CSVs (value,cdf; sorted ascending) plus a
/// gnuplot script referencing them. metric is one of rate|ipd|sar; group keys
/// come from scheme|deployment|direction|sweep_k|sweep_e. Returns the paths
/// written. Empty groups are skipped with a warning on stderr.
std::vector<std::string> emit_cdf(const ResultTable& table, const std::string& metric,
                                  const std::vector<std::string>& group_by,
                                  const std::string& out_dir);

}  // namespace cfemf
