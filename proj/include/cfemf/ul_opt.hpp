// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <armadillo>

#include "cfemf/convex_core.hpp"
#include "cfemf/metrics.hpp"
#include "cfemf/scenario.hpp"

namespace cfemf {

/// Precomputed quadratic terms of the UL SINR plus per-user power caps.
/// SAR caps are linear in q and fold into q_max = min(Q, min_n E_n/b_n).
struct UlGainTable {
  arma::vec desired;  // K: |sum_m a f^H h_k|^2
  arma::mat cross;    // K x K, row k: gains of other users into user k's combiner
  arma::vec noise;    // K: sum_m a eta^2 ||f||^2
  arma::vec q_max;    // K
};

/// Builds the table from channels (normally estimates) and filters. Throws
/// std::runtime_error when some user has zero combined gain (degenerate).
UlGainTable build_gain_table(const arma::cx_cube& channels,
                             const arma::cx_cube& filters,
                             const arma::umat& association, double noise_power_w,
                             const ExposureLimits& limits, double ul_budget_w,
                             bool include_sar_caps);

/// Feasibility of a common SINR target via the capped standard-interference
/// iteration q <- min(q_max, gamma (G q + N)/G_kk) from q = 0. The iterate
/// sequence is monotone non-decreasing and bounded; the fixed point attains
/// the target for every user iff the target is feasible.
FeasibilityResult ul_feasible(double gamma_target, const UlGainTable& table,
                              int max_iters = 100000, double change_tol = 1e-12);

struct UlSolveResult {
  arma::vec q;
  double gamma = 0.0;
  double min_rate_bps = 0.0;
  SolveStatus status = SolveStatus::numerical_failure;
  int oracle_calls = 0;
  std::vector<std::pair<double, bool>> bisect_trace;
};

/// Global max-min solve: bisection over the SINR target on [0, gamma_ub] with
/// gamma_ub = max_k q_max_k G_kk / N_k, then a balance/scale-up polish that
/// drives the target to the feasibility boundary so the limiting user sits
/// exactly on its power cap.
UlSolveResult solve_ul_maxmin(const UlGainTable& table, const RateParams& rp,
                              double bisect_tol = 1e-4);

}  // namespace cfemf
