// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <iosfwd>
#include <vector>

#include <armadillo>

#include "cfemf/convex_core.hpp"
#include "cfemf/metrics.hpp"

namespace cfemf {

/// DL max-min problem in amplitude variables phi = sqrt(p), restricted to
/// active links. gains(k, j) holds the channel-beam products of user j's
/// transmission as seen at user k, over j's serving APs; with conjugate beams
/// on own estimates the desired entries gains(k, k) are real non-negative.
struct DlProblemData {
  int num_users = 0;
  int num_aps = 0;
  int dim = 0;                      // stacked amplitude dimension, sum of N_k
  std::vector<arma::uvec> active;   // per user: serving AP indices, ascending
  std::vector<arma::uword> offset;  // per user: start in the stacked vector
  arma::field<arma::cx_vec> gains;  // (K, K)
  arma::vec budgets;                // M, per-AP power
  arma::vec ipd_caps;               // K, +inf disables the exposure constraint
  arma::vec sigma2;                 // K
  double ipd_scale = 0.0;           // 4 pi / lambda^2

  arma::vec user_block(const arma::vec& phi, int user) const;
  /// Design-channel SINR of every user at the given stacked amplitudes.
  arma::vec sinr(const arma::vec& phi) const;
  /// Design-channel exposure of every user, ipd_scale * sum_j |g^T phi_j|^2.
  arma::vec exposure(const arma::vec& phi) const;
  /// Per-AP power use sum_k phi_{k,m}^2.
  arma::vec ap_power(const arma::vec& phi) const;
};

DlProblemData build_dl_problem(const arma::cx_cube& channels,
                               const BeamformerSet& beams,
                               const arma::umat& association,
                               const arma::vec& ipd_caps,
                               const arma::vec& budgets, double noise_power_w,
                               double wavelength_m);

/// First-order minorant of the desired-signal quadratic f(phi) = |g^T phi|^2
/// at phi_prev: value f(phi_prev) and gradient 2 Re{g g^H} phi_prev. The
/// affine form value + gradient^T (phi - phi_prev) lower-bounds f everywhere
/// and is tight at phi_prev.
struct AffineMinorant {
  double value = 0.0;
  arma::vec gradient;
};
AffineMinorant linearize_desired(const arma::vec& phi_prev_k,
                                 const arma::cx_vec& g_k);

/// One convexified feasibility subproblem at a fixed SINR target: budget and
/// exposure constraints plus the target constraint with the desired term
/// replaced by its minorant at phi_prev. Delegates to qcqp_feasibility,
/// warm-started at `start` (phi_prev when absent).
FeasibilityResult sco_subproblem(const DlProblemData& data,
                                 const arma::vec& phi_prev, double gamma_target,
                                 const QcqpOptions& options = {},
                                 QcqpStats* stats = nullptr,
                                 const arma::vec* start = nullptr);

enum class DlNesting { bisection_inside, bisection_outside };

struct DlSolveOptions {
  double tol_sco = 1e-3;     // relative, on the SINR target
  double tol_bisect = 1e-4;  // relative, inside each bisection
  int max_outer = 50;
  DlNesting nesting = DlNesting::bisection_inside;
  std::ostream* trace_out = nullptr;
};

struct DlTraceRow {
  int outer_iter = 0;
  double gamma = 0.0;
  double phase1_margin = 0.0;
  int newton_iters = 0;
};

struct DlSolveResult {
  arma::mat powers;  // K x M (W)
  double gamma = 0.0;
  double min_rate_bps = 0.0;
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<DlTraceRow> trace;
};

/// Successive convex optimization: each outer iteration re-linearizes at the
/// previous point and maximizes the common SINR target by bisection over
/// convex feasibility subproblems. The target sequence is non-decreasing; the
/// loop stops on relative progress below tol_sco or at max_outer.
DlSolveResult solve_dl_maxmin(const DlProblemData& data, const RateParams& rp,
                              const DlSolveOptions& options = {});

}  // namespace cfemf
