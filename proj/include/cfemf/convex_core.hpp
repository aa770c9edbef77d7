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
#include <functional>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

namespace cfemf {

enum class SolveStatus { feasible, infeasible, numerical_failure };

/// Convex constraint x^T Q x + l^T x + c <= rhs with Q symmetric PSD.
/// An empty Q denotes an affine constraint.
struct QuadraticConstraint {
  arma::mat Q;
  arma::vec l;
  double c = 0.0;
  double rhs = 0.0;

  /// Normalization used for feasibility margins; keeps constraints whose rhs
  /// span many orders of magnitude comparable inside one phase-I objective.
  double scale() const { return std::max(std::abs(rhs), 1.0); }
  double eval(const arma::vec& x) const;
  arma::vec grad(const arma::vec& x) const;
};

struct FeasibilityResult {
  double margin = std::numeric_limits<double>::infinity();  // max normalized violation
  arma::vec point;
  SolveStatus status = SolveStatus::numerical_failure;
};

struct QcqpOptions {
  double feasibility_tol = 1e-6;    // on normalized margins
  double barrier_t0 = 1.0;
  double barrier_mult = 10.0;
  double barrier_gap = 1e-8;        // stop when m/t < gap
  double newton_tol = 1e-9;         // on the Newton decrement
  int max_outer = 64;
  int max_backtrack = 50;
  int max_newton_per_stage = 256;
  bool validate_psd = false;        // eigenvalue check on every Q (slow)
  // Stop the schedule as soon as the verdict is certified: s <= 0 proves a
  // feasible point in hand, s - 2m/t > feasibility_tol bounds the optimum
  // away from feasibility. Off by default; the full schedule then refines the
  // phase-I optimum itself.
  bool stop_at_verdict = false;
  std::ostream* trace = nullptr;
};

struct QcqpStats {
  int newton_iters = 0;
  int outer_iters = 0;
  std::vector<double> stage_objectives;  // phase-I s after each barrier stage
};

/// Phase-I feasibility for a convex QCQP: minimize s subject to
/// (g_i(x) - rhs_i)/scale_i <= s via a log-barrier interior-point method with
/// damped Newton steps. Feasible iff the optimal s is <= feasibility_tol, in
/// which case the returned point satisfies every constraint within
/// tol * scale_i.
FeasibilityResult qcqp_feasibility(const std::vector<QuadraticConstraint>& constraints,
                                   int dim, const arma::vec* start = nullptr,
                                   const QcqpOptions& options = {},
                                   QcqpStats* stats = nullptr);

struct BisectionResult {
  double value = 0.0;
  arma::vec point;
  bool has_point = false;
  SolveStatus status = SolveStatus::infeasible;
  int oracle_calls = 0;
  std::vector<std::pair<double, bool>> trace;  // (target, feasible)
};

/// Largest target in [lo, hi] (within tol, relative) whose oracle call is
/// feasible, plus the witnessing point. The oracle must be monotone: feasible
/// below any feasible target. An infeasible lo yields status infeasible; a
/// feasible probe above an infeasible one yields numerical_failure.
BisectionResult bisection(const std::function<FeasibilityResult(double)>& oracle,
                          double lo, double hi, double tol);

}  // namespace cfemf
