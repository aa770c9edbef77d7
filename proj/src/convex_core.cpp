// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfemf/convex_core.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace cfemf {

double QuadraticConstraint::eval(const arma::vec& x) const {
  double v = c + arma::dot(l, x);
  if (!Q.is_empty()) v += arma::dot(x, Q * x);
  return v;
}

arma::vec QuadraticConstraint::grad(const arma::vec& x) const {
  if (Q.is_empty()) return l;
  return 2.0 * (Q * x) + l;
}

namespace {

double max_normalized_margin(const std::vector<QuadraticConstraint>& constraints,
                             const arma::vec& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& con : constraints)
    worst = std::max(worst, (con.eval(x) - con.rhs) / con.scale());
  return worst;
}

}  // namespace

FeasibilityResult qcqp_feasibility(const std::vector<QuadraticConstraint>& constraints,
                                   int dim, const arma::vec* start,
                                   const QcqpOptions& options, QcqpStats* stats) {
  const int m = static_cast<int>(constraints.size());
  if (m == 0)
    return {0.0, start ? *start : arma::vec(dim, arma::fill::zeros),
            SolveStatus::feasible};

  for (const auto& con : constraints) {
    if (!con.Q.is_empty() &&
        (static_cast<int>(con.Q.n_rows) != dim || static_cast<int>(con.Q.n_cols) != dim))
      throw std::invalid_argument("qcqp_feasibility: constraint dimension mismatch");
    if (static_cast<int>(con.l.n_elem) != dim)
      throw std::invalid_argument("qcqp_feasibility: linear term dimension mismatch");
    if (options.validate_psd && !con.Q.is_empty()) {
      const arma::vec eig = arma::eig_sym(arma::symmatu(con.Q));
      if (eig.min() < -1e-10 * std::max(1.0, std::abs(eig.max())))
        throw std::invalid_argument("qcqp_feasibility: quadratic term is not PSD");
    }
  }

  // Phase-I over z = (x, s): minimize s subject to ghat_i(x) <= s, where
  // ghat_i is the scale-normalized constraint. Any x is admissible once s
  // exceeds all margins, so the barrier always starts strictly feasible.
  arma::vec x = start ? *start : arma::vec(dim, arma::fill::zeros);
  double s = max_normalized_margin(constraints, x) + 1.0;

  const auto margins = [&](const arma::vec& xx, double ss) {
    arma::vec d(m);
    for (int i = 0; i < m; ++i)
      d(i) = ss - (constraints[i].eval(xx) - constraints[i].rhs) / constraints[i].scale();
    return d;  // slack s - ghat_i; must stay positive inside the barrier
  };

  const auto barrier_value = [&](double t, const arma::vec& xx, double ss) {
    const arma::vec d = margins(xx, ss);
    if (d.min() <= 0.0) return std::numeric_limits<double>::infinity();
    return t * ss - arma::accu(arma::log(d));
  };

  double t = options.barrier_t0;
  SolveStatus run_status = SolveStatus::feasible;
  int total_newton = 0;
  int outer = 0;
  double prev_stage_s = std::numeric_limits<double>::infinity();

  for (; outer < options.max_outer; ++outer) {
    // Newton stage at fixed t
    for (int it = 0; it < options.max_newton_per_stage; ++it) {
      const arma::vec d = margins(x, s);
      arma::vec grad_x(dim, arma::fill::zeros);
      double grad_s = t;
      arma::mat hess_xx(dim, dim, arma::fill::zeros);
      arma::vec hess_xs(dim, arma::fill::zeros);
      double hess_ss = 0.0;

      for (int i = 0; i < m; ++i) {
        const double inv_d = 1.0 / d(i);
        const arma::vec gi = constraints[i].grad(x) / constraints[i].scale();
        grad_x += inv_d * gi;
        grad_s -= inv_d;
        if (!constraints[i].Q.is_empty())
          hess_xx += (2.0 * inv_d / constraints[i].scale()) * constraints[i].Q;
        hess_xx += (inv_d * inv_d) * (gi * gi.t());
        hess_xs -= (inv_d * inv_d) * gi;
        hess_ss += inv_d * inv_d;
      }

      arma::mat hess(dim + 1, dim + 1);
      hess.submat(0, 0, dim - 1, dim - 1) = hess_xx;
      hess.submat(0, dim, dim - 1, dim) = hess_xs;
      hess.submat(dim, 0, dim, dim - 1) = hess_xs.t();
      hess(dim, dim) = hess_ss;
      arma::vec grad(dim + 1);
      grad.head(dim) = grad_x;
      grad(dim) = grad_s;

      // The barrier Hessian spans ~t^2 in scale near convergence; skip the
      // rcond estimate and fall back to a ridge if the factorization fails.
      arma::vec step;
      const auto opts = arma::solve_opts::likely_sympd + arma::solve_opts::fast;
      if (!arma::solve(step, hess, -grad, opts)) {
        hess.diag() += 1e-12 * std::max(1.0, hess.diag().max());
        if (!arma::solve(step, hess, -grad, arma::solve_opts::fast)) {
          run_status = SolveStatus::numerical_failure;
          break;
        }
      }

      const double decrement = -arma::dot(grad, step) / 2.0;
      if (decrement <= options.newton_tol) break;

      // backtracking line search (Armijo)
      const double base = barrier_value(t, x, s);
      const double slope = arma::dot(grad, step);
      double alpha = 1.0;
      int bt = 0;
      for (; bt < options.max_backtrack; ++bt) {
        const arma::vec x_new = x + alpha * step.head(dim);
        const double s_new = s + alpha * step(dim);
        if (barrier_value(t, x_new, s_new) <= base + 0.25 * alpha * slope) {
          x = x_new;
          s = s_new;
          break;
        }
        alpha *= 0.5;
      }
      ++total_newton;
      if (bt == options.max_backtrack) {
        run_status = SolveStatus::numerical_failure;
        break;
      }
    }

    if (stats) stats->stage_objectives.push_back(s);
    if (options.trace)
      *options.trace << "qcqp stage t=" << t << " s=" << s
                     << " newton=" << total_newton << '\n';
    if (run_status == SolveStatus::numerical_failure) break;
    // the phase-I objective must not climb across stages
    if (s > prev_stage_s + 1e-9 * std::max(1.0, std::abs(prev_stage_s))) {
      run_status = SolveStatus::numerical_failure;
      break;
    }
    prev_stage_s = s;

    if (!std::isnan(options.early_exit_margin) && s <= options.early_exit_margin)
      break;
    if (static_cast<double>(m) / t < options.barrier_gap) break;
    t *= options.barrier_mult;
  }
  if (outer == options.max_outer) run_status = SolveStatus::numerical_failure;

  FeasibilityResult result;
  result.point = x;
  result.margin = max_normalized_margin(constraints, x);
  if (run_status == SolveStatus::numerical_failure)
    result.status = SolveStatus::numerical_failure;
  else
    result.status = result.margin <= options.feasibility_tol
                        ? SolveStatus::feasible
                        : SolveStatus::infeasible;
  if (stats) {
    stats->newton_iters = total_newton;
    stats->outer_iters = outer + 1;
  }
  return result;
}

BisectionResult bisection(const std::function<FeasibilityResult(double)>& oracle,
                          double lo, double hi, double tol) {
  if (hi < lo) throw std::invalid_argument("bisection: hi < lo");
  if (tol <= 0) throw std::invalid_argument("bisection: non-positive tolerance");

  BisectionResult result;
  double lowest_infeasible = std::numeric_limits<double>::infinity();

  const auto probe = [&](double target) {
    FeasibilityResult r = oracle(target);
    ++result.oracle_calls;
    result.trace.emplace_back(target, r.status == SolveStatus::feasible);
    if (r.status == SolveStatus::feasible && target > lowest_infeasible)
      result.status = SolveStatus::numerical_failure;  // non-monotone oracle
    if (r.status != SolveStatus::feasible)
      lowest_infeasible = std::min(lowest_infeasible, target);
    return r;
  };

  FeasibilityResult at_lo = probe(lo);
  if (at_lo.status == SolveStatus::numerical_failure) {
    result.status = SolveStatus::numerical_failure;
    result.value = lo;
    return result;
  }
  if (at_lo.status != SolveStatus::feasible) {
    result.status = SolveStatus::infeasible;
    result.value = lo;
    return result;
  }
  result.value = lo;
  result.point = at_lo.point;
  result.has_point = !at_lo.point.is_empty();
  result.status = SolveStatus::feasible;

  if (hi > lo) {
    FeasibilityResult at_hi = probe(hi);
    if (at_hi.status == SolveStatus::feasible) {
      result.value = hi;
      result.point = at_hi.point;
      result.has_point = !at_hi.point.is_empty();
      return result;
    }

    const double width_tol = tol * std::max(std::abs(hi), 1.0);
    double feasible_at = lo;
    double infeasible_at = hi;
    while (infeasible_at - feasible_at > width_tol) {
      const double mid = 0.5 * (feasible_at + infeasible_at);
      FeasibilityResult r = probe(mid);
      if (result.status == SolveStatus::numerical_failure) return result;
      if (r.status == SolveStatus::feasible) {
        feasible_at = mid;
        result.value = mid;
        result.point = r.point;
        result.has_point = !r.point.is_empty();
      } else {
        infeasible_at = mid;
      }
    }
  }
  return result;
}

}  // namespace cfemf
