// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfemf/ul_opt.hpp"

#include <cmath>
#include <stdexcept>

namespace cfemf {

namespace {

arma::vec ul_sinr_from_table(const UlGainTable& table, const arma::vec& q) {
  const arma::vec interference = table.cross * q + table.noise;
  return (table.desired % q) / interference;
}

}  // namespace

UlGainTable build_gain_table(const arma::cx_cube& channels,
                             const arma::cx_cube& filters,
                             const arma::umat& association, double noise_power_w,
                             const ExposureLimits& limits, double ul_budget_w,
                             bool include_sar_caps) {
  const int M = static_cast<int>(channels.n_cols);
  const int K = static_cast<int>(channels.n_slices);

  UlGainTable table;
  table.desired.zeros(K);
  table.cross.zeros(K, K);
  table.noise.zeros(K);
  table.q_max.set_size(K);

  for (int k = 0; k < K; ++k) {
    arma::cx_vec combined(K, arma::fill::zeros);
    for (int m = 0; m < M; ++m) {
      if (association(k, m) == 0) continue;
      const arma::cx_vec f = filters.slice(k).col(m);
      table.noise(k) += noise_power_w * std::pow(arma::norm(f), 2);
      for (int j = 0; j < K; ++j)
        combined(j) += arma::cdot(f, channels.slice(j).col(m));
    }
    for (int j = 0; j < K; ++j) {
      if (j == k)
        table.desired(k) = std::norm(combined(k));
      else
        table.cross(k, j) = std::norm(combined(j));
    }
    table.q_max(k) =
        include_sar_caps ? limits.ul_power_cap(k, ul_budget_w) : ul_budget_w;
  }

  if (table.desired.min() <= 0.0)
    throw std::runtime_error("build_gain_table: user with zero combined gain");
  if (table.noise.min() <= 0.0)
    throw std::runtime_error("build_gain_table: user with zero noise term");
  return table;
}

FeasibilityResult ul_feasible(double gamma_target, const UlGainTable& table,
                              int max_iters, double change_tol) {
  if (gamma_target < 0)
    throw std::invalid_argument("ul_feasible: negative SINR target");
  const int K = static_cast<int>(table.desired.n_elem);

  FeasibilityResult result;
  if (gamma_target == 0.0) {
    result.point = arma::vec(K, arma::fill::zeros);
    result.margin = 0.0;
    result.status = SolveStatus::feasible;
    return result;
  }

  arma::vec q(K, arma::fill::zeros);
  bool converged = false;
  for (int it = 0; it < max_iters; ++it) {
    const arma::vec needed =
        gamma_target * (table.cross * q + table.noise) / table.desired;
    const arma::vec q_next = arma::min(table.q_max, needed);
    if (arma::any(q_next < q - 1e-15))
      throw std::logic_error("ul_feasible: interference iteration not monotone");
    const double change = arma::abs(q_next - q).max();
    q = q_next;
    if (change <= change_tol * std::max(q.max(), 1e-300)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    result.point = q;
    result.status = SolveStatus::numerical_failure;
    return result;
  }

  const arma::vec sinr = ul_sinr_from_table(table, q);
  result.point = q;
  result.margin = 1.0 - sinr.min() / gamma_target;  // relative shortfall
  result.status = sinr.min() >= gamma_target * (1.0 - 1e-9)
                      ? SolveStatus::feasible
                      : SolveStatus::infeasible;
  return result;
}

UlSolveResult solve_ul_maxmin(const UlGainTable& table, const RateParams& rp,
                              double bisect_tol) {
  const int K = static_cast<int>(table.desired.n_elem);
  const double gamma_ub = (table.q_max % table.desired / table.noise).max();

  const auto oracle = [&](double gamma) { return ul_feasible(gamma, table); };
  const BisectionResult bis = bisection(oracle, 0.0, gamma_ub, bisect_tol);

  UlSolveResult result;
  result.oracle_calls = bis.oracle_calls;
  result.bisect_trace = bis.trace;
  if (bis.status == SolveStatus::numerical_failure) {
    result.status = SolveStatus::numerical_failure;
    result.q = arma::vec(K, arma::fill::zeros);
    return result;
  }

  // Polish to the feasibility boundary: rebalance at the achieved minimum,
  // then scale until the tightest user sits exactly on its cap. Every SINR is
  // non-decreasing under a common upscaling, so the minimum never drops. The
  // all-caps point is always feasible and recovers the optimum even when the
  // bisection bracket was loose (gamma_ub can sit orders of magnitude above
  // the optimum on heterogeneous drops).
  arma::vec q = table.q_max;
  double gamma = ul_sinr_from_table(table, q).min();
  if (bis.has_point && bis.value > gamma) {
    q = bis.point;
    gamma = bis.value;
  }

  for (int round = 0; round < 200; ++round) {
    const arma::uword pivot = (q / table.q_max).index_max();
    const double factor = table.q_max(pivot) / q(pivot);
    if (!std::isfinite(factor) || factor <= 0.0) break;
    q *= factor;
    q(pivot) = table.q_max(pivot);  // exact, immune to rounding
    const double gamma_next = ul_sinr_from_table(table, q).min();
    const FeasibilityResult balanced = ul_feasible(gamma_next, table);
    if (balanced.status != SolveStatus::feasible) break;  // keep the scaled point
    const bool done = gamma_next - gamma <= 1e-12 * std::max(1.0, gamma_next);
    gamma = gamma_next;
    q = balanced.point;
    if (done) break;
  }
  // final point: the balanced allocation scaled so a cap is met exactly
  {
    const arma::uword pivot = (q / table.q_max).index_max();
    const double factor = table.q_max(pivot) / q(pivot);
    if (std::isfinite(factor) && factor > 0.0) {
      q *= factor;
      q(pivot) = table.q_max(pivot);
      gamma = ul_sinr_from_table(table, q).min();
    }
  }

  result.q = q;
  result.gamma = gamma;
  result.min_rate_bps = rate(gamma, rp);
  result.status = SolveStatus::feasible;
  return result;
}

}  // namespace cfemf
