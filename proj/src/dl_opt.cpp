// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfemf/dl_opt.hpp"

#include <cmath>
#include <complex>
#include <ostream>
#include <stdexcept>

namespace cfemf {

arma::vec DlProblemData::user_block(const arma::vec& phi, int user) const {
  return phi.subvec(offset[user], offset[user] + active[user].n_elem - 1);
}

arma::vec DlProblemData::sinr(const arma::vec& phi) const {
  arma::vec out(num_users);
  for (int k = 0; k < num_users; ++k) {
    double interference = 0.0;
    for (int j = 0; j < num_users; ++j) {
      const double term = std::norm(
          arma::dot(arma::conv_to<arma::cx_vec>::from(user_block(phi, j)),
                    gains(k, j)));
      if (j == k)
        out(k) = term;
      else
        interference += term;
    }
    out(k) /= interference + sigma2(k);
  }
  return out;
}

arma::vec DlProblemData::exposure(const arma::vec& phi) const {
  arma::vec xi(num_users, arma::fill::zeros);
  for (int k = 0; k < num_users; ++k) {
    for (int j = 0; j < num_users; ++j)
      xi(k) += std::norm(
          arma::dot(arma::conv_to<arma::cx_vec>::from(user_block(phi, j)),
                    gains(k, j)));
    xi(k) *= ipd_scale;
  }
  return xi;
}

arma::vec DlProblemData::ap_power(const arma::vec& phi) const {
  arma::vec used(num_aps, arma::fill::zeros);
  for (int k = 0; k < num_users; ++k) {
    const arma::vec block = user_block(phi, k);
    for (arma::uword i = 0; i < active[k].n_elem; ++i)
      used(active[k](i)) += block(i) * block(i);
  }
  return used;
}

DlProblemData build_dl_problem(const arma::cx_cube& channels,
                               const BeamformerSet& beams,
                               const arma::umat& association,
                               const arma::vec& ipd_caps,
                               const arma::vec& budgets, double noise_power_w,
                               double wavelength_m) {
  DlProblemData data;
  data.num_users = static_cast<int>(channels.n_slices);
  data.num_aps = static_cast<int>(channels.n_cols);
  data.budgets = budgets;
  data.ipd_caps = ipd_caps;
  data.sigma2 = arma::vec(data.num_users, arma::fill::value(noise_power_w));
  data.ipd_scale = 4.0 * kPi / (wavelength_m * wavelength_m);

  data.active.resize(data.num_users);
  data.offset.resize(data.num_users);
  arma::uword cursor = 0;
  for (int k = 0; k < data.num_users; ++k) {
    data.active[k] = arma::find(association.row(k).t() == 1);
    data.offset[k] = cursor;
    cursor += data.active[k].n_elem;
  }
  data.dim = static_cast<int>(cursor);

  data.gains.set_size(data.num_users, data.num_users);
  for (int k = 0; k < data.num_users; ++k)
    for (int j = 0; j < data.num_users; ++j) {
      arma::cx_vec g(data.active[j].n_elem);
      for (arma::uword i = 0; i < data.active[j].n_elem; ++i) {
        const arma::uword m = data.active[j](i);
        g(i) = arma::cdot(channels.slice(k).col(m), beams.beams.slice(j).col(m));
      }
      data.gains(k, j) = g;
    }
  return data;
}

AffineMinorant linearize_desired(const arma::vec& phi_prev_k,
                                 const arma::cx_vec& g_k) {
  if (phi_prev_k.n_elem != g_k.n_elem)
    throw std::invalid_argument("linearize_desired: dimension mismatch");
  const std::complex<double> inner =
      arma::dot(arma::conv_to<arma::cx_vec>::from(phi_prev_k), g_k);
  AffineMinorant minorant;
  minorant.value = std::norm(inner);
  // gradient of |g^T phi|^2 is 2 Re{g g^H} phi = 2 Re{conj(g) (g^T phi)}
  minorant.gradient = 2.0 * arma::real(arma::conj(g_k) * inner);
  return minorant;
}

namespace {

// Scatter Re{conj(g) g^T} for user j's block into an n x n matrix. PSD by
// construction: x^T Re{conj(g) g^T} x = |g^T x|^2 for real x.
void add_gram_block(arma::mat& Q, const DlProblemData& data, int j,
                    const arma::cx_vec& g, double weight) {
  const arma::uword off = data.offset[j];
  const arma::uword n = g.n_elem;
  for (arma::uword a = 0; a < n; ++a)
    for (arma::uword b = 0; b < n; ++b)
      Q(off + a, off + b) += weight * std::real(std::conj(g(a)) * g(b));
}

std::vector<QuadraticConstraint> assemble_constraints(const DlProblemData& data,
                                                      const arma::vec& phi_prev,
                                                      double gamma_target) {
  std::vector<QuadraticConstraint> constraints;
  const int n = data.dim;
  const int K = data.num_users;

  // non-negative amplitudes
  for (int i = 0; i < n; ++i) {
    QuadraticConstraint con;
    con.l = arma::vec(n, arma::fill::zeros);
    con.l(i) = -1.0;
    constraints.push_back(std::move(con));
  }

  // per-AP budgets over the users the AP serves
  for (int m = 0; m < data.num_aps; ++m) {
    arma::mat Q(n, n, arma::fill::zeros);
    bool serves = false;
    for (int k = 0; k < K; ++k) {
      const arma::uvec hit = arma::find(data.active[k] == static_cast<arma::uword>(m));
      if (hit.is_empty()) continue;
      serves = true;
      const arma::uword idx = data.offset[k] + hit(0);
      Q(idx, idx) = 1.0;
    }
    if (!serves) continue;
    QuadraticConstraint con;
    con.Q = std::move(Q);
    con.l = arma::vec(n, arma::fill::zeros);
    con.rhs = data.budgets(m);
    constraints.push_back(std::move(con));
  }

  // exposure caps (skipped when infinite)
  for (int k = 0; k < K; ++k) {
    if (!std::isfinite(data.ipd_caps(k))) continue;
    arma::mat Q(n, n, arma::fill::zeros);
    for (int j = 0; j < K; ++j)
      add_gram_block(Q, data, j, data.gains(k, j), data.ipd_scale);
    QuadraticConstraint con;
    con.Q = std::move(Q);
    con.l = arma::vec(n, arma::fill::zeros);
    con.rhs = data.ipd_caps(k);
    constraints.push_back(std::move(con));
  }

  // SINR target with the desired quadratic replaced by its minorant at
  // phi_prev; scaled by sigma^2 so margins are O(1) next to the others.
  for (int k = 0; k < K; ++k) {
    const double inv_s2 = 1.0 / data.sigma2(k);
    arma::mat Q(n, n, arma::fill::zeros);
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      add_gram_block(Q, data, j, data.gains(k, j), gamma_target * inv_s2);
    }
    const AffineMinorant minorant =
        linearize_desired(data.user_block(phi_prev, k), data.gains(k, k));
    arma::vec l(n, arma::fill::zeros);
    l.subvec(data.offset[k], data.offset[k] + data.active[k].n_elem - 1) =
        -inv_s2 * minorant.gradient;
    QuadraticConstraint con;
    con.Q = std::move(Q);
    con.l = std::move(l);
    con.c = gamma_target +
            inv_s2 * (arma::dot(minorant.gradient, data.user_block(phi_prev, k)) -
                      minorant.value);
    constraints.push_back(std::move(con));
  }
  return constraints;
}

// Interference-free upper bound on the achievable common SINR target:
// |g^T phi|^2 <= ||g||^2 sum of serving budgets, and the minorant never
// exceeds the quadratic it bounds.
double sinr_upper_bound(const DlProblemData& data) {
  double ub = std::numeric_limits<double>::infinity();
  for (int k = 0; k < data.num_users; ++k) {
    double budget_sum = 0.0;
    for (arma::uword i = 0; i < data.active[k].n_elem; ++i)
      budget_sum += data.budgets(data.active[k](i));
    const double g2 = std::pow(arma::norm(data.gains(k, k)), 2);
    ub = std::min(ub, g2 * budget_sum / data.sigma2(k));
  }
  return ub;
}

// Uniform split of each AP budget over its served users, scaled down to meet
// every finite exposure cap. Feasible by construction.
arma::vec initial_point(const DlProblemData& data) {
  arma::vec phi(data.dim, arma::fill::zeros);
  arma::vec served(data.num_aps, arma::fill::zeros);
  for (int k = 0; k < data.num_users; ++k)
    for (arma::uword i = 0; i < data.active[k].n_elem; ++i)
      served(data.active[k](i)) += 1.0;
  for (int k = 0; k < data.num_users; ++k)
    for (arma::uword i = 0; i < data.active[k].n_elem; ++i) {
      const arma::uword m = data.active[k](i);
      phi(data.offset[k] + i) = std::sqrt(data.budgets(m) / served(m));
    }

  const arma::vec xi = data.exposure(phi);
  double shrink = 1.0;
  for (int k = 0; k < data.num_users; ++k)
    if (std::isfinite(data.ipd_caps(k)) && xi(k) > 0.0)
      shrink = std::min(shrink, std::sqrt(data.ipd_caps(k) / xi(k)));
  return shrink * phi;
}

// Largest downscale <= 1 restoring strict budget/exposure feasibility; the
// phase-I tolerance can leave violations of order 1e-6 * scale.
arma::vec enforce_caps(const DlProblemData& data, arma::vec phi) {
  phi = arma::clamp(phi, 0.0, std::numeric_limits<double>::infinity());
  double shrink = 1.0;
  const arma::vec used = data.ap_power(phi);
  for (int m = 0; m < data.num_aps; ++m)
    if (used(m) > data.budgets(m))
      shrink = std::min(shrink, std::sqrt(data.budgets(m) / used(m)));
  const arma::vec xi = data.exposure(phi);
  for (int k = 0; k < data.num_users; ++k)
    if (std::isfinite(data.ipd_caps(k)) && xi(k) > data.ipd_caps(k))
      shrink = std::min(shrink, std::sqrt(data.ipd_caps(k) / xi(k)));
  return shrink * phi;
}

arma::mat unstack_powers(const DlProblemData& data, const arma::vec& phi) {
  arma::mat p(data.num_users, data.num_aps, arma::fill::zeros);
  for (int k = 0; k < data.num_users; ++k)
    for (arma::uword i = 0; i < data.active[k].n_elem; ++i) {
      const double v = phi(data.offset[k] + i);
      p(k, data.active[k](i)) = v * v;
    }
  return p;
}

}  // namespace

FeasibilityResult sco_subproblem(const DlProblemData& data,
                                 const arma::vec& phi_prev, double gamma_target,
                                 const QcqpOptions& options, QcqpStats* stats,
                                 const arma::vec* start) {
  if (gamma_target < 0)
    throw std::invalid_argument("sco_subproblem: negative SINR target");
  const auto constraints = assemble_constraints(data, phi_prev, gamma_target);
  return qcqp_feasibility(constraints, data.dim, start ? start : &phi_prev,
                          options, stats);
}

DlSolveResult solve_dl_maxmin(const DlProblemData& data, const RateParams& rp,
                              const DlSolveOptions& options) {
  DlSolveResult result;
  const double global_ub = sinr_upper_bound(data);

  arma::vec phi = initial_point(data);
  double gamma = data.sinr(phi).min();
  if (!std::isfinite(gamma)) gamma = 0.0;

  if (global_ub <= 0.0 || gamma < 0.0) {  // degenerate: some user unreachable
    result.powers = unstack_powers(data, arma::vec(data.dim, arma::fill::zeros));
    result.gamma = 0.0;
    result.min_rate_bps = 0.0;
    result.status = SolveStatus::feasible;
    return result;
  }

  QcqpOptions qcqp_options;
  qcqp_options.trace = nullptr;
  // leave the barrier early once a probe is clearly feasible; only probes
  // near the bisection boundary need the margin resolved finely
  qcqp_options.early_exit_margin = -1e-3;

  SolveStatus status = SolveStatus::feasible;
  arma::vec warm = phi;  // carries the previous probe's interior point

  if (options.nesting == DlNesting::bisection_inside) {
    // Outer loop: refresh the linearization at the current point, then push
    // the target as high as the convexified constraints allow. Because the
    // minorant is tight at the anchor, the previous target stays feasible and
    // the target sequence never decreases.
    for (int outer = 0; outer < options.max_outer; ++outer) {
      const arma::vec phi_anchor = phi;
      int stage_newton = 0;
      double stage_margin = 0.0;
      const auto oracle = [&](double target) {
        QcqpStats stats;
        FeasibilityResult r =
            sco_subproblem(data, phi_anchor, target, qcqp_options, &stats, &warm);
        stage_newton += stats.newton_iters;
        stage_margin = r.margin;
        if (r.point.is_finite()) warm = r.point;
        return r;
      };

      // expanding bracket: most outer iterations move the target only a little
      double hi = std::min(global_ub, std::max(gamma * 4.0, 1e-8));
      BisectionResult bis = bisection(oracle, gamma, hi, options.tol_bisect);
      while (bis.status == SolveStatus::feasible && bis.value >= hi * (1.0 - 1e-12) &&
             hi < global_ub) {
        const double lo = hi;
        hi = std::min(global_ub, hi * 4.0);
        bis = bisection(oracle, lo, hi, options.tol_bisect);
      }

      if (bis.status == SolveStatus::numerical_failure) {
        status = SolveStatus::numerical_failure;
        break;
      }
      if (bis.status == SolveStatus::infeasible) break;  // keep the last iterate

      const double gamma_new = bis.value;
      if (bis.has_point)
        phi = arma::clamp(bis.point, 0.0, std::numeric_limits<double>::infinity());
      result.trace.push_back({outer, gamma_new, stage_margin, stage_newton});
      if (options.trace_out)
        *options.trace_out << "sco outer=" << outer << " gamma=" << gamma_new
                           << " margin=" << stage_margin
                           << " newton=" << stage_newton << '\n';

      const bool converged =
          gamma_new - gamma < options.tol_sco * (1.0 + gamma_new);
      gamma = std::max(gamma, gamma_new);
      if (converged) break;
    }
  } else {
    // Alternative nesting: one outer bisection whose oracle re-linearizes a
    // few times at fixed target before giving up.
    const auto oracle = [&](double target) {
      arma::vec anchor = phi;
      FeasibilityResult last;
      for (int attempt = 0; attempt < 8; ++attempt) {
        QcqpStats stats;
        last = sco_subproblem(data, anchor, target, qcqp_options, &stats);
        if (last.status == SolveStatus::feasible) return last;
        if (last.status == SolveStatus::numerical_failure || last.point.is_empty())
          return last;
        anchor = arma::clamp(last.point, 0.0,
                             std::numeric_limits<double>::infinity());
      }
      return last;
    };
    BisectionResult bis = bisection(oracle, 0.0, global_ub, options.tol_bisect);
    if (bis.status == SolveStatus::numerical_failure)
      status = SolveStatus::numerical_failure;
    if (bis.has_point) {
      phi = arma::clamp(bis.point, 0.0, std::numeric_limits<double>::infinity());
      gamma = std::max(0.0, bis.value);
    }
    result.trace.push_back({0, gamma, 0.0, 0});
  }

  // The interior-point tolerance can leave budget/exposure violations of
  // order 1e-6 of the constraint scale; one global downscale removes them at
  // a relative SINR cost far below the bisection tolerance.
  phi = enforce_caps(data, phi);

  result.powers = unstack_powers(data, phi);
  result.gamma = data.sinr(phi).min();
  if (!std::isfinite(result.gamma)) result.gamma = 0.0;
  result.min_rate_bps = rate(std::max(result.gamma, 0.0), rp);
  result.status = status;
  return result;
}

}  // namespace cfemf
