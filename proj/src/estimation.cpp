// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfemf/estimation.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace cfemf {

double PilotBook::gram2(int j, int k) const {
  const std::complex<double> inner =
      arma::cdot(pilots.col(assignment(j)), pilots.col(assignment(k)));
  return std::norm(inner);
}

namespace {

// Greedy pairing: largest-distance pairs first. Used for the default
// two-users-per-pilot layout.
arma::uvec pair_users_max_distance(const arma::mat& positions, double side, int tau_p) {
  const int K = static_cast<int>(positions.n_rows);
  struct Pair {
    double dist;
    int a, b;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(K) * (K - 1) / 2);
  for (int a = 0; a < K; ++a)
    for (int b = a + 1; b < K; ++b) {
      const arma::vec2 pa = {positions(a, 0), positions(a, 1)};
      const arma::vec2 pb = {positions(b, 0), positions(b, 1)};
      pairs.push_back({torus_distance(pa, pb, side), a, b});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    return std::tie(y.dist, x.a, x.b) < std::tie(x.dist, y.a, y.b);
  });

  arma::uvec assignment(K);
  assignment.fill(tau_p);  // sentinel: unassigned
  int next_pilot = 0;
  for (const Pair& p : pairs) {
    if (next_pilot >= tau_p) break;
    if (assignment(p.a) == static_cast<arma::uword>(tau_p) &&
        assignment(p.b) == static_cast<arma::uword>(tau_p)) {
      assignment(p.a) = assignment(p.b) = next_pilot++;
    }
  }
  for (int k = 0; k < K; ++k)  // odd leftover user, if any
    if (assignment(k) == static_cast<arma::uword>(tau_p))
      assignment(k) = next_pilot++ % tau_p;
  return assignment;
}

// Sequential greedy grouping for sharing factors above two: each user joins
// the non-full group maximizing its minimum distance to current members.
arma::uvec group_users_greedy(const arma::mat& positions, double side, int tau_p,
                              int group_cap) {
  const int K = static_cast<int>(positions.n_rows);
  arma::uvec assignment(K);
  std::vector<std::vector<int>> groups(tau_p);
  for (int k = 0; k < K; ++k) {
    int best_g = -1;
    double best_score = -1.0;
    for (int g = 0; g < tau_p; ++g) {
      if (static_cast<int>(groups[g].size()) >= group_cap) continue;
      double score = std::numeric_limits<double>::infinity();
      for (int member : groups[g]) {
        const arma::vec2 pk = {positions(k, 0), positions(k, 1)};
        const arma::vec2 pm = {positions(member, 0), positions(member, 1)};
        score = std::min(score, torus_distance(pk, pm, side));
      }
      if (score > best_score) {
        best_score = score;
        best_g = g;
      }
    }
    if (best_g < 0) throw std::logic_error("assign_pilots: no group capacity left");
    groups[best_g].push_back(k);
    assignment(k) = best_g;
  }
  return assignment;
}

}  // namespace

PilotBook assign_pilots(int num_users, int tau_p, const arma::mat& user_positions,
                        double area_side_m, PilotPairing pairing, Rng* rng) {
  if (num_users < 1 || tau_p < 1)
    throw std::invalid_argument("assign_pilots: counts must be >= 1");
  if (static_cast<int>(user_positions.n_rows) != num_users)
    throw std::invalid_argument("assign_pilots: position/user count mismatch");
  if (tau_p > num_users)
    std::cerr << "assign_pilots: warning: " << tau_p << " pilots for "
              << num_users << " users wastes " << (tau_p - num_users)
              << " symbols\n";

  PilotBook book;
  book.pilots = arma::cx_mat(arma::eye<arma::mat>(tau_p, tau_p),
                             arma::zeros<arma::mat>(tau_p, tau_p));

  const int share = (num_users + tau_p - 1) / tau_p;  // ceil(K / tau_p)
  if (share <= 1) {
    book.assignment = arma::regspace<arma::uvec>(0, num_users - 1);
  } else if (pairing == PilotPairing::random) {
    if (rng == nullptr)
      throw std::invalid_argument("assign_pilots: random pairing needs an rng");
    std::vector<int> perm(num_users);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = num_users - 1; i > 0; --i)
      std::swap(perm[i], perm[static_cast<int>(rng->uniform() * (i + 1))]);
    book.assignment.set_size(num_users);
    for (int i = 0; i < num_users; ++i)
      book.assignment(perm[i]) = i % tau_p;
  } else if (share == 2) {
    book.assignment = pair_users_max_distance(user_positions, area_side_m, tau_p);
  } else {
    book.assignment = group_users_greedy(user_positions, area_side_m, tau_p, share);
  }
  return book;
}

PilotObservation simulate_pilot_phase(const arma::cx_cube& true_channels,
                                      const PilotBook& book,
                                      const arma::vec& pilot_power_w,
                                      double noise_power_w, Rng& rng) {
  const int L = static_cast<int>(true_channels.n_rows);
  const int M = static_cast<int>(true_channels.n_cols);
  const int K = static_cast<int>(true_channels.n_slices);
  if (static_cast<int>(pilot_power_w.n_elem) != K)
    throw std::invalid_argument("simulate_pilot_phase: pilot power shape mismatch");

  PilotObservation obs;
  obs.u.zeros(L, M, K);
  const double noise_std = std::sqrt(noise_power_w);

  for (int m = 0; m < M; ++m) {
    // one projected noise vector per pilot direction at this AP
    arma::cx_mat noise(L, book.tau_p());
    for (int t = 0; t < book.tau_p(); ++t)
      for (int l = 0; l < L; ++l) noise(l, t) = noise_std * rng.cnormal();

    for (int k = 0; k < K; ++k) {
      arma::cx_vec u = noise.col(book.assignment(k));
      for (int j = 0; j < K; ++j) {
        const std::complex<double> corr =
            arma::cdot(book.pilot(k), book.pilot(j));
        if (std::norm(corr) == 0.0) continue;
        u += std::sqrt(pilot_power_w(j)) * corr * true_channels.slice(j).col(m);
      }
      obs.u.slice(k).col(m) = u;
    }
  }
  return obs;
}

arma::cx_mat observation_covariance(const arma::field<arma::cx_mat>& covariances,
                                    int user, int ap, const PilotBook& book,
                                    const arma::vec& pilot_power_w,
                                    double noise_power_w) {
  const int K = static_cast<int>(covariances.n_rows);
  const int L = static_cast<int>(covariances(0, 0).n_rows);
  arma::cx_mat d(L, L, arma::fill::zeros);
  for (int j = 0; j < K; ++j) {
    const double g2 = book.gram2(j, user);
    if (g2 == 0.0) continue;
    d += pilot_power_w(j) * g2 * covariances(j, ap);
  }
  d.diag() += noise_power_w;
  return d;
}

arma::cx_vec lmmse_estimate(const arma::cx_vec& u, const arma::cx_mat& cov_k,
                            const arma::cx_mat& cov_obs, double pilot_power_w) {
  const double condition = arma::cond(cov_obs);
  if (!std::isfinite(condition) || condition > 1e12)
    throw std::runtime_error(
        "lmmse_estimate: observation covariance is numerically singular");
  return std::sqrt(pilot_power_w) * cov_k * arma::solve(cov_obs, u);
}

void estimate_channels(ChannelSet& channels, const PilotBook& book,
                       const arma::vec& pilot_power_w, double noise_power_w,
                       std::uint64_t seed) {
  const int M = static_cast<int>(channels.true_channels.n_cols);
  const int K = static_cast<int>(channels.true_channels.n_slices);

  Rng rng(seed);
  const PilotObservation obs =
      simulate_pilot_phase(channels.true_channels, book, pilot_power_w,
                           noise_power_w, rng);

  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m) {
      const arma::cx_mat d = observation_covariance(
          channels.covariances, k, m, book, pilot_power_w, noise_power_w);
      channels.estimates.slice(k).col(m) = lmmse_estimate(
          obs.u.slice(k).col(m), channels.covariances(k, m), d, pilot_power_w(k));
    }
}

}  // namespace cfemf
