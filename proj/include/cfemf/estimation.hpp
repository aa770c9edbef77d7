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
#include <cstdint>

#include "cfemf/channel.hpp"
#include "cfemf/rng.hpp"

namespace cfemf {

enum class PilotPairing { max_distance, random };

/// Orthonormal pilot set plus the user -> pilot map. Pilots are unit-norm and
/// mutually orthogonal, so the LMMSE expressions below need no length factor.
struct PilotBook {
  arma::cx_mat pilots;    // tau_p x tau_p, unitary columns
  arma::uvec assignment;  // K entries in [0, tau_p)

  int tau_p() const { return static_cast<int>(pilots.n_cols); }
  arma::cx_vec pilot(int user) const { return pilots.col(assignment(user)); }
  /// |t_j^H t_k|^2
  double gram2(int j, int k) const;
};

struct PilotObservation {
  arma::cx_cube u;  // L x M x K
};

/// Assigns pilots so that pilot-sharing users are far apart (greedy pairing on
/// wrap-around distance, largest pairs first). With tau_p >= K every user gets
/// a private pilot; tau_p > K additionally warns about the wasted symbols.
PilotBook assign_pilots(int num_users, int tau_p, const arma::mat& user_positions,
                        double area_side_m,
                        PilotPairing pairing = PilotPairing::max_distance,
                        Rng* rng = nullptr);

/// Projected pilot-phase observation per link:
///   u_{k,m} = sum_j sqrt(mu_j) (t_k^H t_j) h_{j,m} + n_{m,pilot(k)},
/// with one CN(0, eta^2 I) noise vector per (AP, pilot) pair so that users
/// sharing a pilot see the same projected noise.
PilotObservation simulate_pilot_phase(const arma::cx_cube& true_channels,
                                      const PilotBook& book,
                                      const arma::vec& pilot_power_w,
                                      double noise_power_w, Rng& rng);

/// D_{k,m} = sum_j mu_j C_{j,m} |t_j^H t_k|^2 + eta^2 I. Hermitian PD when
/// eta^2 > 0.
arma::cx_mat observation_covariance(const arma::field<arma::cx_mat>& covariances,
                                    int user, int ap, const PilotBook& book,
                                    const arma::vec& pilot_power_w,
                                    double noise_power_w);

/// LMMSE estimate sqrt(mu_k) C_{k,m} D_{k,m}^{-1} u_{k,m}. Throws
/// std::runtime_error when D is numerically singular (cond > 1e12).
arma::cx_vec lmmse_estimate(const arma::cx_vec& u, const arma::cx_mat& cov_k,
                            const arma::cx_mat& cov_obs, double pilot_power_w);

/// Convenience: pilot phase + per-link LMMSE, filling channels.estimates.
void estimate_channels(ChannelSet& channels, const PilotBook& book,
                       const arma::vec& pilot_power_w, double noise_power_w,
                       std::uint64_t seed);

}  // namespace cfemf
