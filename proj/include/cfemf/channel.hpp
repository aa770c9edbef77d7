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

#include "cfemf/rng.hpp"
#include "cfemf/scenario.hpp"

namespace cfemf {

// LoS probabilities are clamped below 1 so the Rician factor p/(1-p) stays
// finite and covariances stay well-conditioned (beta <= 999).
inline constexpr double kLosProbabilityCap = 0.999;

/// Large-scale state of one user-AP link.
struct LinkState {
  double alpha = 1.0;         // linear gain
  double beta = 0.0;          // Rician factor
  double theta = 0.0;         // LoS angle of arrival, rad
  double phase_offset = 0.0;  // psi in [0, 2*pi)
  double distance = 1.0;      // m
};

/// 3GPP TR 36.814 urban-micro LoS probability,
/// p = min(18/d, 1)*(1 - exp(-d/36)) + exp(-d/36), clamped to [0, 0.999].
double los_probability(double distance_m);

/// beta = p/(1-p); requires p in [0, 0.999].
double rician_factor(double p_los);

/// 3GPP TR 36.814 urban-micro path loss as linear gain 10^(-PL/10).
/// LoS: PL = 22.0 log10(d) + 28.0 + 20 log10(f_GHz)
/// NLoS: PL = 36.7 log10(d) + 22.7 + 26 log10(f_GHz)
/// Distances below 1 m are clamped to 1 m.
double path_loss_gain(double distance_m, bool is_los, double carrier_hz);

/// ULA steering vector, entry l = exp(j 2 pi spacing l sin(theta)).
arma::cx_vec steering_vector(int num_antennas, double theta,
                             double spacing_wavelengths = 0.5);

/// One small-scale realization:
///   h = sqrt(alpha/(1+beta)) * (h_nlos + sqrt(beta) e^{j psi} v(theta)),
/// h_nlos entries i.i.d. CN(0,1), psi taken from the link state.
/// E[||h||^2] = alpha * L for any beta.
arma::cx_vec draw_channel(const LinkState& link, int num_antennas, Rng& rng,
                          double spacing_wavelengths = 0.5);

/// C = alpha/(1+beta) * (I + beta v v^H). Hermitian PSD, trace = alpha*L.
arma::cx_mat channel_covariance(const LinkState& link, int num_antennas,
                                double spacing_wavelengths = 0.5);

/// All channels of one drop. true_channels/estimates are L x M x K cubes
/// (slice k, column m = h_{k,m}); covariances is a K x M field of L x L.
struct ChannelSet {
  arma::cx_cube true_channels;
  arma::field<arma::cx_mat> covariances;
  arma::cx_cube estimates;  // zero until the estimation stage runs
};

/// Draws every link of the drop with per-link rng substreams (phase offsets
/// uniform per drop). Deterministic given (scenario, seed).
ChannelSet draw_channel_set(const Scenario& scenario, std::uint64_t seed);

}  // namespace cfemf
