// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfemf/channel.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace cfemf {

double los_probability(double distance_m) {
  if (distance_m <= 0)
    throw std::invalid_argument("los_probability: non-positive distance");
  const double decay = std::exp(-distance_m / 36.0);
  const double p = std::min(18.0 / distance_m, 1.0) * (1.0 - decay) + decay;
  return std::clamp(p, 0.0, kLosProbabilityCap);
}

double rician_factor(double p_los) {
  if (p_los < 0.0 || p_los > kLosProbabilityCap)
    throw std::invalid_argument("rician_factor: p_los outside [0, 0.999]");
  return p_los / (1.0 - p_los);
}

double path_loss_gain(double distance_m, bool is_los, double carrier_hz) {
  const double d = std::max(distance_m, 1.0);
  const double f_ghz = carrier_hz / 1e9;
  const double pl_db = is_los
      ? 22.0 * std::log10(d) + 28.0 + 20.0 * std::log10(f_ghz)
      : 36.7 * std::log10(d) + 22.7 + 26.0 * std::log10(f_ghz);
  return std::pow(10.0, -pl_db / 10.0);
}

arma::cx_vec steering_vector(int num_antennas, double theta,
                             double spacing_wavelengths) {
  if (num_antennas < 1)
    throw std::invalid_argument("steering_vector: need at least one antenna");
  arma::cx_vec v(num_antennas);
  const double phase_step = 2.0 * kPi * spacing_wavelengths * std::sin(theta);
  for (int l = 0; l < num_antennas; ++l)
    v(l) = std::polar(1.0, phase_step * l);
  return v;
}

arma::cx_vec draw_channel(const LinkState& link, int num_antennas, Rng& rng,
                          double spacing_wavelengths) {
  arma::cx_vec h_nlos(num_antennas);
  for (int l = 0; l < num_antennas; ++l) h_nlos(l) = rng.cnormal();

  const arma::cx_vec v = steering_vector(num_antennas, link.theta, spacing_wavelengths);
  const std::complex<double> los_phase = std::polar(1.0, link.phase_offset);
  const double scale = std::sqrt(link.alpha / (1.0 + link.beta));
  return scale * (h_nlos + std::sqrt(link.beta) * los_phase * v);
}

arma::cx_mat channel_covariance(const LinkState& link, int num_antennas,
                                double spacing_wavelengths) {
  const arma::cx_vec v = steering_vector(num_antennas, link.theta, spacing_wavelengths);
  arma::cx_mat cov = link.beta * (v * v.t());
  cov.diag() += 1.0;
  cov *= link.alpha / (1.0 + link.beta);
  return cov;
}

ChannelSet draw_channel_set(const Scenario& scenario, std::uint64_t seed) {
  const int K = scenario.config.num_users;
  const int M = scenario.config.num_aps;
  const int L = scenario.config.antennas_per_ap;
  const double spacing = scenario.config.ula_spacing_wavelengths;

  ChannelSet set;
  set.true_channels.set_size(L, M, K);
  set.covariances.set_size(K, M);
  set.estimates.zeros(L, M, K);

  for (int k = 0; k < K; ++k) {
    for (int m = 0; m < M; ++m) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k),
                       static_cast<std::uint64_t>(m)));
      LinkState link;
      link.alpha = scenario.large_scale(k, m);
      link.beta = scenario.rician_factors(k, m);
      link.theta = scenario.aoas(k, m);
      link.distance = scenario.distances(k, m);
      link.phase_offset = rng.uniform(0.0, 2.0 * kPi);

      set.true_channels.slice(k).col(m) = draw_channel(link, L, rng, spacing);
      set.covariances(k, m) = channel_covariance(link, L, spacing);
    }
  }
  return set;
}

}  // namespace cfemf
