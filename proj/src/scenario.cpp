// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfemf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cfemf/channel.hpp"
#include "cfemf/rng.hpp"

namespace cfemf {

namespace {

// substream tags for drop generation
constexpr std::uint64_t kApStream = 0x41505f504f53ull;
constexpr std::uint64_t kUserStream = 0x5553455253ull;
constexpr std::uint64_t kLinkStream = 0x4c494e4bull;

double wrap_delta(double d, double side) {
  // shortest signed displacement on a circle of circumference `side`
  d = std::fmod(d, side);
  if (d > 0.5 * side) d -= side;
  if (d < -0.5 * side) d += side;
  return d;
}

}  // namespace

void NetworkConfig::validate() const {
  if (num_users < 1 || num_aps < 1 || antennas_per_ap < 1 || association_size < 1)
    throw std::invalid_argument("NetworkConfig: counts must be >= 1");
  if (association_size > num_aps)
    throw std::invalid_argument("NetworkConfig: association_size exceeds num_aps");
  if (area_side_m <= 0 || carrier_frequency_hz <= 0 || bandwidth_hz <= 0)
    throw std::invalid_argument("NetworkConfig: non-positive geometry/bandwidth");
  if (dl_power_budget_w <= 0 || ul_power_budget_w <= 0 || pilot_power_w <= 0 ||
      noise_psd_w_hz <= 0)
    throw std::invalid_argument("NetworkConfig: non-positive power");
  if (coherence_block_symbols < 1 || pilot_length_symbols < 1 || dl_symbols < 0 ||
      ul_symbols < 0)
    throw std::invalid_argument("NetworkConfig: invalid symbol counts");
  if (pilot_length_symbols + dl_symbols + ul_symbols > coherence_block_symbols)
    throw std::invalid_argument(
        "NetworkConfig: pilot + data symbols exceed the coherence block");
  if (ula_spacing_wavelengths <= 0)
    throw std::invalid_argument("NetworkConfig: non-positive ULA spacing");
  if (shadow_fading_db < 0)
    throw std::invalid_argument("NetworkConfig: negative shadow fading std");
}

ExposureLimits ExposureLimits::uniform(int num_users, int num_parts, double ipd_cap,
                                       double sar_cap, double sar_coeff) {
  ExposureLimits limits;
  limits.ipd_cap_w_m2 = arma::vec(num_users, arma::fill::value(ipd_cap));
  limits.sar_cap_w_kg = arma::mat(num_users, num_parts, arma::fill::value(sar_cap));
  limits.sar_coeff_per_kg =
      arma::mat(num_users, num_parts, arma::fill::value(sar_coeff));
  limits.validate();
  return limits;
}

void ExposureLimits::validate() const {
  if (ipd_cap_w_m2.is_empty() || sar_cap_w_kg.is_empty())
    throw std::invalid_argument("ExposureLimits: empty");
  if (arma::size(sar_cap_w_kg) != arma::size(sar_coeff_per_kg))
    throw std::invalid_argument("ExposureLimits: SAR cap/coefficient shape mismatch");
  if (ipd_cap_w_m2.min() <= 0 || sar_cap_w_kg.min() <= 0 || sar_coeff_per_kg.min() <= 0)
    throw std::invalid_argument("ExposureLimits: entries must be positive");
}

double ExposureLimits::ul_power_cap(int user, double ul_budget_w) const {
  const arma::rowvec ratio =
      sar_cap_w_kg.row(user) / sar_coeff_per_kg.row(user);
  return std::min(ul_budget_w, ratio.min());
}

arma::vec2 torus_displacement(const arma::vec2& p, const arma::vec2& r, double side) {
  return {wrap_delta(r(0) - p(0), side), wrap_delta(r(1) - p(1), side)};
}

double torus_distance(const arma::vec2& p, const arma::vec2& r, double side) {
  for (const auto& pt : {p, r})
    if (pt(0) < 0 || pt(0) >= side || pt(1) < 0 || pt(1) >= side)
      throw std::invalid_argument("torus_distance: coordinates outside [0, side)");
  const arma::vec2 d = torus_displacement(p, r, side);
  return std::hypot(d(0), d(1));
}

arma::umat associate_users(const arma::mat& large_scale, int association_size) {
  const int K = static_cast<int>(large_scale.n_rows);
  const int M = static_cast<int>(large_scale.n_cols);
  if (association_size > M)
    throw std::invalid_argument("associate_users: N exceeds the AP count");

  arma::umat assoc(K, M, arma::fill::zeros);
  std::vector<int> order(M);
  for (int k = 0; k < K; ++k) {
    std::iota(order.begin(), order.end(), 0);
    // descending gain, ties to the lowest AP index
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return large_scale(k, a) > large_scale(k, b);
    });
    for (int n = 0; n < association_size; ++n) assoc(k, order[n]) = 1;
  }
  return assoc;
}

NetworkConfig to_multicell(const NetworkConfig& cf) {
  NetworkConfig mc = cf;
  mc.num_aps = cf.antennas_per_ap;
  mc.antennas_per_ap = cf.num_aps;
  mc.association_size = 1;
  mc.dl_power_budget_w =
      cf.dl_power_budget_w * static_cast<double>(cf.num_aps) / cf.antennas_per_ap;
  mc.deployment_mode = DeploymentMode::multi_cell;
  return mc;
}

Scenario generate_drop(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  const int K = config.num_users;
  const int M = config.num_aps;
  const double side = config.area_side_m;

  Scenario sc;
  sc.config = config;

  // Site positions: near-regular grid with +-10% pitch jitter, or fully
  // uniform when configured.
  sc.ap_positions.set_size(M, 2);
  Rng ap_rng(mix_seed(seed, kApStream));
  if (config.ap_layout == ApLayout::uniform_random) {
    for (int m = 0; m < M; ++m) {
      sc.ap_positions(m, 0) = ap_rng.uniform(0.0, side);
      sc.ap_positions(m, 1) = ap_rng.uniform(0.0, side);
    }
  } else {
    const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(M))));
    const double pitch = side / grid;
    for (int m = 0; m < M; ++m) {
      const int gx = m % grid;
      const int gy = m / grid;
      double x = (gx + 0.5) * pitch + ap_rng.uniform(-0.1, 0.1) * pitch;
      double y = (gy + 0.5) * pitch + ap_rng.uniform(-0.1, 0.1) * pitch;
      // jitter may push a border cell outside; wrap back onto the square
      x = std::fmod(x + side, side);
      y = std::fmod(y + side, side);
      sc.ap_positions(m, 0) = x;
      sc.ap_positions(m, 1) = y;
    }
  }

  // User positions come from their own substream so that a drop and its
  // multi-cell counterpart (different M) share identical user placement.
  sc.user_positions.set_size(K, 2);
  Rng user_rng(mix_seed(seed, kUserStream));
  for (int k = 0; k < K; ++k) {
    sc.user_positions(k, 0) = user_rng.uniform(0.0, side);
    sc.user_positions(k, 1) = user_rng.uniform(0.0, side);
  }

  sc.large_scale.set_size(K, M);
  sc.rician_factors.set_size(K, M);
  sc.aoas.set_size(K, M);
  sc.distances.set_size(K, M);
  sc.los.set_size(K, M);

  const double dz = config.ap_height_m - config.user_height_m;
  for (int k = 0; k < K; ++k) {
    const arma::vec2 up = {sc.user_positions(k, 0), sc.user_positions(k, 1)};
    for (int m = 0; m < M; ++m) {
      const arma::vec2 ap = {sc.ap_positions(m, 0), sc.ap_positions(m, 1)};
      const arma::vec2 disp = torus_displacement(ap, up, side);
      const double d2 = std::hypot(disp(0), disp(1));
      const double d3 = std::hypot(d2, dz);
      sc.distances(k, m) = d3;
      sc.aoas(k, m) = std::atan2(disp(1), disp(0));

      const double p_los = los_probability(d3);
      sc.rician_factors(k, m) = rician_factor(p_los);

      Rng link_rng(mix_seed(seed, kLinkStream + static_cast<std::uint64_t>(k),
                            static_cast<std::uint64_t>(m)));
      const bool is_los = link_rng.uniform() < p_los;
      sc.los(k, m) = is_los ? 1 : 0;
      double gain = path_loss_gain(d3, is_los, config.carrier_frequency_hz);
      if (config.shadow_fading_db > 0)
        gain *= db_to_linear(config.shadow_fading_db * link_rng.normal());
      sc.large_scale(k, m) = gain;
    }
  }

  sc.association = associate_users(sc.large_scale, config.association_size);
  return sc;
}

}  // namespace cfemf
