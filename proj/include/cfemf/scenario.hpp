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

#include "cfemf/util.hpp"

namespace cfemf {

enum class DeploymentMode { cell_free, multi_cell };
enum class ApLayout { grid_jitter, uniform_random };

/// Radio and geometry parameters of one network. All values SI.
struct NetworkConfig {
  double area_side_m = 1000.0;
  int num_users = 20;        // K
  int num_aps = 40;          // M (sites)
  int antennas_per_ap = 4;   // L
  int association_size = 5;  // N serving sites per user
  double carrier_frequency_hz = 2.5e9;
  double bandwidth_hz = 20e6;
  double dl_power_budget_w = dbm_to_watt(23.0);   // per AP
  double ul_power_budget_w = dbm_to_watt(20.0);   // per user
  double pilot_power_w = dbm_to_watt(20.0);       // per user
  double noise_psd_w_hz = dbm_to_watt(-174.0);    // N_o
  int coherence_block_symbols = 200;  // tau_c
  int pilot_length_symbols = 10;      // tau_p
  int dl_symbols = 95;                // tau_d
  int ul_symbols = 95;                // tau_u
  DeploymentMode deployment_mode = DeploymentMode::cell_free;
  ApLayout ap_layout = ApLayout::grid_jitter;
  double ula_spacing_wavelengths = 0.5;
  double ap_height_m = 10.0;
  double user_height_m = 1.5;
  double shadow_fading_db = 0.0;  // log-normal std dev; 0 disables

  double wavelength_m() const { return kSpeedOfLight / carrier_frequency_hz; }
  double noise_power_w() const { return noise_psd_w_hz * bandwidth_hz; }

  /// Throws std::invalid_argument on violated bounds (counts >= 1, N <= M,
  /// positive powers/bandwidths, pilot+data symbols <= coherence block).
  void validate() const;
};

/// Per-user exposure caps: one IPD cap and per-body-part SAR caps/coefficients.
struct ExposureLimits {
  arma::vec ipd_cap_w_m2;       // K
  arma::mat sar_cap_w_kg;       // K x parts
  arma::mat sar_coeff_per_kg;   // K x parts

  static ExposureLimits uniform(int num_users, int num_parts, double ipd_cap,
                                double sar_cap, double sar_coeff);
  void validate() const;

  /// Transmit power that saturates the tightest SAR cap of user k,
  /// folded with the power budget: min(Q_k, min_n E_{k,n}/b_{k,n}).
  double ul_power_cap(int user, double ul_budget_w) const;
};

/// One network drop: positions plus the per-link large-scale state.
/// Immutable after generate_drop; safe to share across worker threads.
struct Scenario {
  NetworkConfig config;
  arma::mat ap_positions;    // M x 2
  arma::mat user_positions;  // K x 2
  arma::mat large_scale;     // K x M linear gain
  arma::mat rician_factors;  // K x M
  arma::mat aoas;            // K x M rad
  arma::mat distances;       // K x M 3-D link distance, m
  arma::umat los;            // K x M, 1 where the link realized line-of-sight
  arma::umat association;    // K x M in {0,1}; row sums = association_size
};

/// Shortest-displacement distance on the wrap-around square.
/// Coordinates must lie in [0, side).
double torus_distance(const arma::vec2& p, const arma::vec2& r, double side);

/// Signed per-axis displacement r - p under the shortest wrap.
arma::vec2 torus_displacement(const arma::vec2& p, const arma::vec2& r, double side);

/// Row k gets ones at the N largest large-scale coefficients; ties broken by
/// lowest AP index.
arma::umat associate_users(const arma::mat& large_scale, int association_size);

/// Maps a cell-free configuration to the matched multi-cell one: L sites with
/// M antennas each, per-site budget (M/L)*P, single-site association. Total
/// antenna count and total deployable DL power are preserved.
NetworkConfig to_multicell(const NetworkConfig& cf);

/// Deterministic given (config, seed).
Scenario generate_drop(const NetworkConfig& config, std::uint64_t seed);

}  // namespace cfemf
