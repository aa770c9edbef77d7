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

#include "cfemf/scenario.hpp"

namespace cfemf {

/// Conjugate (matched-filter) processing: the UL filters equal the DL beams,
/// both unit-norm on active links and zero elsewhere.
struct BeamformerSet {
  arma::cx_cube beams;  // L x M x K
  const arma::cx_cube& ul_filters() const { return beams; }
};

struct PowerAllocation {
  arma::mat dl_powers;  // K x M (W), zero on inactive links
  arma::vec ul_powers;  // K (W)
};

struct UserMetrics {
  double dl_sinr = 0.0;
  double ul_sinr = 0.0;
  double dl_rate_bps = 0.0;
  double ul_rate_bps = 0.0;
  double ipd_w_m2 = 0.0;
  double sar_w_kg = 0.0;
};

struct RateParams {
  int prelog_symbols = 95;      // tau_d or tau_u
  int coherence_symbols = 200;  // tau_c
  double bandwidth_hz = 20e6;
};

/// h / ||h||. Throws std::invalid_argument on a zero vector (degenerate link;
/// callers should deactivate such links instead).
arma::cx_vec conjugate_beamformer(const arma::cx_vec& h_hat);

/// Unit-norm conjugate beams from the given channels (normally the estimates)
/// on active links; zero columns elsewhere. Links whose estimate is exactly
/// zero stay zero.
BeamformerSet make_conjugate_beams(const arma::cx_cube& channels,
                                   const arma::umat& association);

// The channel cube argument selects the evaluation convention: pass estimates
// while designing, true channels when reporting.

/// DL SINR per user: coherent sum over serving APs in the numerator,
/// interference from all other users' transmissions plus noise below.
arma::vec dl_sinr(const arma::cx_cube& channels, const arma::cx_cube& beams,
                  const arma::umat& association, const arma::mat& dl_powers,
                  double noise_power_w);

/// UL SINR per user with per-AP filters combined across the user's serving set.
arma::vec ul_sinr(const arma::cx_cube& channels, const arma::cx_cube& filters,
                  const arma::umat& association, const arma::vec& ul_powers,
                  double noise_power_w);

/// Incident power density at each user, (4 pi / lambda^2) * sum over all
/// transmissions (the user's own signal included).
arma::vec ipd(const arma::cx_cube& channels, const arma::cx_cube& beams,
              const arma::umat& association, const arma::mat& dl_powers,
              double wavelength_m);

/// Specific absorption rate of one body part, b * q.
double sar(double ul_power_w, double sar_coeff_per_kg);

/// (prelog/tau_c) * B * log2(1 + sinr), bits/s.
double rate(double sinr, int prelog_symbols, int coherence_symbols,
            double bandwidth_hz);

inline double rate(double sinr, const RateParams& rp) {
  return rate(sinr, rp.prelog_symbols, rp.coherence_symbols, rp.bandwidth_hz);
}

}  // namespace cfemf
