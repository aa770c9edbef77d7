// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfemf/metrics.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace cfemf {

namespace {

// Coherent gain of user j's transmission observed at user k:
// sum_m a_{j,m} sqrt(p_{j,m}) h_{k,m}^H b_{j,m}. Shared by the SINR numerator
// (j = k), the interference terms, and the exposure sum.
std::complex<double> coherent_gain(const arma::cx_cube& channels,
                                   const arma::cx_cube& beams,
                                   const arma::umat& association,
                                   const arma::mat& dl_powers, int k, int j) {
  const int M = static_cast<int>(channels.n_cols);
  std::complex<double> g = 0.0;
  for (int m = 0; m < M; ++m) {
    if (association(j, m) == 0) continue;
    const double p = dl_powers(j, m);
    if (p == 0.0) continue;
    g += std::sqrt(p) *
         arma::cdot(channels.slice(k).col(m), beams.slice(j).col(m));
  }
  return g;
}

}  // namespace

arma::cx_vec conjugate_beamformer(const arma::cx_vec& h_hat) {
  const double n = arma::norm(h_hat);
  if (n == 0.0)
    throw std::invalid_argument("conjugate_beamformer: zero channel estimate");
  return h_hat / n;
}

BeamformerSet make_conjugate_beams(const arma::cx_cube& channels,
                                   const arma::umat& association) {
  const int M = static_cast<int>(channels.n_cols);
  const int K = static_cast<int>(channels.n_slices);
  BeamformerSet set;
  set.beams.zeros(arma::size(channels));
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m) {
      if (association(k, m) == 0) continue;
      const arma::cx_vec h = channels.slice(k).col(m);
      const double n = arma::norm(h);
      if (n > 0.0) set.beams.slice(k).col(m) = h / n;
    }
  return set;
}

arma::vec dl_sinr(const arma::cx_cube& channels, const arma::cx_cube& beams,
                  const arma::umat& association, const arma::mat& dl_powers,
                  double noise_power_w) {
  const int K = static_cast<int>(channels.n_slices);
  arma::vec sinr(K);
  for (int k = 0; k < K; ++k) {
    const double desired =
        std::norm(coherent_gain(channels, beams, association, dl_powers, k, k));
    double interference = 0.0;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      interference +=
          std::norm(coherent_gain(channels, beams, association, dl_powers, k, j));
    }
    sinr(k) = desired / (interference + noise_power_w);
  }
  return sinr;
}

arma::vec ul_sinr(const arma::cx_cube& channels, const arma::cx_cube& filters,
                  const arma::umat& association, const arma::vec& ul_powers,
                  double noise_power_w) {
  const int M = static_cast<int>(channels.n_cols);
  const int K = static_cast<int>(channels.n_slices);
  arma::vec sinr(K);
  for (int k = 0; k < K; ++k) {
    double noise = 0.0;
    arma::cx_vec combined(K, arma::fill::zeros);  // sum_m a_{k,m} f_{k,m}^H h_{j,m}
    for (int m = 0; m < M; ++m) {
      if (association(k, m) == 0) continue;
      const arma::cx_vec f = filters.slice(k).col(m);
      noise += noise_power_w * std::pow(arma::norm(f), 2);
      for (int j = 0; j < K; ++j)
        combined(j) += arma::cdot(f, channels.slice(j).col(m));
    }
    const double desired = ul_powers(k) * std::norm(combined(k));
    double interference = 0.0;
    for (int j = 0; j < K; ++j)
      if (j != k) interference += ul_powers(j) * std::norm(combined(j));
    sinr(k) = desired / (interference + noise);
  }
  return sinr;
}

arma::vec ipd(const arma::cx_cube& channels, const arma::cx_cube& beams,
              const arma::umat& association, const arma::mat& dl_powers,
              double wavelength_m) {
  if (wavelength_m <= 0) throw std::invalid_argument("ipd: non-positive wavelength");
  const int K = static_cast<int>(channels.n_slices);
  const double scale = 4.0 * kPi / (wavelength_m * wavelength_m);
  arma::vec xi(K, arma::fill::zeros);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j)  // own signal irradiates too
      xi(k) +=
          std::norm(coherent_gain(channels, beams, association, dl_powers, k, j));
    xi(k) *= scale;
  }
  return xi;
}

double sar(double ul_power_w, double sar_coeff_per_kg) {
  if (ul_power_w < 0) throw std::invalid_argument("sar: negative power");
  if (sar_coeff_per_kg <= 0) throw std::invalid_argument("sar: non-positive coefficient");
  return sar_coeff_per_kg * ul_power_w;
}

double rate(double sinr, int prelog_symbols, int coherence_symbols,
            double bandwidth_hz) {
  if (sinr < 0) throw std::invalid_argument("rate: negative SINR");
  return (static_cast<double>(prelog_symbols) / coherence_symbols) * bandwidth_hz *
         std::log2(1.0 + sinr);
}

}  // namespace cfemf
