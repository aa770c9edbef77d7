// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include "cfemf/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace cfemf {

std::string to_string(SchemeId scheme) {
  switch (scheme) {
    case SchemeId::opc: return "opc";
    case SchemeId::uo: return "uo";
    case SchemeId::upc: return "upc";
    case SchemeId::ppc: return "ppc";
    case SchemeId::fpc: return "fpc";
  }
  throw std::logic_error("to_string: unknown scheme");
}

SchemeId scheme_from_string(const std::string& name) {
  if (name == "opc") return SchemeId::opc;
  if (name == "uo") return SchemeId::uo;
  if (name == "upc") return SchemeId::upc;
  if (name == "ppc") return SchemeId::ppc;
  if (name == "fpc") return SchemeId::fpc;
  throw std::runtime_error("unknown scheme '" + name + "'");
}

arma::mat upc_dl(const Scenario& scenario) {
  const int K = scenario.config.num_users;
  const int M = scenario.config.num_aps;
  const double budget = scenario.config.dl_power_budget_w;

  arma::mat p(K, M, arma::fill::zeros);
  for (int m = 0; m < M; ++m) {
    const double served = arma::accu(scenario.association.col(m));
    if (served == 0) continue;
    for (int k = 0; k < K; ++k)
      if (scenario.association(k, m)) p(k, m) = budget / served;
  }
  return p;
}

arma::mat ppc_dl(const Scenario& scenario) {
  const int K = scenario.config.num_users;
  const int M = scenario.config.num_aps;
  const double budget = scenario.config.dl_power_budget_w;

  arma::mat p(K, M, arma::fill::zeros);
  for (int m = 0; m < M; ++m) {
    double total = 0.0;
    for (int k = 0; k < K; ++k)
      if (scenario.association(k, m)) total += scenario.large_scale(k, m);
    if (total == 0.0) continue;
    for (int k = 0; k < K; ++k)
      if (scenario.association(k, m))
        p(k, m) = budget * scenario.large_scale(k, m) / total;
  }
  return p;
}

arma::vec upc_ul(const Scenario& scenario, const ExposureLimits& limits,
                 bool respect_emf) {
  const int K = scenario.config.num_users;
  const double budget = scenario.config.ul_power_budget_w;
  arma::vec q(K);
  for (int k = 0; k < K; ++k)
    q(k) = respect_emf ? limits.ul_power_cap(k, budget) : budget;
  return q;
}

arma::vec fpc_ul(const Scenario& scenario, const ExposureLimits& limits,
                 double exponent, bool respect_emf) {
  const int K = scenario.config.num_users;
  const double budget = scenario.config.ul_power_budget_w;

  arma::vec aggregate(K, arma::fill::zeros);
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < scenario.config.num_aps; ++m)
      if (scenario.association(k, m)) aggregate(k) += scenario.large_scale(k, m);
  if (aggregate.min() <= 0.0)
    throw std::invalid_argument("fpc_ul: user with zero aggregate gain");

  const double weakest = aggregate.min();
  arma::vec q(K);
  for (int k = 0; k < K; ++k) {
    const double cap = respect_emf ? limits.ul_power_cap(k, budget) : budget;
    q(k) = cap * std::pow(weakest / aggregate(k), exponent);
  }
  return q;
}

}  // namespace cfemf
