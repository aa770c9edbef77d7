// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <string>

#include <armadillo>

#include "cfemf/scenario.hpp"

namespace cfemf {

/// opc: max-min optimization with exposure caps; uo: the same without them;
/// upc/ppc: DL heuristics (ppc DL-only); fpc: UL-only heuristic.
enum class SchemeId { opc, uo, upc, ppc, fpc };

std::string to_string(SchemeId scheme);
SchemeId scheme_from_string(const std::string& name);

/// Uniform power control: each AP splits its budget equally among the users
/// it serves. APs serving nobody stay silent.
arma::mat upc_dl(const Scenario& scenario);

/// Proportional power control: AP m gives user k the share
/// alpha_{k,m} / sum over served users of alpha.
arma::mat ppc_dl(const Scenario& scenario);

/// Full power on every user. With respect_emf the SAR caps fold in;
/// by default the heuristics are not cap-aware.
arma::vec upc_ul(const Scenario& scenario, const ExposureLimits& limits,
                 bool respect_emf = false);

/// Fractional power control: q_k = q_cap * (min_j abar_j / abar_k)^exponent
/// with abar the aggregate serving-link gain; the weakest user transmits at
/// the cap and stronger users back off.
arma::vec fpc_ul(const Scenario& scenario, const ExposureLimits& limits,
                 double exponent = 0.5, bool respect_emf = false);

}  // namespace cfemf
