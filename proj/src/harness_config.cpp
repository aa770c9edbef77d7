// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfemf/harness.hpp"
#include "cfemf/util.hpp"

namespace cfemf {

std::string to_string(Direction direction) {
  return direction == Direction::dl ? "dl" : "ul";
}

std::string to_string(DeploymentMode mode) {
  return mode == DeploymentMode::cell_free ? "cell_free" : "multi_cell";
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& what) {
  throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& name, int line, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    fail(name, line, "cannot parse number '" + value + "'");
  }
}

long parse_int(const std::string& name, int line, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    fail(name, line, "cannot parse integer '" + value + "'");
  }
}

bool parse_bool(const std::string& name, int line, const std::string& value) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  fail(name, line, "cannot parse boolean '" + value + "'");
}

}  // namespace

CampaignSpec parse_config(std::istream& in, const std::string& name) {
  CampaignSpec spec;
  bool pilot_length_given = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(name, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(name, line_no, "empty key");

    const auto num = [&] { return parse_double(name, line_no, value); };
    const auto integer = [&] { return parse_int(name, line_no, value); };
    const auto positive = [&](double v) {
      if (v <= 0) fail(name, line_no, key + " must be positive");
      return v;
    };
    const auto positive_int = [&](long v) {
      if (v < 1) fail(name, line_no, key + " must be >= 1");
      return static_cast<int>(v);
    };

    if (key == "area_side_m") spec.base.area_side_m = positive(num());
    else if (key == "num_users") spec.base.num_users = positive_int(integer());
    else if (key == "num_aps") spec.base.num_aps = positive_int(integer());
    else if (key == "antennas_per_ap") spec.base.antennas_per_ap = positive_int(integer());
    else if (key == "association_size") spec.base.association_size = positive_int(integer());
    else if (key == "carrier_frequency_ghz") spec.base.carrier_frequency_hz = positive(num()) * 1e9;
    else if (key == "bandwidth_mhz") spec.base.bandwidth_hz = positive(num()) * 1e6;
    else if (key == "dl_power_budget_dbm") spec.base.dl_power_budget_w = dbm_to_watt(num());
    else if (key == "ul_power_budget_dbm") spec.base.ul_power_budget_w = dbm_to_watt(num());
    else if (key == "pilot_power_dbm") spec.base.pilot_power_w = dbm_to_watt(num());
    else if (key == "noise_psd_dbm_hz") spec.base.noise_psd_w_hz = dbm_to_watt(num());
    else if (key == "coherence_block_symbols") spec.base.coherence_block_symbols = positive_int(integer());
    else if (key == "pilot_length_symbols") {
      if (value == "auto") {
        spec.auto_pilot_length = true;
      } else {
        spec.base.pilot_length_symbols = positive_int(integer());
        spec.auto_pilot_length = false;
        pilot_length_given = true;
      }
    } else if (key == "ap_height_m") spec.base.ap_height_m = positive(num());
    else if (key == "user_height_m") spec.base.user_height_m = positive(num());
    else if (key == "ula_spacing_wavelengths") spec.base.ula_spacing_wavelengths = positive(num());
    else if (key == "shadow_fading_db") {
      spec.base.shadow_fading_db = num();
      if (spec.base.shadow_fading_db < 0) fail(name, line_no, "shadow_fading_db must be >= 0");
    } else if (key == "ap_layout") {
      if (value == "grid_jitter") spec.base.ap_layout = ApLayout::grid_jitter;
      else if (value == "uniform") spec.base.ap_layout = ApLayout::uniform_random;
      else fail(name, line_no, "ap_layout must be grid_jitter or uniform");
    } else if (key == "ipd_cap_w_m2") spec.ipd_cap_w_m2 = positive(num());
    else if (key == "sar_cap_w_kg") spec.sar_cap_w_kg = positive(num());
    else if (key == "sar_coeff_per_kg") spec.sar_coeff_per_kg = positive(num());
    else if (key == "num_body_parts") spec.num_body_parts = positive_int(integer());
    else if (key == "schemes") {
      spec.schemes.clear();
      for (const auto& item : split_list(value)) {
        try {
          spec.schemes.push_back(scheme_from_string(item));
        } catch (const std::exception& e) {
          fail(name, line_no, e.what());
        }
      }
      if (spec.schemes.empty()) fail(name, line_no, "schemes list is empty");
    } else if (key == "deployments") {
      spec.deployments.clear();
      for (const auto& item : split_list(value)) {
        if (item == "cell_free") spec.deployments.push_back(DeploymentMode::cell_free);
        else if (item == "multi_cell") spec.deployments.push_back(DeploymentMode::multi_cell);
        else fail(name, line_no, "unknown deployment '" + item + "'");
      }
      if (spec.deployments.empty()) fail(name, line_no, "deployments list is empty");
    } else if (key == "directions") {
      spec.directions.clear();
      for (const auto& item : split_list(value)) {
        if (item == "dl") spec.directions.push_back(Direction::dl);
        else if (item == "ul") spec.directions.push_back(Direction::ul);
        else fail(name, line_no, "unknown direction '" + item + "'");
      }
      if (spec.directions.empty()) fail(name, line_no, "directions list is empty");
    } else if (key == "num_drops") spec.num_drops = positive_int(integer());
    else if (key == "master_seed") spec.master_seed = static_cast<std::uint64_t>(integer());
    else if (key == "sweep_num_users") {
      spec.sweep_num_users.clear();
      for (const auto& item : split_list(value))
        spec.sweep_num_users.push_back(positive_int(parse_int(name, line_no, item)));
    } else if (key == "sweep_sar_cap_w_kg") {
      spec.sweep_sar_caps.clear();
      for (const auto& item : split_list(value))
        spec.sweep_sar_caps.push_back(positive(parse_double(name, line_no, item)));
    } else if (key == "fpc_exponent") {
      spec.fpc_exponent = num();
      if (spec.fpc_exponent < -1.0 || spec.fpc_exponent > 1.0)
        fail(name, line_no, "fpc_exponent must be in [-1, 1]");
    } else if (key == "baselines_respect_emf") spec.baselines_respect_emf = parse_bool(name, line_no, value);
    else if (key == "pilot_pairing") {
      if (value == "max_distance") spec.pilot_pairing = PilotPairing::max_distance;
      else if (value == "random") spec.pilot_pairing = PilotPairing::random;
      else fail(name, line_no, "pilot_pairing must be max_distance or random");
    } else if (key == "dl_nesting") {
      if (value == "bisection_inside") spec.dl_options.nesting = DlNesting::bisection_inside;
      else if (value == "bisection_outside") spec.dl_options.nesting = DlNesting::bisection_outside;
      else fail(name, line_no, "dl_nesting must be bisection_inside or bisection_outside");
    } else if (key == "dl_sco_tol") spec.dl_options.tol_sco = positive(num());
    else if (key == "dl_bisection_tol") spec.dl_options.tol_bisect = positive(num());
    else if (key == "dl_max_outer") spec.dl_options.max_outer = positive_int(integer());
    else if (key == "ul_bisection_tol") spec.ul_bisect_tol = positive(num());
    else if (key == "threads") {
      const long v = integer();
      if (v < 0) fail(name, line_no, "threads must be >= 0");
      spec.threads = static_cast<int>(v);
    } else fail(name, line_no, "unknown key '" + key + "'");
  }

  if (pilot_length_given &&
      spec.base.pilot_length_symbols > spec.base.coherence_block_symbols)
    throw std::runtime_error(name + ": pilot length exceeds the coherence block");
  return spec;
}

CampaignSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace cfemf
