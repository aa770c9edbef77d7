// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "cfemf/harness.hpp"
#include "cfemf/metrics.hpp"
#include "cfemf/ul_opt.hpp"

namespace cfemf {

namespace {

constexpr std::uint64_t kScenarioStream = 0xA;
constexpr std::uint64_t kChannelStream = 0xB;
constexpr std::uint64_t kPilotStream = 0xC;

bool scheme_applies(SchemeId scheme, Direction direction) {
  if (scheme == SchemeId::ppc) return direction == Direction::dl;
  if (scheme == SchemeId::fpc) return direction == Direction::ul;
  return true;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SweepPoint {
  int index = 0;
  int num_users = 0;
  double sar_cap = 0.0;
};

NetworkConfig config_for_sweep(const CampaignSpec& spec, const SweepPoint& point) {
  NetworkConfig cfg = spec.base;
  cfg.num_users = point.num_users;
  if (spec.auto_pilot_length) {
    cfg.pilot_length_symbols = (cfg.num_users + 1) / 2;  // two users per pilot
    const int data = cfg.coherence_block_symbols - cfg.pilot_length_symbols;
    cfg.dl_symbols = data / 2;
    cfg.ul_symbols = data / 2;
  }
  return cfg;
}

struct DropWorkspace {
  Scenario scenario;
  ChannelSet channels;
  BeamformerSet beams;
};

DropWorkspace prepare_drop(const NetworkConfig& cfg, const CampaignSpec& spec,
                           std::uint64_t drop_seed) {
  DropWorkspace ws;
  ws.scenario = generate_drop(cfg, mix_seed(drop_seed, kScenarioStream));
  ws.channels = draw_channel_set(ws.scenario, mix_seed(drop_seed, kChannelStream));

  Rng pairing_rng(mix_seed(drop_seed, kPilotStream, 1));
  const PilotBook book = assign_pilots(
      cfg.num_users, cfg.pilot_length_symbols, ws.scenario.user_positions,
      cfg.area_side_m, spec.pilot_pairing, &pairing_rng);
  const arma::vec pilot_power(cfg.num_users, arma::fill::value(cfg.pilot_power_w));
  estimate_channels(ws.channels, book, pilot_power, cfg.noise_power_w(),
                    mix_seed(drop_seed, kPilotStream));
  ws.beams = make_conjugate_beams(ws.channels.estimates, ws.scenario.association);
  return ws;
}

void run_direction_scheme(const CampaignSpec& spec, const NetworkConfig& cfg,
                          const ExposureLimits& limits, const DropWorkspace& ws,
                          Direction direction, SchemeId scheme, int drop,
                          const SweepPoint& point, std::vector<ResultRow>& rows) {
  const int K = cfg.num_users;
  const double noise = cfg.noise_power_w();
  const RateParams rp{direction == Direction::dl ? cfg.dl_symbols : cfg.ul_symbols,
                      cfg.coherence_block_symbols, cfg.bandwidth_hz};

  const auto start = std::chrono::steady_clock::now();
  bool failed = false;

  PowerAllocation alloc;
  if (direction == Direction::dl) {
    switch (scheme) {
      case SchemeId::upc:
        alloc.dl_powers = upc_dl(ws.scenario);
        break;
      case SchemeId::ppc:
        alloc.dl_powers = ppc_dl(ws.scenario);
        break;
      case SchemeId::opc:
      case SchemeId::uo: {
        arma::vec caps = scheme == SchemeId::opc
                             ? limits.ipd_cap_w_m2
                             : arma::vec(K, arma::fill::value(
                                                std::numeric_limits<double>::infinity()));
        const arma::vec budgets(cfg.num_aps,
                                arma::fill::value(cfg.dl_power_budget_w));
        const DlProblemData data = build_dl_problem(
            ws.channels.estimates, ws.beams, ws.scenario.association, caps,
            budgets, noise, cfg.wavelength_m());
        DlSolveOptions options = spec.dl_options;
        if (spec.verbose) options.trace_out = &std::cerr;
        const DlSolveResult solved = solve_dl_maxmin(data, rp, options);
        alloc.dl_powers = solved.powers;
        failed = solved.status == SolveStatus::numerical_failure;
        break;
      }
      default:
        return;  // fpc is UL-only
    }
  } else {
    switch (scheme) {
      case SchemeId::upc:
        alloc.ul_powers = upc_ul(ws.scenario, limits, spec.baselines_respect_emf);
        break;
      case SchemeId::fpc:
        alloc.ul_powers = fpc_ul(ws.scenario, limits, spec.fpc_exponent,
                                 spec.baselines_respect_emf);
        break;
      case SchemeId::opc:
      case SchemeId::uo: {
        try {
          const UlGainTable table = build_gain_table(
              ws.channels.estimates, ws.beams.ul_filters(), ws.scenario.association,
              noise, limits, cfg.ul_power_budget_w, scheme == SchemeId::opc);
          const UlSolveResult solved =
              solve_ul_maxmin(table, rp, spec.ul_bisect_tol);
          alloc.ul_powers = solved.q;
          failed = solved.status != SolveStatus::feasible;
        } catch (const std::exception&) {
          alloc.ul_powers = arma::vec(K, arma::fill::zeros);
          failed = true;
        }
        break;
      }
      default:
        return;  // ppc is DL-only
    }
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  // designs run on estimates; reported metrics use the true channels
  arma::vec rates(K, arma::fill::zeros);
  arma::vec exposure_ipd(K, arma::fill::zeros);
  arma::vec exposure_sar(K, arma::fill::zeros);
  if (direction == Direction::dl) {
    const arma::vec sinr = dl_sinr(ws.channels.true_channels, ws.beams.beams,
                                   ws.scenario.association, alloc.dl_powers, noise);
    exposure_ipd = ipd(ws.channels.true_channels, ws.beams.beams,
                       ws.scenario.association, alloc.dl_powers, cfg.wavelength_m());
    for (int k = 0; k < K; ++k) rates(k) = rate(sinr(k), rp);
  } else {
    const arma::vec sinr = ul_sinr(ws.channels.true_channels, ws.beams.ul_filters(),
                                   ws.scenario.association, alloc.ul_powers, noise);
    for (int k = 0; k < K; ++k) {
      rates(k) = rate(sinr(k), rp);
      exposure_sar(k) = sar(alloc.ul_powers(k), limits.sar_coeff_per_kg.row(k).max());
    }
  }

  for (int k = 0; k < K; ++k) {
    ResultRow row;
    row.drop = drop;
    row.deployment = cfg.deployment_mode;
    row.direction = direction;
    row.scheme = scheme;
    row.user = k;
    row.rate_bps = rates(k);
    row.ipd_w_m2 = exposure_ipd(k);
    row.sar_w_kg = exposure_sar(k);
    row.solve_time_s = spec.record_timings ? elapsed : 0.0;
    row.sweep_k = point.num_users;
    row.sweep_e = point.sar_cap;
    row.failed = failed;
    rows.push_back(row);
  }
}

std::vector<ResultRow> run_task(const CampaignSpec& spec, const SweepPoint& point,
                                int drop) {
  std::vector<ResultRow> rows;
  const NetworkConfig cf_cfg = config_for_sweep(spec, point);
  const ExposureLimits limits =
      ExposureLimits::uniform(cf_cfg.num_users, spec.num_body_parts,
                              spec.ipd_cap_w_m2, point.sar_cap,
                              spec.sar_coeff_per_kg);
  const std::uint64_t drop_seed =
      mix_seed(spec.master_seed, static_cast<std::uint64_t>(drop),
               static_cast<std::uint64_t>(point.index));

  for (DeploymentMode mode : spec.deployments) {
    const NetworkConfig cfg =
        mode == DeploymentMode::cell_free ? cf_cfg : to_multicell(cf_cfg);
    const DropWorkspace ws = prepare_drop(cfg, spec, drop_seed);
    for (Direction direction : spec.directions)
      for (SchemeId scheme : spec.schemes) {
        if (!scheme_applies(scheme, direction)) continue;
        run_direction_scheme(spec, cfg, limits, ws, direction, scheme, drop,
                             point, rows);
      }
  }
  return rows;
}

}  // namespace

ResultTable run_campaign(const CampaignSpec& spec) {
  spec.base.validate();
  if (spec.num_drops < 1) throw std::invalid_argument("run_campaign: num_drops < 1");

  std::vector<SweepPoint> points;
  const std::vector<int> user_grid =
      spec.sweep_num_users.empty() ? std::vector<int>{spec.base.num_users}
                                   : spec.sweep_num_users;
  const std::vector<double> sar_grid =
      spec.sweep_sar_caps.empty() ? std::vector<double>{spec.sar_cap_w_kg}
                                  : spec.sweep_sar_caps;
  int index = 0;
  for (int k : user_grid)
    for (double e : sar_grid) points.push_back({index++, k, e});

  struct Task {
    SweepPoint point;
    int drop;
  };
  std::vector<Task> tasks;
  tasks.reserve(points.size() * spec.num_drops);
  for (const auto& point : points)
    for (int drop = 0; drop < spec.num_drops; ++drop) tasks.push_back({point, drop});

  std::vector<std::vector<ResultRow>> partials(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> aborted{false};
  std::string first_error;
  std::mutex error_mutex;

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      std::min<std::size_t>(spec.threads > 0 ? spec.threads : hw, tasks.size());

  const auto worker = [&] {
    while (!aborted.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        partials[i] = run_task(spec, tasks[i].point, tasks[i].drop);
      } catch (const std::exception& e) {
        std::scoped_lock lock(error_mutex);
        if (first_error.empty()) first_error = e.what();
        aborted.store(true);
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!first_error.empty())
    throw std::runtime_error("run_campaign: " + first_error);

  ResultTable table;
  for (auto& part : partials)
    table.rows.insert(table.rows.end(), part.begin(), part.end());
  return table;
}

std::string ResultTable::to_csv() const {
  std::string out =
      "drop,deployment,direction,scheme,user,rate_bps,ipd_w_m2,sar_w_kg,"
      "solve_time_s,sweep_k,sweep_e\n";
  for (const auto& row : rows) {
    out += std::to_string(row.drop);
    out += ',';
    out += to_string(row.deployment);
    out += ',';
    out += to_string(row.direction);
    out += ',';
    out += to_string(row.scheme);
    out += ',';
    out += std::to_string(row.user);
    out += ',';
    out += row.failed ? "nan" : format_double(row.rate_bps);
    out += ',';
    out += format_double(row.ipd_w_m2);
    out += ',';
    out += format_double(row.sar_w_kg);
    out += ',';
    out += format_double(row.solve_time_s);
    out += ',';
    out += std::to_string(row.sweep_k);
    out += ',';
    out += format_double(row.sweep_e);
    out += '\n';
  }
  return out;
}

void ResultTable::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << to_csv();
}

ResultTable ResultTable::from_csv(std::istream& in) {
  ResultTable table;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("ResultTable: empty CSV");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 11)
      throw std::runtime_error("ResultTable: line " + std::to_string(line_no) +
                               ": expected 11 fields");
    ResultRow row;
    row.drop = std::stoi(fields[0]);
    row.deployment = fields[1] == "cell_free" ? DeploymentMode::cell_free
                                              : DeploymentMode::multi_cell;
    row.direction = fields[2] == "dl" ? Direction::dl : Direction::ul;
    row.scheme = scheme_from_string(fields[3]);
    row.user = std::stoi(fields[4]);
    row.rate_bps = std::stod(fields[5]);
    row.ipd_w_m2 = std::stod(fields[6]);
    row.sar_w_kg = std::stod(fields[7]);
    row.solve_time_s = std::stod(fields[8]);
    row.sweep_k = std::stoi(fields[9]);
    row.sweep_e = std::stod(fields[10]);
    row.failed = std::isnan(row.rate_bps);
    table.rows.push_back(row);
  }
  return table;
}

ResultTable ResultTable::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return from_csv(in);
}

}  // namespace cfemf
