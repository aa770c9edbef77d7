// SPDX-License-Identifier: Apache-2.0
//
// cfemf — link-level simulator and power control for user-centric cell-free
// massive MIMO under EMF exposure limits.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cfemf/harness.hpp"

namespace cfemf {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double metric_value(const ResultRow& row, const std::string& metric) {
  if (metric == "rate") return row.rate_bps;
  if (metric == "ipd") return row.ipd_w_m2;
  if (metric == "sar") return row.sar_w_kg;
  throw std::runtime_error("emit_cdf: unknown metric '" + metric + "'");
}

std::string key_value(const ResultRow& row, const std::string& key) {
  if (key == "scheme") return to_string(row.scheme);
  if (key == "deployment") return to_string(row.deployment);
  if (key == "direction") return to_string(row.direction);
  if (key == "sweep_k") return "k" + std::to_string(row.sweep_k);
  if (key == "sweep_e") {
    std::string v = format_double(row.sweep_e);
    std::replace(v.begin(), v.end(), '.', 'p');
    std::replace(v.begin(), v.end(), '-', 'm');
    return "e" + v;
  }
  throw std::runtime_error("emit_cdf: unknown group key '" + key + "'");
}

}  // namespace

std::vector<std::string> emit_cdf(const ResultTable& table, const std::string& metric,
                                  const std::vector<std::string>& group_by,
                                  const std::string& out_dir) {
  if (table.rows.empty()) throw std::runtime_error("emit_cdf: empty table");
  metric_value(table.rows.front(), metric);  // validate metric name early
  for (const auto& key : group_by) key_value(table.rows.front(), key);

  std::filesystem::create_directories(out_dir);

  std::map<std::string, std::vector<double>> groups;
  int skipped = 0;
  for (const auto& row : table.rows) {
    if (row.failed) {
      ++skipped;
      continue;
    }
    std::string label;
    for (const auto& key : group_by) {
      if (!label.empty()) label += "__";
      label += key_value(row, key);
    }
    if (label.empty()) label = "all";
    groups[label].push_back(metric_value(row, metric));
  }
  if (skipped > 0)
    std::cerr << "emit_cdf: warning: skipped " << skipped << " failure rows\n";

  std::vector<std::string> written;
  std::vector<std::string> labels;
  for (auto& [label, values] : groups) {
    if (values.empty()) {
      std::cerr << "emit_cdf: warning: group " << label << " is empty\n";
      continue;
    }
    std::sort(values.begin(), values.end());
    const std::string path =
        (std::filesystem::path(out_dir) / ("cdf_" + metric + "__" + label + ".csv"))
            .string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "value,cdf\n";
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      out << format_double(values[i]) << ',' << format_double((i + 1) / n) << '\n';
    written.push_back(path);
    labels.push_back(label);
  }

  if (!written.empty()) {
    const std::string script =
        (std::filesystem::path(out_dir) / ("plot_cdf_" + metric + ".gp")).string();
    std::ofstream out(script, std::ios::binary);
    out << "# gnuplot script: empirical CDFs of " << metric << "\n";
    out << "set datafile separator ','\n";
    out << "set xlabel '" << metric << "'\n";
    out << "set ylabel 'CDF'\n";
    out << "set key bottom right\n";
    out << "plot \\\n";
    for (std::size_t i = 0; i < written.size(); ++i) {
      out << "  '" << std::filesystem::path(written[i]).filename().string()
          << "' using 1:2 with steps title '" << labels[i] << "'";
      out << (i + 1 < written.size() ? ", \\\n" : "\n");
    }
    written.push_back(script);
  }
  return written;
}

}  // namespace cfemf
