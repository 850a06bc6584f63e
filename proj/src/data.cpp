#include "treatchoice/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "treatchoice/errors.hpp"
#include "treatchoice/rng.hpp"

namespace treatchoice {

namespace {

// One CSV record, honoring quoted fields ("" escapes a quote) and trailing \r.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cell;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  fields.push_back(std::move(cell));
  return fields;
}

size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw data_error("csv: no column named '" + name + "'");
  return static_cast<size_t>(it - header.begin());
}

double parse_outcome(const std::string& cell, long line_no) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0' || !std::isfinite(v))
    throw data_error("csv: non-numeric outcome '" + cell + "' on line " +
                     std::to_string(line_no));
  return v;
}

struct ArmStats {
  std::vector<double> values;

  long n() const { return static_cast<long>(values.size()); }
  // Sorted accumulation keeps every statistic invariant to input row order.
  double mean() const {
    std::vector<double> v = values;
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }
  double variance() const {  // unbiased
    const double m = mean();
    std::vector<double> v = values;
    std::sort(v.begin(), v.end());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
  }
};

std::string join_key(const std::vector<std::string>& key) {
  std::string label;
  for (size_t i = 0; i < key.size(); ++i) {
    if (i) label += '/';
    label += key[i];
  }
  return label;
}

}  // namespace

MicroDataset read_micro_csv(const std::string& path, const std::string& y_column,
                            const std::string& d_column,
                            const std::vector<std::string>& key_columns) {
  if (key_columns.empty()) throw config_error("csv: at least one key column is required");
  std::ifstream in(path);
  if (!in) throw data_error("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw data_error("csv: '" + path + "' is empty (header required)");

  const std::vector<std::string> header = split_csv_line(line);
  const size_t yi = column_index(header, y_column);
  const size_t di = column_index(header, d_column);
  std::vector<size_t> ki;
  for (const auto& name : key_columns) ki.push_back(column_index(header, name));

  MicroDataset data;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw data_error("csv: line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(header.size()));
    bool missing = fields[yi].empty() || fields[di].empty();
    for (size_t idx : ki) missing = missing || fields[idx].empty();
    if (missing) {
      ++data.dropped_rows;
      continue;
    }
    const std::string& dcell = fields[di];
    if (dcell != "0" && dcell != "1")
      throw data_error("csv: treatment must be 0 or 1, got '" + dcell + "' on line " +
                       std::to_string(line_no));
    data.y.push_back(parse_outcome(fields[yi], line_no));
    data.d.push_back(dcell == "1" ? 1 : 0);
    std::vector<std::string> key;
    key.reserve(ki.size());
    for (size_t idx : ki) key.push_back(fields[idx]);
    data.key.push_back(std::move(key));
  }
  return data;
}

EstimateVector estimate_groups(const MicroDataset& data, double cost_offset) {
  if (data.y.size() != data.d.size() || data.y.size() != data.key.size())
    throw data_error("estimate_groups: ragged dataset");
  for (int d : data.d)
    if (d != 0 && d != 1) throw data_error("estimate_groups: treatment must be 0 or 1");

  // std::map keeps groups in lexicographic key order, which fixes the indexing.
  std::map<std::vector<std::string>, std::pair<ArmStats, ArmStats>> groups;
  for (size_t i = 0; i < data.y.size(); ++i) {
    auto& arms = groups[data.key[i]];
    (data.d[i] == 1 ? arms.first : arms.second).values.push_back(data.y[i]);
  }

  EstimateVector out;
  out.cost_offset = cost_offset;
  out.dropped_rows = data.dropped_rows;
  std::vector<long> sizes;
  for (const auto& [key, arms] : groups) {
    const ArmStats& treated = arms.first;
    const ArmStats& control = arms.second;
    if (treated.n() < 2 || control.n() < 2) {
      out.dropped_groups.push_back(join_key(key) + " (too few observations per arm)");
      continue;
    }
    const double var1 = treated.variance();
    const double var0 = control.variance();
    const double se = std::sqrt(var1 / treated.n() + var0 / control.n());
    if (!(se > 0.0)) {
      out.dropped_groups.push_back(join_key(key) + " (no outcome variation)");
      continue;
    }
    out.labels.push_back(join_key(key));
    out.mean_treated.push_back(treated.mean());
    out.mean_control.push_back(control.mean());
    out.n_treated.push_back(treated.n());
    out.n_control.push_back(control.n());
    out.theta_hat.push_back(treated.mean() - control.mean() - cost_offset);
    out.sigma_hat.push_back(se);
    sizes.push_back(treated.n() + control.n());
  }

  if (out.k() < 2)
    throw data_error("estimate_groups: need at least 2 usable groups, found " +
                     std::to_string(out.k()));
  long total = 0;
  for (long n : sizes) total += n;
  for (long n : sizes) out.p_hat.push_back(static_cast<double>(n) / static_cast<double>(total));
  return out;
}

TreatmentProblem problem_from_estimates(const EstimateVector& estimates) {
  return TreatmentProblem(estimates.sigma_hat, estimates.p_hat);
}

DispersionDiagnostic dispersion_diagnostic(const EstimateVector& estimates, long draws,
                                           std::uint64_t seed) {
  if (estimates.k() < 2) throw data_error("dispersion_diagnostic: need at least 2 groups");
  if (draws < 1) throw config_error("dispersion_diagnostic: draws must be >= 1");

  DispersionDiagnostic diag;
  diag.draws = draws;
  diag.seed = seed;
  const auto [lo, hi] =
      std::minmax_element(estimates.theta_hat.begin(), estimates.theta_hat.end());
  diag.observed_range = *hi - *lo;

  GaussianSampler normal(seed);
  std::vector<double> ranges(static_cast<size_t>(draws));
  for (long i = 0; i < draws; ++i) {
    double zmin = 0.0, zmax = 0.0;
    for (int g = 0; g < estimates.k(); ++g) {
      const double z = estimates.sigma_hat[g] * normal();
      if (g == 0) {
        zmin = zmax = z;
      } else {
        zmin = std::min(zmin, z);
        zmax = std::max(zmax, z);
      }
    }
    ranges[static_cast<size_t>(i)] = zmax - zmin;
  }
  auto mid = ranges.begin() + ranges.size() / 2;
  std::nth_element(ranges.begin(), mid, ranges.end());
  diag.null_median = *mid;
  diag.below_null = diag.observed_range < diag.null_median;
  return diag;
}

nlohmann::json estimates_to_json(const EstimateVector& estimates) {
  nlohmann::json j;
  j["labels"] = estimates.labels;
  j["theta_hat"] = estimates.theta_hat;
  j["sigma_hat"] = estimates.sigma_hat;
  j["p_hat"] = estimates.p_hat;
  j["cost_offset"] = estimates.cost_offset;
  j["mean_treated"] = estimates.mean_treated;
  j["mean_control"] = estimates.mean_control;
  j["n_treated"] = estimates.n_treated;
  j["n_control"] = estimates.n_control;
  j["dropped_groups"] = estimates.dropped_groups;
  j["dropped_rows"] = estimates.dropped_rows;
  return j;
}

}  // namespace treatchoice
