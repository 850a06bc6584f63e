#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "treatchoice/problem.hpp"

namespace treatchoice {

/// Row-level experimental data: outcome, binary treatment, and the grouping
/// key (already reduced to the chosen columns, one tuple per row).
struct MicroDataset {
  std::vector<double> y;
  std::vector<int> d;                          ///< strictly 0 or 1
  std::vector<std::vector<std::string>> key;   ///< grouping tuple per row
  long dropped_rows = 0;                       ///< rows discarded for missing fields
};

/// Read a comma-separated file (UTF-8, quoted fields allowed, header row
/// required). Column roles are picked by name. Rows with an empty outcome,
/// treatment, or key cell are dropped and counted; a non-numeric outcome or a
/// treatment outside {0,1} is an error.
MicroDataset read_micro_csv(const std::string& path, const std::string& y_column,
                            const std::string& d_column,
                            const std::vector<std::string>& key_columns);

/// Per-group estimates in lexicographic key order.
struct EstimateVector {
  std::vector<std::string> labels;    ///< key tuple joined with '/'
  std::vector<double> theta_hat;      ///< mean difference minus the cost offset
  std::vector<double> sigma_hat;      ///< sqrt(s1^2/n1 + s0^2/n0)
  std::vector<double> p_hat;          ///< group shares over retained groups
  double cost_offset = 0.0;
  std::vector<double> mean_treated;   ///< per-arm means, kept for reporting
  std::vector<double> mean_control;
  std::vector<long> n_treated;
  std::vector<long> n_control;
  std::vector<std::string> dropped_groups;  ///< too small or zero variance
  long dropped_rows = 0;

  int k() const { return static_cast<int>(theta_hat.size()); }
};

/// Collapse the dataset to group-level estimates: theta_hat = treated mean
/// minus control mean minus cost_offset, unequal-variance standard errors,
/// shares proportional to retained group sizes. Groups with fewer than two
/// observations in either arm, or with no outcome variation in both arms, are
/// dropped (listed in dropped_groups) and the shares renormalized.
EstimateVector estimate_groups(const MicroDataset& data, double cost_offset = 0.0);

/// View the estimates as a decision problem (sigma_hat plugged in for sigma).
TreatmentProblem problem_from_estimates(const EstimateVector& estimates);

/// Is the observed spread of theta_hat even distinguishable from noise?
/// Compares range(theta_hat) to the simulated median of range(Z),
/// Z_k ~ N(0, sigma_hat_k^2) independent.
struct DispersionDiagnostic {
  double observed_range = 0.0;
  double null_median = 0.0;
  bool below_null = false;  ///< observed < null median: little real dispersion
  long draws = 0;
  std::uint64_t seed = 0;
};
DispersionDiagnostic dispersion_diagnostic(const EstimateVector& estimates,
                                           long draws = 100000,
                                           std::uint64_t seed = 20260819);

nlohmann::json estimates_to_json(const EstimateVector& estimates);

}  // namespace treatchoice
