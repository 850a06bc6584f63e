#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treatchoice/regret.hpp"

namespace treatchoice {

/// Options shared by every command. `json` prints machine-readable results to
/// stdout and suppresses SVG plots (CSV outputs and their config sidecars are
/// always written - they are the record of the run).
struct CommonOptions {
  std::string out_dir = ".";
  std::uint64_t seed = 20260819;
  bool json = false;
};

struct EtaOptions {
  double min = 0.0;
  double max = 3.0;
  double step = 0.01;
};
int cmd_eta(const EtaOptions& opt, const CommonOptions& common);

struct FactorsOptions {
  std::vector<int> k_list{2, 5, 100};  ///< homoscedastic panel sizes
  double sigma = 1.0;
  double kappa_max = 1.5;
  double kappa_step = 0.05;
  std::string problem_path;  ///< per-group curves for this problem instead
};
int cmd_factors(const FactorsOptions& opt, const CommonOptions& common);

struct CompareOptions {
  std::string problem_path;        ///< JSON problem; overrides sigma/p
  std::vector<double> sigma{1.0, 1.0};
  std::vector<double> p{0.5, 0.5};
  double kappa_min = 0.1;
  double kappa_max = 1.5;
  double kappa_step = 0.1;
  std::string kappa_prime_rule = "equal";  ///< equal | 1.2x | 0.8x
  SearchBudget budget;
};
int cmd_regret_compare(const CompareOptions& opt, const CommonOptions& common);

struct BoundsOptions {
  std::string problem_path;
  std::vector<double> sigma{1.0, 1.0};
  std::vector<double> p{0.5, 0.5};
  double kappa_min = 0.1;
  double kappa_max = 1.5;
  double kappa_step = 0.1;
  std::string kappa_prime_rule = "equal";
};
int cmd_bounds(const BoundsOptions& opt, const CommonOptions& common);

struct EstimateOptions {
  std::string data_path;
  std::string y_column = "y";
  std::string d_column = "d";
  std::vector<std::string> key_columns;
  double cost_offset = 0.0;
};
int cmd_estimate(const EstimateOptions& opt, const CommonOptions& common);

struct DecideOptions {
  std::string data_path;       ///< CSV micro-data, or:
  std::string estimates_path;  ///< estimates JSON from cmd_estimate
  std::string y_column = "y";
  std::string d_column = "d";
  std::vector<std::string> key_columns;
  double cost_offset = 0.0;
  double kappa = 0.0;
  std::string variant = "mean";  ///< mean | regression
};
int cmd_decide(const DecideOptions& opt, const CommonOptions& common);

}  // namespace treatchoice
