#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "treatchoice/problem.hpp"
#include "treatchoice/rules.hpp"

namespace treatchoice {

enum class SpaceKind { MEAN_CENTERED, REGRESSION };

/// Bounded-dispersion parameter space. MEAN_CENTERED: |theta_k - mean| <= kappa.
/// REGRESSION: theta = X b + xi with X' xi = 0 and |xi_k| <= kappa (covariates
/// taken from the problem).
struct ParameterSpace {
  double kappa = 0.0;
  SpaceKind kind = SpaceKind::MEAN_CENTERED;
};

/// Constraint residuals within tol on every coordinate?
bool space_contains(const TreatmentProblem& problem, const ParameterSpace& space,
                    const std::vector<double>& theta, double tol = 1e-12);

/// Exact expected regret of a linear-threshold rule at theta:
///   sum_k p_k |theta_k| Phi( -sgn(theta_k) * m_k / tau_k ),
/// m = C theta, tau_k the statistic's standard deviation. Coordinates with
/// theta_k = 0 contribute exactly zero. A rule whose statistic is identically
/// zero in some coordinate (tau_k = 0 and m_k = 0) is degenerate.
double regret_at(const TreatmentProblem& problem, const LinearThresholdRule& rule,
                 const std::vector<double>& theta);

struct MonteCarloRegret {
  double estimate;
  double std_error;
};

/// Simulation oracle for regret_at: draws estimates from N(theta, diag sigma^2)
/// (and the rule's randomizers), averages sum_k p_k theta_k (delta*_k - delta_k).
MonteCarloRegret regret_monte_carlo(const TreatmentProblem& problem,
                                    const LinearThresholdRule& rule,
                                    const std::vector<double>& theta, long draws,
                                    std::uint64_t seed);

/// Candidate worst cases for the CES rule: corners of the hyper-rectangle
/// [t, t+kappa]^K (which sits inside the mean-centered space for every t),
/// swept over t and anchored at t = t*(0) * min sigma.
std::vector<std::vector<double>> witness_ces_rectangle(const TreatmentProblem& problem,
                                                       double kappa);

/// Candidate worst cases for the pooling rule: half the groups at t + kappa and
/// half at t - kappa (largest shares on top; odd K keeps one group at t), swept
/// over t and anchored at t = s0 t*(kappa/s0) - kappa.
std::vector<std::vector<double>> witness_pool_alternating(const TreatmentProblem& problem,
                                                          double kappa);

struct SearchBudget {
  int multistarts = 32;    ///< random starts for the K > 2 search
  int grid = 801;          ///< per-axis resolution of the exact K = 2 grid
  int refine_rounds = 6;   ///< zoom rounds on the K = 2 grid
  std::uint64_t seed = 20260819;
};

enum class SearchMethod { GRID, MULTISTART, WITNESS_FAMILY };

std::string search_method_name(SearchMethod method);

struct RegretReport {
  RuleKind rule_label = RuleKind::CUSTOM;
  double max_regret = 0.0;
  std::vector<double> witness_theta;  ///< certifies max_regret as a lower bound
  SearchMethod method = SearchMethod::GRID;
  std::map<std::string, double> bound_values;  ///< filled by bound calculators
};

/// Best regret value found over the parameter space, with the theta attaining
/// it. K = 2 runs an exhaustive 2-D grid with zoom refinement; larger K runs
/// witness-seeded multistart pattern search. Either way the result is a
/// certified lower bound on the true maximum (the witness reproduces it).
RegretReport max_regret(const TreatmentProblem& problem, const LinearThresholdRule& rule,
                        const ParameterSpace& space, const SearchBudget& budget = {});

nlohmann::json regret_report_to_json(const RegretReport& report);

}  // namespace treatchoice
