#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treatchoice/problem.hpp"

namespace treatchoice {

enum class RuleKind { CES, POOL, SHRINK_MEAN, SHRINK_REG, CUSTOM };

std::string rule_kind_name(RuleKind kind);
RuleKind rule_kind_from_name(const std::string& name);

/// A treatment rule linear in the estimates: group k is treated iff
/// (C theta_hat)_k + v_k Z_k >= 0 with Z_k ~ N(0,1) independent of the data.
/// v = 0 everywhere gives the deterministic rules (CES, pooling, shrinkage).
struct LinearThresholdRule {
  Eigen::MatrixXd weights;            ///< K x K matrix C
  std::vector<double> randomization;  ///< v_k >= 0, one per group
  RuleKind label = RuleKind::CUSTOM;

  int k() const { return static_cast<int>(weights.rows()); }
  bool randomized() const;
};

/// Build one of the named rules. `w` (shrinkage factors in [0,1], one per
/// group) is required for SHRINK_MEAN / SHRINK_REG and rejected otherwise;
/// `v` supplies optional randomization magnitudes (default all zero).
/// SHRINK_REG requires problem covariates. CUSTOM is not built here — use
/// make_custom_rule.
LinearThresholdRule build_rule(const TreatmentProblem& problem, RuleKind kind,
                               const std::vector<double>& w = {},
                               const std::vector<double>& v = {});

LinearThresholdRule make_custom_rule(Eigen::MatrixXd weights, std::vector<double> v = {});

/// Standard deviation of the decision statistic for group k:
/// sqrt( sum_l C_{kl}^2 sigma_l^2 + v_k^2 ).
double rule_stat_stddev(const TreatmentProblem& problem, const LinearThresholdRule& rule, int k);

struct DecisionResult {
  std::vector<int> treat;         ///< 1 = treat, 0 = do not treat
  std::vector<double> statistic;  ///< realized (C theta_hat)_k + v_k z_k
  std::vector<double> z;          ///< normal draws consumed; empty when v = 0
  std::optional<std::uint64_t> seed;
};

/// Apply the rule to realized estimates. Ties at exactly zero treat.
/// Deterministic when v = 0; a randomized rule without a seed is a
/// configuration error (runs must be reproducible).
DecisionResult decide(const LinearThresholdRule& rule, const std::vector<double>& theta_hat,
                      std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace treatchoice
