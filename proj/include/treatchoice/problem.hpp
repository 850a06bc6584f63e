#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace treatchoice {

/// Fixed design of a subgroup treatment-choice problem: per-group standard
/// deviations of the effect estimates, population shares, and (optionally)
/// covariate rows for the regression-shrinkage variant.
///
/// The constructor validates everything: K >= 2, all sigma > 0, shares
/// nonnegative and summing to 1 within 1e-12, covariate row count K, and an
/// invertible covariate Gram matrix. Malformed vectors throw data_error;
/// a rank-deficient covariate matrix throws config_error.
class TreatmentProblem {
 public:
  TreatmentProblem(std::vector<double> sigma, std::vector<double> p,
                   std::optional<Eigen::MatrixXd> covariates = std::nullopt);

  int k() const { return static_cast<int>(sigma_.size()); }
  const std::vector<double>& sigma() const { return sigma_; }
  const std::vector<double>& p() const { return p_; }
  bool has_covariates() const { return covariates_.has_value(); }
  const Eigen::MatrixXd& covariates() const;

  double sigma_min() const;
  double sigma_max() const;
  /// Standard deviation of the plain average of the estimates:
  /// s0 = sqrt(sum sigma_l^2) / K.
  double s0() const;

  /// K x K projection matrix X (X'X)^-1 X' onto the covariate column space.
  /// Requires covariates; computed once and cached.
  const Eigen::MatrixXd& hat_matrix() const;

 private:
  std::vector<double> sigma_;
  std::vector<double> p_;
  std::optional<Eigen::MatrixXd> covariates_;
  mutable std::optional<Eigen::MatrixXd> hat_;
};

/// Parse {"sigma": [...], "p": [...], "covariates": [[...]]} (covariates
/// optional). Unknown keys are ignored so the same object can carry
/// "kappa_prime" and friends for the CLI.
TreatmentProblem problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const TreatmentProblem& problem);

}  // namespace treatchoice
