#pragma once

#include <vector>

#include "treatchoice/problem.hpp"

namespace treatchoice {

/// Standard deviation of the shrunk statistic w*theta_hat_k + (1-w)*ave(theta_hat):
/// sqrt( {w^2 + 2w(1-w)/K} sigma_k^2 + (1-w)^2 s0^2 ). Group index is 0-based.
/// Throws std::domain_error for w outside [0,1].
double s_k(const TreatmentProblem& problem, int k, double w);

/// Per-group worst-case component psi_k(w;kappa) = s_k(w) * eta((1-w)*kappa/s_k(w)).
/// Throws std::domain_error for kappa < 0.
double psi(const TreatmentProblem& problem, int k, double w, double kappa);

struct ShrinkageSolution {
  std::vector<double> w_star;      ///< factors in [0,1], one per group
  std::vector<double> psi_values;  ///< minimized objective values (outcome units)
  double kappa_used = 0.0;         ///< dispersion bound the factors were chosen for
  std::vector<bool> flat;          ///< objective numerically constant in w (factor arbitrary)
};

/// Choose each w_k to minimize psi_k(.;kappa_prime) over [0,1]: 1024-point scan,
/// golden-section refinement, and a tie rule that prefers the largest factor
/// (values within ~1e-12 relative are treated as equal). Endpoints are exact:
/// kappa_prime = 0 under homoscedasticity gives w = 0, large kappa_prime gives w = 1.
ShrinkageSolution solve_shrinkage_factors(const TreatmentProblem& problem, double kappa_prime);

/// Many-groups approximation: minimize sigma_k * w * eta((1/w - 1)*kappa/sigma_k)
/// with the w -> 0 limit (kappa for kappa > 0, else 0) as the left endpoint value.
ShrinkageSolution solve_shrinkage_factors_large_k(const TreatmentProblem& problem,
                                                  double kappa_prime);

/// Regression variant: shrink toward the fitted value x_k' beta_hat. The shrunk
/// statistic is linear in theta_hat with coefficients w*1{l=k} + (1-w)*h_{kl}
/// (h the projection matrix), so its standard deviation replaces s_k above.
ShrinkageSolution solve_regression_shrinkage(const TreatmentProblem& problem, double kappa_prime);

}  // namespace treatchoice
