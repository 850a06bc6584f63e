#pragma once

namespace treatchoice {

/// Standard normal density.
double std_normal_pdf(double x);

/// Standard normal distribution function.
///
/// Only the tail probability is ever computed (via erfc); the other half is
/// obtained by reflection, so cdf(x) + cdf(-x) == 1 holds at the
/// representation level. Absolute error below 1e-14. Throws
/// std::domain_error for non-finite arguments.
double std_normal_cdf(double x);

/// Result of maximizing g(t) = t * Phi(-t + a) over t >= 0.
struct EtaEvaluation {
  double a;       ///< argument
  double t_star;  ///< maximizer, >= 0
  double eta;     ///< maximum value t_star * Phi(-t_star + a), > 0
};

/// Evaluate eta(a) = max_{t>=0} t * Phi(-t + a) together with its maximizer.
///
/// The stationarity condition Phi(-t+a) - t*phi(-t+a) = 0 is solved by
/// safeguarded Newton on a bracket that always contains the maximizer;
/// a coarse scan guards against the (never observed) multi-peak case and
/// falls back to fine grid search plus golden-section refinement.
/// Requires a >= 0 and finite; results are memoized per thread.
EtaEvaluation eta(double a);

/// Derivative of eta: eta'(a) = Phi(-t_star(a) + a). Requires a >= 0.
double eta_prime(double a);

/// H(a) = a / eta(a), with the limit H(0) = 0. Requires a >= 0.
/// Bounded by 2 since eta(a) >= a/2.
double capital_h(double a);

}  // namespace treatchoice
