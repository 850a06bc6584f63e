#include "treatchoice/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "treatchoice/errors.hpp"
#include "treatchoice/shrinkage.hpp"
#include "treatchoice/special_functions.hpp"

namespace treatchoice {

namespace {

void check_kappa(double kappa, const char* who) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw config_error(std::string(who) + ": kappa must be >= 0");
}

double numerator(const TreatmentProblem& problem, const ShrinkageSolution& sol) {
  double n = 0.0;
  for (int k = 0; k < problem.k(); ++k) n += problem.p()[k] * sol.psi_values[k];
  return n;
}

double ces_denominator(const TreatmentProblem& problem, double kappa) {
  const double t0 = eta(0.0).t_star;
  const double cut = problem.sigma_min() + kappa / t0;
  double d = 0.0;
  for (int k = 0; k < problem.k(); ++k)
    d += problem.p()[k] * (problem.sigma()[k] <= cut ? problem.sigma()[k] : problem.sigma_min());
  return eta(0.0).eta * d;
}

// Share of the population the alternating pooling witness provably misserves:
// 1/2 for even K, the floor(K/2) largest shares otherwise.
double pool_share(const TreatmentProblem& problem) {
  const int k = problem.k();
  if (k % 2 == 0) return 0.5;
  std::vector<double> p = problem.p();
  std::sort(p.begin(), p.end(), std::greater<>());
  double share = 0.0;
  for (int i = 0; i < k / 2; ++i) share += p[i];
  return share;
}

double pool_denominator(const TreatmentProblem& problem, double kappa, double share) {
  const double s0 = problem.s0();
  const double base = s0 * eta(kappa / s0).eta;
  return std::max(share * base, base - kappa);
}

// 1 + max_k H((1-w_k) kappa'/s_k(w_k)) * (kappa - kappa')_+ / kappa', factors
// chosen for kappa'. Exactly 1 when kappa <= kappa'; +inf when kappa' = 0 < kappa.
struct Inflation {
  double factor;
  bool infinite;
};
Inflation inflation_factor(const TreatmentProblem& problem, const ShrinkageSolution& sol,
                           double kappa, double kappa_prime) {
  if (kappa <= kappa_prime) return {1.0, false};
  if (kappa_prime == 0.0) return {std::numeric_limits<double>::infinity(), true};
  double hmax = 0.0;
  for (int k = 0; k < problem.k(); ++k) {
    const double w = sol.w_star[k];
    const double a = (1.0 - w) * kappa_prime / s_k(problem, k, w);
    hmax = std::max(hmax, capital_h(a));
  }
  return {1.0 + hmax * (kappa - kappa_prime) / kappa_prime, false};
}

}  // namespace

CesBound bound_thm1(const TreatmentProblem& problem, double kappa) {
  check_kappa(kappa, "bound_thm1");
  const ShrinkageSolution sol = solve_shrinkage_factors(problem, kappa);
  CesBound out;
  out.value = numerator(problem, sol) / ces_denominator(problem, kappa);
  out.condition_holds =
      problem.sigma_max() - problem.sigma_min() <= kappa / eta(0.0).t_star;
  return out;
}

PoolBound bound_thm2(const TreatmentProblem& problem, double kappa) {
  check_kappa(kappa, "bound_thm2");
  const ShrinkageSolution sol = solve_shrinkage_factors(problem, kappa);
  PoolBound out;
  out.even_k = problem.k() % 2 == 0;
  out.share = pool_share(problem);
  out.value = numerator(problem, sol) / pool_denominator(problem, kappa, out.share);

  const double s0 = problem.s0();
  const double base = s0 * eta(kappa / s0).eta;
  const double inf = std::numeric_limits<double>::infinity();
  double sum_ps = 0.0;
  for (int k = 0; k < problem.k(); ++k) sum_ps += problem.p()[k] * problem.sigma()[k];
  const double term1 = 1.0 / out.share;
  const double term2 = base - kappa > 0.0 ? base / (base - kappa) : inf;
  const double term3 = eta(0.0).eta * sum_ps / (out.share * base);
  out.min_of_three = std::min({term1, term2, term3});
  return out;
}

CesMisBound bound_thm3(const TreatmentProblem& problem, double kappa, double kappa_prime) {
  check_kappa(kappa, "bound_thm3");
  check_kappa(kappa_prime, "bound_thm3 (kappa_prime)");
  const ShrinkageSolution sol = solve_shrinkage_factors(problem, kappa_prime);
  const Inflation inf = inflation_factor(problem, sol, kappa, kappa_prime);
  CesMisBound out;
  out.inflation = inf.factor;
  out.infinite = inf.infinite;
  out.condition_holds =
      problem.sigma_max() - problem.sigma_min() <= kappa / eta(0.0).t_star;
  out.simplified = inf.factor;
  out.value = inf.infinite
                  ? std::numeric_limits<double>::infinity()
                  : numerator(problem, sol) / ces_denominator(problem, kappa) * inf.factor;
  return out;
}

PoolMisBound bound_thm4(const TreatmentProblem& problem, double kappa, double kappa_prime) {
  check_kappa(kappa, "bound_thm4");
  check_kappa(kappa_prime, "bound_thm4 (kappa_prime)");
  const ShrinkageSolution sol = solve_shrinkage_factors(problem, kappa_prime);
  const Inflation inf = inflation_factor(problem, sol, kappa, kappa_prime);
  PoolMisBound out;
  out.even_k = problem.k() % 2 == 0;
  out.share = pool_share(problem);
  out.inflation = inf.factor;
  out.infinite = inf.infinite;
  out.value = inf.infinite ? std::numeric_limits<double>::infinity()
                           : numerator(problem, sol) /
                                 pool_denominator(problem, kappa, out.share) * inf.factor;
  return out;
}

}  // namespace treatchoice
