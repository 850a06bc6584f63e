#pragma once

#include "treatchoice/problem.hpp"

namespace treatchoice {

/// Upper bound on max-regret(mean-shrinkage at w*(kappa)) / max-regret(CES)
/// over the mean-centered space with dispersion kappa:
///   sum_k p_k psi_k(w*_k;kappa) / [ eta(0) (sum_{k in S} p_k sigma_k
///                                           + sum_{k not in S} p_k sigma_min) ],
/// S = {k : sigma_k <= sigma_min + kappa/t*(0)}. When the spread condition
/// sigma_max - sigma_min <= kappa/t*(0) holds, S is everything and the ratio
/// is at most 1 (shrinkage dominates CES).
struct CesBound {
  double value = 0.0;
  bool condition_holds = false;  ///< sigma_max - sigma_min <= kappa/t*(0)
};
CesBound bound_thm1(const TreatmentProblem& problem, double kappa);

/// Upper bound on max-regret(mean-shrinkage) / max-regret(pooling):
///   value        = sum_k p_k psi_k(w*_k;kappa)
///                    / max{ share * s0 eta(kappa/s0), s0 eta(kappa/s0) - kappa }
///   min_of_three = min{ 1/share, s0 eta/(s0 eta - kappa),
///                       eta(0) sum p_k sigma_k / (share * s0 eta) }
/// with share = 1/2 for even K. Odd K (flagged) uses the certifiable analogue:
/// share = the sum of the floor(K/2) largest p_k. value <= min_of_three always.
struct PoolBound {
  double value = 0.0;
  double min_of_three = 0.0;
  double share = 0.5;
  bool even_k = true;
};
PoolBound bound_thm2(const TreatmentProblem& problem, double kappa);

/// Misspecified dispersion: the researcher picks factors for kappa_prime while
/// the true space has dispersion kappa. The CES ratio bound becomes
///   value = { sum_k p_k psi_k(w*_k(kappa');kappa') / denom(kappa) } * inflation,
///   inflation = 1 + max_k H( (1-w*_k(kappa')) kappa' / s_k(w*_k(kappa')) )
///                     * max(kappa - kappa', 0) / kappa',
/// equal to bound_thm1 when kappa' = kappa. `simplified` is the coarser bound
/// valid whenever the spread condition holds: the inflation factor alone
/// (exactly 1 for kappa' >= kappa). kappa' = 0 with kappa > 0 divides by zero:
/// flagged infinite, value = +inf.
struct CesMisBound {
  double value = 0.0;
  double simplified = 0.0;
  double inflation = 1.0;
  bool condition_holds = false;
  bool infinite = false;
};
CesMisBound bound_thm3(const TreatmentProblem& problem, double kappa, double kappa_prime);

/// Pooling analogue of bound_thm3: first-line ratio of bound_thm2 with the
/// numerator at (w*(kappa'), kappa'), times the same inflation factor.
struct PoolMisBound {
  double value = 0.0;
  double inflation = 1.0;
  double share = 0.5;
  bool even_k = true;
  bool infinite = false;
};
PoolMisBound bound_thm4(const TreatmentProblem& problem, double kappa, double kappa_prime);

}  // namespace treatchoice
