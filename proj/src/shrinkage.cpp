#include "treatchoice/shrinkage.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "treatchoice/errors.hpp"
#include "treatchoice/special_functions.hpp"

namespace treatchoice {

namespace {

void check_group(const TreatmentProblem& problem, int k) {
  if (k < 0 || k >= problem.k()) throw std::out_of_range("shrinkage: group index");
}

struct UnitMinimum {
  double w;
  double value;
  bool flat;
};

// Minimize f over [0,1]: coarse scan to bracket the global basin, golden-section
// refinement, then a tie rule preferring the largest argument so that exact
// endpoint optima come out as exactly 0 or 1.
UnitMinimum minimize_on_unit(const std::function<double(double)>& f) {
  constexpr int n = 1024;
  std::vector<double> vals(n + 1);
  int best = 0;
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    vals[i] = f(static_cast<double>(i) / n);
    if (vals[i] < vmin) {
      vmin = vals[i];
      best = i;
    }
    if (vals[i] > vmax) vmax = vals[i];
  }
  const double tie = 1e-12 * (1.0 + std::abs(vmin));
  if (vmax - vmin <= tie) return {1.0, vals[n], true};  // flat: any w works, take the largest

  double lo = best > 0 ? static_cast<double>(best - 1) / n : 0.0;
  double hi = best < n ? static_cast<double>(best + 1) / n : 1.0;
  constexpr double r = 0.6180339887498949;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-8) {
    if (f1 > f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
  }
  double wr = 0.5 * (lo + hi);
  double fr = f(wr);

  // Snap to an endpoint the refinement only approached: an optimum exactly at
  // the boundary with a flat first derivative leaves wr a hair inside.
  const double fend0 = vals[0], fend1 = vals[n];
  if (1.0 - wr <= 1e-6 && fend1 <= fr + 1e-12 * (1.0 + std::abs(fr))) {
    wr = 1.0;
    fr = fend1;
  } else if (wr <= 1e-6 && fend0 <= fr + 1e-12 * (1.0 + std::abs(fr))) {
    wr = 0.0;
    fr = fend0;
  }

  double v = std::min(fr, std::min(fend0, fend1));
  const double tol = 1e-12 * (1.0 + std::abs(v));
  if (fend1 <= v + tol) return {1.0, fend1, false};
  if (fr <= v + tol) return {wr, fr, false};
  return {0.0, fend0, false};
}

ShrinkageSolution solve_generic(const TreatmentProblem& problem, double kappa_prime,
                                const std::function<double(int, double)>& objective) {
  if (!(kappa_prime >= 0.0) || !std::isfinite(kappa_prime))
    throw config_error("shrinkage: kappa must be >= 0");
  ShrinkageSolution out;
  out.kappa_used = kappa_prime;
  const int k = problem.k();
  out.w_star.resize(k);
  out.psi_values.resize(k);
  out.flat.assign(k, false);
  for (int g = 0; g < k; ++g) {
    auto res = minimize_on_unit([&](double w) { return objective(g, w); });
    out.w_star[g] = res.w;
    out.psi_values[g] = res.value;
    out.flat[g] = res.flat;
  }
  return out;
}

}  // namespace

double s_k(const TreatmentProblem& problem, int k, double w) {
  check_group(problem, k);
  if (!(w >= 0.0 && w <= 1.0)) throw std::domain_error("s_k: w must lie in [0,1]");
  const double kk = problem.k();
  const double sg = problem.sigma()[k];
  const double s0 = problem.s0();
  const double var = (w * w + 2.0 * w * (1.0 - w) / kk) * sg * sg + (1.0 - w) * (1.0 - w) * s0 * s0;
  return std::sqrt(var);
}

double psi(const TreatmentProblem& problem, int k, double w, double kappa) {
  if (!(kappa >= 0.0)) throw std::domain_error("psi: kappa must be >= 0");
  const double s = s_k(problem, k, w);
  return s * eta((1.0 - w) * kappa / s).eta;
}

ShrinkageSolution solve_shrinkage_factors(const TreatmentProblem& problem, double kappa_prime) {
  return solve_generic(problem, kappa_prime,
                       [&](int g, double w) { return psi(problem, g, w, kappa_prime); });
}

ShrinkageSolution solve_shrinkage_factors_large_k(const TreatmentProblem& problem,
                                                  double kappa_prime) {
  return solve_generic(problem, kappa_prime, [&](int g, double w) {
    const double sg = problem.sigma()[g];
    if (w <= 0.0) return kappa_prime;  // limit value; equals 0 when kappa_prime = 0
    return sg * w * eta((1.0 / w - 1.0) * kappa_prime / sg).eta;
  });
}

ShrinkageSolution solve_regression_shrinkage(const TreatmentProblem& problem, double kappa_prime) {
  const Eigen::MatrixXd& h = problem.hat_matrix();  // throws without covariates
  const int k = problem.k();
  return solve_generic(problem, kappa_prime, [&, k](int g, double w) {
    double var = 0.0;
    for (int l = 0; l < k; ++l) {
      const double coef = (l == g ? w : 0.0) + (1.0 - w) * h(g, l);
      var += coef * coef * problem.sigma()[l] * problem.sigma()[l];
    }
    const double s = std::sqrt(var);
    if (s == 0.0) return (1.0 - w) * kappa_prime;  // fully shrunk, zero-variance corner
    return s * eta((1.0 - w) * kappa_prime / s).eta;
  });
}

}  // namespace treatchoice
