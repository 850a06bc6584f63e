#include "treatchoice/special_functions.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace treatchoice {

namespace {

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;

double require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::domain_error(std::string(what) + ": non-finite argument");
  return x;
}

// g(t) = t * Phi(-t + a), the objective behind eta.
double eta_objective(double t, double a) { return t * std_normal_cdf(a - t); }

// Stationarity residual f(t) = Phi(a-t) - t*phi(a-t) and its derivative
// f'(t) = -phi(a-t) * (2 + t*(a-t)).
double eta_foc(double t, double a) { return std_normal_cdf(a - t) - t * std_normal_pdf(a - t); }

double eta_foc_deriv(double t, double a) {
  return -std_normal_pdf(a - t) * (2.0 + t * (a - t));
}

// Golden-section maximization of g(t, a) on [lo, hi].
double golden_max(double lo, double hi, double a) {
  constexpr double r = 0.6180339887498949;
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = eta_objective(x1, a);
  double f2 = eta_objective(x2, a);
  while (hi - lo > 1e-13 * (1.0 + hi)) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = eta_objective(x2, a);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = eta_objective(x1, a);
    }
  }
  return 0.5 * (lo + hi);
}

double solve_t_star(double a) {
  // The maximizer always lies in (0, a + 10): f(0) = Phi(a) > 0 and
  // f(a+10) = Phi(-10) - (a+10)*phi(10) < 0 for all a >= 0.
  double lo = 0.0;
  double hi = a + 10.0;
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double f = eta_foc(t, a);
    if (f > 0.0)
      lo = t;
    else
      hi = t;
    double step = f / eta_foc_deriv(t, a);
    double t_next = t - step;
    if (!(t_next > lo && t_next < hi)) t_next = 0.5 * (lo + hi);  // bisect when Newton leaves bracket
    if (std::abs(t_next - t) < 1e-14 * (1.0 + std::abs(t_next))) {
      t = t_next;
      break;
    }
    t = t_next;
  }

  // Guard against a missed peak: t must beat a coarse scan of the bracket.
  double best_scan = 0.0, best_scan_t = 0.0;
  for (int i = 1; i <= 64; ++i) {
    double ts = (a + 10.0) * i / 64.0;
    double g = eta_objective(ts, a);
    if (g > best_scan) {
      best_scan = g;
      best_scan_t = ts;
    }
  }
  if (eta_objective(t, a) < best_scan - 1e-12 * (1.0 + best_scan)) {
    // Fine grid around the best scan point, then golden-section.
    double w = (a + 10.0) / 64.0;
    t = golden_max(std::max(0.0, best_scan_t - w), best_scan_t + w, a);
  }
  return t;
}

struct BitsHash {
  size_t operator()(std::uint64_t b) const noexcept { return std::hash<std::uint64_t>{}(b); }
};

}  // namespace

double std_normal_pdf(double x) {
  require_finite(x, "std_normal_pdf");
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) {
  require_finite(x, "std_normal_cdf");
  const double tail = 0.5 * std::erfc(std::abs(x) * kInvSqrt2);
  return x < 0.0 ? tail : 1.0 - tail;
}

EtaEvaluation eta(double a) {
  require_finite(a, "eta");
  if (a < 0.0) throw std::domain_error("eta: argument must be >= 0");

  thread_local std::unordered_map<std::uint64_t, EtaEvaluation, BitsHash> cache;
  std::uint64_t bits;
  std::memcpy(&bits, &a, sizeof bits);
  if (auto it = cache.find(bits); it != cache.end()) return it->second;

  const double t = solve_t_star(a);
  EtaEvaluation out{a, t, eta_objective(t, a)};
  if (cache.size() < 1u << 20) cache.emplace(bits, out);
  return out;
}

double eta_prime(double a) {
  const EtaEvaluation e = eta(a);
  return std_normal_cdf(a - e.t_star);
}

double capital_h(double a) {
  if (a == 0.0) return 0.0;
  return a / eta(a).eta;
}

}  // namespace treatchoice
