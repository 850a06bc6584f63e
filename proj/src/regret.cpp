#include "treatchoice/regret.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "treatchoice/errors.hpp"
#include "treatchoice/rng.hpp"
#include "treatchoice/special_functions.hpp"

namespace treatchoice {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Location search box half-width: regret decays like a Gaussian tail in the
// location, so nothing interesting lives beyond a few sigma past kappa.
double location_halfwidth(const TreatmentProblem& problem, double kappa) {
  return 5.0 * (kappa + problem.sigma_max());
}

void check_space(const TreatmentProblem& problem, const ParameterSpace& space) {
  if (!(space.kappa >= 0.0) || !std::isfinite(space.kappa))
    throw config_error("parameter space: kappa must be >= 0");
  if (space.kind == SpaceKind::REGRESSION && !problem.has_covariates())
    throw config_error("parameter space: regression kind needs covariates");
}

// Dispersion component orthogonal to the location directions: demeaning for
// the mean-centered space, annihilator projection for the regression space.
std::vector<double> residual_project(const TreatmentProblem& problem, SpaceKind kind,
                                     const std::vector<double>& r) {
  const int k = static_cast<int>(r.size());
  std::vector<double> out(k);
  if (kind == SpaceKind::MEAN_CENTERED) {
    double m = mean_of(r);
    for (int i = 0; i < k; ++i) out[i] = r[i] - m;
  } else {
    const Eigen::MatrixXd& h = problem.hat_matrix();
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), k);
    Eigen::VectorXd res = rv - h * rv;
    for (int i = 0; i < k; ++i) out[i] = res(i);
  }
  return out;
}

// Feasible dispersion from a raw direction: project onto the constraint
// subspace, then shrink radially into the box. Every feasible xi is a fixed
// point, so the map parametrizes the whole constraint set.
std::vector<double> feasible_residual(const TreatmentProblem& problem, const ParameterSpace& space,
                                      const std::vector<double>& raw) {
  std::vector<double> xi = residual_project(problem, space.kind, raw);
  double amax = 0.0;
  for (double x : xi) amax = std::max(amax, std::abs(x));
  if (amax > space.kappa) {
    double scale = space.kappa / amax;
    for (double& x : xi) x *= scale;
  }
  return xi;
}

}  // namespace

bool space_contains(const TreatmentProblem& problem, const ParameterSpace& space,
                    const std::vector<double>& theta, double tol) {
  if (static_cast<int>(theta.size()) != problem.k()) return false;
  check_space(problem, space);
  if (space.kind == SpaceKind::MEAN_CENTERED) {
    double m = mean_of(theta);
    for (double t : theta)
      if (std::abs(t - m) > space.kappa + tol) return false;
    return true;
  }
  const Eigen::MatrixXd& x = problem.covariates();
  Eigen::Map<const Eigen::VectorXd> tv(theta.data(), theta.size());
  Eigen::VectorXd b = (x.transpose() * x).ldlt().solve(x.transpose() * tv);
  Eigen::VectorXd xi = tv - x * b;
  double scale = 1.0 + tv.cwiseAbs().maxCoeff();
  if (((x.transpose() * xi).cwiseAbs().maxCoeff()) > tol * scale * x.cwiseAbs().maxCoeff() * theta.size())
    return false;
  return xi.cwiseAbs().maxCoeff() <= space.kappa + tol * scale;
}

double regret_at(const TreatmentProblem& problem, const LinearThresholdRule& rule,
                 const std::vector<double>& theta) {
  const int k = problem.k();
  if (rule.k() != k || static_cast<int>(theta.size()) != k)
    throw data_error("regret_at: dimension mismatch");
  Eigen::Map<const Eigen::VectorXd> tv(theta.data(), k);
  Eigen::VectorXd m = rule.weights * tv;
  double total = 0.0;
  for (int g = 0; g < k; ++g) {
    if (theta[g] == 0.0) continue;
    const double tau = rule_stat_stddev(problem, rule, g);
    const double sgn = theta[g] > 0.0 ? 1.0 : -1.0;
    double miss;  // probability the rule picks the wrong arm for group g
    if (tau == 0.0) {
      if (m(g) == 0.0)
        throw config_error("regret_at: rule statistic is degenerate (zero mean and variance)");
      miss = sgn * m(g) < 0.0 ? 1.0 : 0.0;
    } else {
      miss = std_normal_cdf(-sgn * m(g) / tau);
    }
    total += problem.p()[g] * std::abs(theta[g]) * miss;
  }
  return total;
}

MonteCarloRegret regret_monte_carlo(const TreatmentProblem& problem,
                                    const LinearThresholdRule& rule,
                                    const std::vector<double>& theta, long draws,
                                    std::uint64_t seed) {
  const int k = problem.k();
  if (rule.k() != k || static_cast<int>(theta.size()) != k)
    throw data_error("regret_monte_carlo: dimension mismatch");
  if (draws < 1) throw config_error("regret_monte_carlo: draws must be >= 1");

  GaussianSampler normal(seed);
  const bool random = rule.randomized();
  Eigen::VectorXd draw(k), stat(k);
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < draws; ++i) {
    for (int g = 0; g < k; ++g) draw(g) = theta[g] + problem.sigma()[g] * normal();
    stat.noalias() = rule.weights * draw;
    if (random)
      for (int g = 0; g < k; ++g) stat(g) += rule.randomization[g] * normal();
    double loss = 0.0;
    for (int g = 0; g < k; ++g) {
      const int best = theta[g] >= 0.0 ? 1 : 0;
      const int act = stat(g) >= 0.0 ? 1 : 0;
      loss += problem.p()[g] * theta[g] * (best - act);
    }
    sum += loss;
    sumsq += loss * loss;
  }
  const double n = static_cast<double>(draws);
  const double mean = sum / n;
  const double var = std::max(0.0, sumsq / n - mean * mean);
  return {mean, std::sqrt(var / n)};
}

std::vector<std::vector<double>> witness_ces_rectangle(const TreatmentProblem& problem,
                                                       double kappa) {
  if (!(kappa >= 0.0)) throw config_error("witness_ces_rectangle: kappa must be >= 0");
  const int k = problem.k();
  const double t0 = eta(0.0).t_star;
  std::vector<std::vector<double>> family;

  auto push_for_t = [&](double t) {
    // Per-coordinate best corner of [t, t+kappa]^K for the CES objective
    // sigma_k * s Phi(-s), plus the two uniform corners.
    std::vector<double> best(k), low(k, t), high(k, t + kappa);
    for (int g = 0; g < k; ++g) {
      const double sg = problem.sigma()[g];
      auto value = [&](double th) { return th * std_normal_cdf(-th / sg); };
      best[g] = value(t) >= value(t + kappa) ? t : t + kappa;
    }
    family.push_back(std::move(best));
    family.push_back(std::move(low));
    family.push_back(std::move(high));
  };

  push_for_t(t0 * problem.sigma_min());
  const double hi = 3.0 * (problem.sigma_max() + kappa);
  for (int i = 0; i <= 200; ++i) push_for_t(hi * i / 200.0);

  if (k <= 10 && kappa > 0.0) {
    // Full corner enumeration at the anchor, for rules that mix coordinates.
    const double t = t0 * problem.sigma_min();
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      std::vector<double> corner(k);
      for (int g = 0; g < k; ++g) corner[g] = (mask >> g) & 1u ? t + kappa : t;
      family.push_back(std::move(corner));
    }
  }
  return family;
}

std::vector<std::vector<double>> witness_pool_alternating(const TreatmentProblem& problem,
                                                          double kappa) {
  if (!(kappa >= 0.0)) throw config_error("witness_pool_alternating: kappa must be >= 0");
  const int k = problem.k();
  // Largest shares get the +kappa coordinates.
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return problem.p()[a] > problem.p()[b]; });

  auto make = [&](double t) {
    std::vector<double> theta(k);
    for (int rank = 0; rank < k; ++rank) {
      double offset = rank < k / 2 ? kappa : (k % 2 == 1 && rank == k / 2 ? 0.0 : -kappa);
      theta[order[rank]] = t + offset;
    }
    return theta;
  };

  std::vector<std::vector<double>> family;
  const double s0 = problem.s0();
  family.push_back(make(s0 * eta(kappa / s0).t_star - kappa));  // the certified anchor
  const double width = 3.0 * (problem.sigma_max() + kappa);
  for (int i = 0; i <= 200; ++i) family.push_back(make(-kappa + width * i / 200.0));
  return family;
}

std::string search_method_name(SearchMethod method) {
  switch (method) {
    case SearchMethod::GRID: return "GRID";
    case SearchMethod::MULTISTART: return "MULTISTART";
    case SearchMethod::WITNESS_FAMILY: return "WITNESS_FAMILY";
  }
  return "GRID";
}

namespace {

// Exhaustive search for K = 2 over theta = (m + v, m - v), |v| <= kappa:
// a coarse grid, then repeated zooming around the incumbent cell.
RegretReport max_regret_grid2(const TreatmentProblem& problem, const LinearThresholdRule& rule,
                              const ParameterSpace& space, const SearchBudget& budget) {
  const double kappa = space.kappa;
  const double c = location_halfwidth(problem, kappa);
  const double tau0 = rule_stat_stddev(problem, rule, 0);
  const double tau1 = rule_stat_stddev(problem, rule, 1);
  const double p0 = problem.p()[0], p1 = problem.p()[1];
  const double c00 = rule.weights(0, 0), c01 = rule.weights(0, 1);
  const double c10 = rule.weights(1, 0), c11 = rule.weights(1, 1);

  auto value = [&](double m, double v) {
    const double th0 = m + v, th1 = m - v;
    double total = 0.0;
    if (th0 != 0.0) {
      const double stat = c00 * th0 + c01 * th1;
      const double sgn = th0 > 0.0 ? 1.0 : -1.0;
      total += p0 * std::abs(th0) *
               (tau0 == 0.0 ? (sgn * stat < 0.0 ? 1.0 : 0.0) : std_normal_cdf(-sgn * stat / tau0));
    }
    if (th1 != 0.0) {
      const double stat = c10 * th0 + c11 * th1;
      const double sgn = th1 > 0.0 ? 1.0 : -1.0;
      total += p1 * std::abs(th1) *
               (tau1 == 0.0 ? (sgn * stat < 0.0 ? 1.0 : 0.0) : std_normal_cdf(-sgn * stat / tau1));
    }
    return total;
  };

  double best = -1.0, best_m = 0.0, best_v = 0.0;
  auto sweep = [&](double m_lo, double m_hi, double v_lo, double v_hi, int n) {
    const int nm = n;
    const int nv = kappa == 0.0 ? 0 : n;
    for (int i = 0; i <= nm; ++i) {
      const double m = nm == 0 ? m_lo : m_lo + (m_hi - m_lo) * i / nm;
      for (int j = 0; j <= nv; ++j) {
        const double v = nv == 0 ? 0.0 : v_lo + (v_hi - v_lo) * j / nv;
        const double val = value(m, v);
        if (val > best) {
          best = val;
          best_m = m;
          best_v = v;
        }
      }
    }
  };

  sweep(-c, c, -kappa, kappa, budget.grid - 1);
  double wm = 2.0 * (2.0 * c) / (budget.grid - 1);
  double wv = 2.0 * (2.0 * kappa) / (budget.grid - 1);
  for (int round = 0; round < budget.refine_rounds; ++round) {
    sweep(std::max(-c, best_m - wm), std::min(c, best_m + wm),
          std::max(-kappa, best_v - wv), std::min(kappa, best_v + wv), 64);
    wm /= 16.0;
    wv /= 16.0;
  }

  RegretReport report;
  report.rule_label = rule.label;
  report.method = SearchMethod::GRID;
  report.max_regret = best;
  report.witness_theta = {best_m + best_v, best_m - best_v};
  return report;
}

struct PatternResult {
  double value;
  std::vector<double> theta;
};

// Derivative-free refinement over (location coefficients, raw residual):
// cyclic coordinate moves with a halving step schedule. The raw residual is
// mapped through feasible_residual, so every evaluated theta is a member.
PatternResult pattern_search(const TreatmentProblem& problem, const LinearThresholdRule& rule,
                             const ParameterSpace& space,
                             const std::vector<Eigen::VectorXd>& loc_dirs, double loc_scale,
                             std::vector<double> u) {
  const int k = problem.k();
  const int dloc = static_cast<int>(loc_dirs.size());
  const int dim = dloc + k;

  auto assemble = [&](const std::vector<double>& pos) {
    std::vector<double> raw(pos.begin() + dloc, pos.end());
    std::vector<double> xi = feasible_residual(problem, space, raw);
    std::vector<double> theta(k, 0.0);
    for (int j = 0; j < dloc; ++j)
      for (int g = 0; g < k; ++g) theta[g] += pos[j] * loc_dirs[j](g);
    for (int g = 0; g < k; ++g) theta[g] += xi[g];
    return theta;
  };

  std::vector<double> scale(dim);
  for (int j = 0; j < dloc; ++j) scale[j] = loc_scale;
  for (int j = dloc; j < dim; ++j) scale[j] = std::max(space.kappa, 1e-30);

  double best = regret_at(problem, rule, assemble(u));
  for (double step = 0.5; step > 1e-8; step *= 0.5) {
    bool improved = true;
    int passes = 0;
    while (improved && passes++ < 16) {
      improved = false;
      for (int j = 0; j < dim; ++j) {
        for (double dir : {1.0, -1.0}) {
          std::vector<double> cand = u;
          cand[j] += dir * step * scale[j];
          double val = regret_at(problem, rule, assemble(cand));
          if (val > best + 1e-15 * (1.0 + best)) {
            best = val;
            u = std::move(cand);
            improved = true;
          }
        }
      }
    }
  }
  return {best, assemble(u)};
}

RegretReport max_regret_multistart(const TreatmentProblem& problem,
                                   const LinearThresholdRule& rule, const ParameterSpace& space,
                                   const SearchBudget& budget) {
  const int k = problem.k();
  const double c = location_halfwidth(problem, space.kappa);

  // Location directions spanning the undispersed part of the space.
  std::vector<Eigen::VectorXd> loc_dirs;
  if (space.kind == SpaceKind::MEAN_CENTERED) {
    loc_dirs.push_back(Eigen::VectorXd::Ones(k));
  } else {
    const Eigen::MatrixXd& x = problem.covariates();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      Eigen::VectorXd col = x.col(j);
      double norm = col.cwiseAbs().maxCoeff();
      loc_dirs.push_back(col / norm);  // unit sup-norm: coefficient scale = theta scale
    }
  }
  const int dloc = static_cast<int>(loc_dirs.size());
  const int dim = dloc + k;

  // Decompose a concrete theta into start coordinates (location loadings via
  // least squares, remainder as the raw residual).
  Eigen::MatrixXd l(k, dloc);
  for (int j = 0; j < dloc; ++j) l.col(j) = loc_dirs[j];
  auto to_coords = [&](const std::vector<double>& theta) {
    Eigen::Map<const Eigen::VectorXd> tv(theta.data(), k);
    Eigen::VectorXd b = (l.transpose() * l).ldlt().solve(l.transpose() * tv);
    Eigen::VectorXd res = tv - l * b;
    std::vector<double> u(dim, 0.0);
    for (int j = 0; j < dloc; ++j) u[j] = b(j);
    for (int g = 0; g < k; ++g) u[dloc + g] = res(g);
    return u;
  };

  std::vector<std::vector<double>> starts;
  if (space.kind == SpaceKind::MEAN_CENTERED) {
    for (const auto& w : witness_ces_rectangle(problem, space.kappa)) starts.push_back(to_coords(w));
    for (const auto& w : witness_pool_alternating(problem, space.kappa))
      starts.push_back(to_coords(w));
  }
  // Sign-pattern vertices of the dispersion box (all for small K, sampled else).
  std::mt19937_64 rng(budget.seed);
  auto unit = [&]() { return (rng() >> 11) * 0x1.0p-53; };
  if (k <= 10) {
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      std::vector<double> u(dim, 0.0);
      for (int g = 0; g < k; ++g) u[dloc + g] = ((mask >> g) & 1u) ? space.kappa : -space.kappa;
      starts.push_back(std::move(u));
      starts.back()[0] = 0.5 * c * (unit() - 0.5);
    }
  } else {
    for (int s = 0; s < budget.multistarts; ++s) {
      std::vector<double> u(dim, 0.0);
      for (int g = 0; g < k; ++g) u[dloc + g] = unit() < 0.5 ? -space.kappa : space.kappa;
      starts.push_back(std::move(u));
    }
  }
  for (int s = 0; s < budget.multistarts; ++s) {
    std::vector<double> u(dim);
    for (int j = 0; j < dloc; ++j) u[j] = c * (2.0 * unit() - 1.0);
    for (int g = 0; g < k; ++g) u[dloc + g] = 1.2 * space.kappa * (2.0 * unit() - 1.0);
    starts.push_back(std::move(u));
  }

  // Rank the starts by raw value and refine the most promising ones.
  auto assemble_value = [&](const std::vector<double>& u) {
    std::vector<double> raw(u.begin() + dloc, u.end());
    std::vector<double> xi = feasible_residual(problem, space, raw);
    std::vector<double> theta(k, 0.0);
    for (int j = 0; j < dloc; ++j)
      for (int g = 0; g < k; ++g) theta[g] += u[j] * loc_dirs[j](g);
    for (int g = 0; g < k; ++g) theta[g] += xi[g];
    return std::make_pair(regret_at(problem, rule, theta), theta);
  };

  double best_seed_value = -1.0;
  std::vector<double> best_seed_theta;
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(starts.size());
  for (int i = 0; i < static_cast<int>(starts.size()); ++i) {
    auto [val, theta] = assemble_value(starts[i]);
    ranked.emplace_back(val, i);
    if (val > best_seed_value) {
      best_seed_value = val;
      best_seed_theta = theta;
    }
  }
  std::sort(ranked.begin(), ranked.end(), std::greater<>());

  const int refine_count = std::min<int>(static_cast<int>(ranked.size()),
                                         std::max(budget.multistarts, 8));
  double best = best_seed_value;
  std::vector<double> best_theta = best_seed_theta;
  for (int i = 0; i < refine_count; ++i) {
    auto res = pattern_search(problem, rule, space, loc_dirs, c, starts[ranked[i].second]);
    if (res.value > best) {
      best = res.value;
      best_theta = res.theta;
    }
  }

  RegretReport report;
  report.rule_label = rule.label;
  report.method = best > best_seed_value + 1e-15 * (1.0 + best_seed_value)
                      ? SearchMethod::MULTISTART
                      : SearchMethod::WITNESS_FAMILY;
  report.max_regret = best;
  report.witness_theta = best_theta;
  return report;
}

}  // namespace

RegretReport max_regret(const TreatmentProblem& problem, const LinearThresholdRule& rule,
                        const ParameterSpace& space, const SearchBudget& budget) {
  check_space(problem, space);
  if (rule.k() != problem.k()) throw data_error("max_regret: rule dimension mismatch");
  if (budget.multistarts < 1 || budget.grid < 9 || budget.refine_rounds < 0)
    throw config_error("max_regret: search budget is empty");

  RegretReport report;
  if (problem.k() == 2 && space.kind == SpaceKind::MEAN_CENTERED) {
    report = max_regret_grid2(problem, rule, space, budget);
  } else {
    report = max_regret_multistart(problem, rule, space, budget);
  }

  // The certified witness families are cheap; never report less than they give.
  if (space.kind == SpaceKind::MEAN_CENTERED) {
    auto consider = [&](const std::vector<double>& theta) {
      double val = regret_at(problem, rule, theta);
      if (val > report.max_regret) {
        report.max_regret = val;
        report.witness_theta = theta;
        report.method = SearchMethod::WITNESS_FAMILY;
      }
    };
    for (const auto& w : witness_ces_rectangle(problem, space.kappa)) consider(w);
    for (const auto& w : witness_pool_alternating(problem, space.kappa)) consider(w);
  }
  return report;
}

nlohmann::json regret_report_to_json(const RegretReport& report) {
  nlohmann::json j;
  j["rule"] = rule_kind_name(report.rule_label);
  j["max_regret"] = report.max_regret;
  j["witness"] = report.witness_theta;
  j["method"] = search_method_name(report.method);
  j["bounds"] = nlohmann::json::object();
  for (const auto& [name, value] : report.bound_values) j["bounds"][name] = value;
  return j;
}

}  // namespace treatchoice
