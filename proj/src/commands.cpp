#include "treatchoice/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "treatchoice/bounds.hpp"
#include "treatchoice/data.hpp"
#include "treatchoice/errors.hpp"
#include "treatchoice/rules.hpp"
#include "treatchoice/shrinkage.hpp"
#include "treatchoice/special_functions.hpp"
#include "treatchoice/svg.hpp"

namespace treatchoice {

namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::filesystem::path prepare_out_dir(const CommonOptions& common) {
  std::filesystem::path dir(common.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw config_error("cannot create output directory '" + common.out_dir + "'");
  return dir;
}

// Every CSV gets a sidecar with the fully resolved configuration, so a run
// can be reproduced from its outputs alone.
void write_sidecar(const std::filesystem::path& csv_path, const json& config) {
  std::filesystem::path side = csv_path;
  side.replace_extension(".config.json");
  std::ofstream out(side, std::ios::binary);
  if (!out) throw data_error("cannot write '" + side.string() + "'");
  out << config.dump(2) << '\n';
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::string>& rows, const json& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out << header << '\n';
  for (const auto& row : rows) out << row << '\n';
  out.close();
  write_sidecar(path, config);
}

std::vector<double> make_grid(double lo, double hi, double step, const char* who) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step))
    throw config_error(std::string(who) + ": grid bounds must be finite");
  if (step <= 0.0) throw config_error(std::string(who) + ": grid step must be positive");
  if (hi < lo) throw config_error(std::string(who) + ": grid max is below min");
  if ((hi - lo) / step > 2e6) throw config_error(std::string(who) + ": grid is too fine");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double v = lo + step * i;
    if (v > hi + 1e-12 * step) break;
    grid.push_back(v);
  }
  return grid;
}

double kappa_prime_for(const std::string& rule, double kappa, const char* who) {
  if (rule == "equal") return kappa;
  if (rule == "1.2x") return 1.2 * kappa;
  if (rule == "0.8x") return 0.8 * kappa;
  throw config_error(std::string(who) +
                     ": kappa-prime rule must be one of equal, 1.2x, 0.8x (got '" + rule + "')");
}

TreatmentProblem load_problem(const std::string& problem_path, const std::vector<double>& sigma,
                              const std::vector<double>& p) {
  if (problem_path.empty()) return TreatmentProblem(sigma, p);
  std::ifstream in(problem_path);
  if (!in) throw data_error("cannot open problem file '" + problem_path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw data_error("problem file '" + problem_path + "': " + e.what());
  }
  return problem_from_json(j);
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int cmd_eta(const EtaOptions& opt, const CommonOptions& common) {
  if (opt.min < 0.0) throw config_error("eta: grid must start at a >= 0");
  const std::vector<double> grid = make_grid(opt.min, opt.max, opt.step, "eta");
  const auto dir = prepare_out_dir(common);

  std::vector<double> etas, tstars, primes, env_lo, env_hi;
  std::vector<std::string> rows;
  const double eta0 = eta(0.0).eta;
  for (double a : grid) {
    const EtaEvaluation e = eta(a);
    etas.push_back(e.eta);
    tstars.push_back(e.t_star);
    primes.push_back(eta_prime(a));
    // Tightest known two-sided envelope of the kernel.
    const double r = std::sqrt(1.0 + a * a);
    env_lo.push_back(std::max(eta0 * r, a / 2));
    env_hi.push_back(std::min(r, eta0 + a));
    rows.push_back(num(a) + "," + num(e.eta) + "," + num(e.t_star) + "," + num(primes.back()) +
                   "," + num(env_lo.back()) + "," + num(env_hi.back()));
  }

  const json config = {{"command", "eta"},     {"min", opt.min},   {"max", opt.max},
                       {"step", opt.step},     {"seed", common.seed},
                       {"out_dir", common.out_dir}};
  write_csv(dir / "eta_curve.csv", "a,eta,t_star,eta_prime,envelope_lo,envelope_hi", rows,
            config);

  if (common.json) {
    print_json({{"a", grid}, {"eta", etas}, {"t_star", tstars}, {"eta_prime", primes},
                {"envelope_lo", env_lo}, {"envelope_hi", env_hi}, {"seed", common.seed}});
  } else {
    Chart chart;
    chart.title = "Worst-case regret kernel";
    chart.x_label = "a";
    chart.series.push_back({"eta(a)", grid, etas, Series::Style::SOLID, "#1a1a1a"});
    chart.series.push_back({"t*(a)", grid, tstars, Series::Style::DOTTED, "#1a1a1a"});
    chart.series.push_back({"eta'(a)", grid, primes, Series::Style::DASHED, "#1a1a1a"});
    chart.series.push_back({"envelope", grid, env_lo, Series::Style::DASHED, "#999999"});
    chart.series.push_back({"", grid, env_hi, Series::Style::DASHED, "#999999"});
    write_svg((dir / "eta_curve.svg").string(), chart);
  }
  return 0;
}

int cmd_factors(const FactorsOptions& opt, const CommonOptions& common) {
  const std::vector<double> grid = make_grid(0.0, opt.kappa_max, opt.kappa_step, "factors");
  const auto dir = prepare_out_dir(common);

  // One curve per homoscedastic panel size, or per group of a given problem.
  std::vector<std::string> labels;
  std::vector<std::vector<double>> curves;
  if (opt.problem_path.empty()) {
    if (opt.k_list.empty()) throw config_error("factors: need at least one panel size");
    if (!(opt.sigma > 0.0)) throw config_error("factors: sigma must be positive");
    for (int k : opt.k_list) {
      if (k < 2) throw config_error("factors: panel sizes must be >= 2");
      TreatmentProblem pr(std::vector<double>(k, opt.sigma),
                          std::vector<double>(k, 1.0 / k));
      std::vector<double> curve;
      for (double kappa : grid) curve.push_back(solve_shrinkage_factors(pr, kappa).w_star[0]);
      labels.push_back("K=" + std::to_string(k));
      curves.push_back(std::move(curve));
    }
  } else {
    TreatmentProblem pr = load_problem(opt.problem_path, {}, {});
    std::vector<std::vector<double>> sols;
    for (double kappa : grid) sols.push_back(solve_shrinkage_factors(pr, kappa).w_star);
    for (int g = 0; g < pr.k(); ++g) {
      std::vector<double> curve;
      for (const auto& w : sols) curve.push_back(w[g]);
      labels.push_back("group " + std::to_string(g + 1));
      curves.push_back(std::move(curve));
    }
  }

  // The factor curves are expected to rise with the dispersion budget; report
  // any numerical counterexample instead of hiding it.
  json monotone = json::object();
  for (size_t c = 0; c < curves.size(); ++c) {
    bool ok = true;
    for (size_t i = 1; i < curves[c].size(); ++i)
      if (curves[c][i] < curves[c][i - 1] - 1e-9) ok = false;
    monotone[labels[c]] = ok;
    if (!ok)
      std::cerr << "warning: factor curve " << labels[c] << " is not monotone on this grid\n";
  }

  std::string header = "kappa";
  for (const auto& label : labels) header += "," + label;
  std::vector<std::string> rows;
  for (size_t i = 0; i < grid.size(); ++i) {
    std::string row = num(grid[i]);
    for (const auto& curve : curves) row += "," + num(curve[i]);
    rows.push_back(std::move(row));
  }
  json config = {{"command", "factors"},      {"kappa_max", opt.kappa_max},
                 {"kappa_step", opt.kappa_step}, {"sigma", opt.sigma},
                 {"k_list", opt.k_list},      {"problem", opt.problem_path},
                 {"seed", common.seed},       {"out_dir", common.out_dir},
                 {"monotone", monotone}};
  write_csv(dir / "factors_curve.csv", header, rows, config);

  if (common.json) {
    json out = {{"kappa", grid}, {"monotone", monotone}, {"seed", common.seed}};
    for (size_t c = 0; c < curves.size(); ++c) out[labels[c]] = curves[c];
    print_json(out);
  } else {
    Chart chart;
    chart.title = "Selected shrinkage factors";
    chart.x_label = "kappa";
    chart.y_label = "w*";
    const std::vector<Series::Style> styles{Series::Style::SOLID, Series::Style::DASHED,
                                            Series::Style::DOTTED};
    for (size_t c = 0; c < curves.size(); ++c)
      chart.series.push_back(
          {labels[c], grid, curves[c], styles[c % styles.size()], "#1a1a1a"});
    write_svg((dir / "factors_curve.svg").string(), chart);
  }
  return 0;
}

int cmd_regret_compare(const CompareOptions& opt, const CommonOptions& common) {
  TreatmentProblem pr = load_problem(opt.problem_path, opt.sigma, opt.p);
  const std::vector<double> grid =
      make_grid(opt.kappa_min, opt.kappa_max, opt.kappa_step, "regret-compare");
  const auto dir = prepare_out_dir(common);

  SearchBudget budget = opt.budget;
  budget.seed = common.seed;

  std::vector<std::string> rows;
  std::vector<double> shrink_curve, ces_curve, pool_curve;
  json json_rows = json::array();
  for (double kappa : grid) {
    const double kp = kappa_prime_for(opt.kappa_prime_rule, kappa, "regret-compare");
    const ParameterSpace space{kappa, SpaceKind::MEAN_CENTERED};
    const auto factors = solve_shrinkage_factors(pr, kp);
    const auto shrink = build_rule(pr, RuleKind::SHRINK_MEAN, factors.w_star);
    const auto ces = build_rule(pr, RuleKind::CES);
    const auto pool = build_rule(pr, RuleKind::POOL);

    const double m_shrink = max_regret(pr, shrink, space, budget).max_regret;
    const double m_ces = max_regret(pr, ces, space, budget).max_regret;
    const double m_pool = max_regret(pr, pool, space, budget).max_regret;
    const auto b1 = bound_thm1(pr, kappa);
    const auto b2 = bound_thm2(pr, kappa);
    const auto b3 = bound_thm3(pr, kappa, kp);
    const auto b4 = bound_thm4(pr, kappa, kp);

    shrink_curve.push_back(m_shrink);
    ces_curve.push_back(m_ces);
    pool_curve.push_back(m_pool);
    rows.push_back(num(kappa) + "," + num(kp) + "," + num(m_shrink) + "," + num(m_ces) + "," +
                   num(m_pool) + "," + num(b1.value) + "," + num(b2.value) + "," +
                   num(b3.value) + "," + num(b4.value));
    json_rows.push_back({{"kappa", kappa},
                         {"kappa_prime", kp},
                         {"max_regret_shrinkage", m_shrink},
                         {"max_regret_ces", m_ces},
                         {"max_regret_pooling", m_pool},
                         {"bounds",
                          {{"thm1", b1.value}, {"thm2", b2.value}, {"thm3", b3.value},
                           {"thm4", b4.value}}}});
  }

  const json config = {{"command", "regret-compare"},
                       {"sigma", pr.sigma()},
                       {"p", pr.p()},
                       {"kappa_min", opt.kappa_min},
                       {"kappa_max", opt.kappa_max},
                       {"kappa_step", opt.kappa_step},
                       {"kappa_prime_rule", opt.kappa_prime_rule},
                       {"multistarts", budget.multistarts},
                       {"grid_points", budget.grid},
                       {"refine_rounds", budget.refine_rounds},
                       {"seed", common.seed},
                       {"out_dir", common.out_dir}};
  write_csv(dir / "regret_compare.csv",
            "kappa,kappa_prime,max_regret_shrinkage,max_regret_ces,max_regret_pooling,"
            "thm1,thm2,thm3,thm4",
            rows, config);

  if (common.json) {
    print_json({{"rows", json_rows}, {"seed", common.seed}});
  } else {
    Chart chart;
    chart.title = "Maximum regret by rule";
    chart.x_label = "kappa";
    chart.y_label = "max regret";
    chart.series.push_back({"shrinkage", grid, shrink_curve, Series::Style::SOLID, "#1a1a1a"});
    chart.series.push_back({"sign rule", grid, ces_curve, Series::Style::DOTTED, "#1a1a1a"});
    chart.series.push_back({"pooling", grid, pool_curve, Series::Style::DASHED, "#1a1a1a"});
    write_svg((dir / "regret_compare.svg").string(), chart);
  }
  return 0;
}

int cmd_bounds(const BoundsOptions& opt, const CommonOptions& common) {
  TreatmentProblem pr = load_problem(opt.problem_path, opt.sigma, opt.p);
  const std::vector<double> grid =
      make_grid(opt.kappa_min, opt.kappa_max, opt.kappa_step, "bounds");
  const auto dir = prepare_out_dir(common);

  std::vector<std::string> rows;
  std::vector<double> c1, c2, c3, c4;
  json json_rows = json::array();
  for (double kappa : grid) {
    const double kp = kappa_prime_for(opt.kappa_prime_rule, kappa, "bounds");
    const auto b1 = bound_thm1(pr, kappa);
    const auto b2 = bound_thm2(pr, kappa);
    const auto b3 = bound_thm3(pr, kappa, kp);
    const auto b4 = bound_thm4(pr, kappa, kp);
    c1.push_back(b1.value);
    c2.push_back(b2.value);
    c3.push_back(b3.value);
    c4.push_back(b4.value);
    rows.push_back(num(kappa) + "," + num(kp) + "," + num(b1.value) + "," +
                   (b1.condition_holds ? "1" : "0") + "," + num(b2.value) + "," +
                   num(b2.min_of_three) + "," + num(b3.value) + "," + num(b3.inflation) + "," +
                   num(b4.value));
    json_rows.push_back({{"kappa", kappa},
                         {"kappa_prime", kp},
                         {"thm1", b1.value},
                         {"thm1_condition", b1.condition_holds},
                         {"thm2", b2.value},
                         {"thm2_cap", b2.min_of_three},
                         {"thm3", b3.value},
                         {"inflation", b3.inflation},
                         {"thm4", b4.value}});
  }

  const json config = {{"command", "bounds"},
                       {"sigma", pr.sigma()},
                       {"p", pr.p()},
                       {"kappa_min", opt.kappa_min},
                       {"kappa_max", opt.kappa_max},
                       {"kappa_step", opt.kappa_step},
                       {"kappa_prime_rule", opt.kappa_prime_rule},
                       {"seed", common.seed},
                       {"out_dir", common.out_dir}};
  write_csv(dir / "bounds_curve.csv",
            "kappa,kappa_prime,thm1,thm1_condition,thm2,thm2_cap,thm3,inflation,thm4", rows,
            config);

  if (common.json) {
    print_json({{"rows", json_rows}, {"seed", common.seed}});
  } else {
    Chart chart;
    chart.title = "Regret ratio bounds";
    chart.x_label = "kappa";
    chart.y_label = "bound";
    chart.series.push_back({"vs sign rule", grid, c1, Series::Style::SOLID, "#1a1a1a"});
    chart.series.push_back({"vs pooling", grid, c2, Series::Style::DASHED, "#1a1a1a"});
    chart.series.push_back({"vs sign rule (kappa')", grid, c3, Series::Style::SOLID, "#888888"});
    chart.series.push_back({"vs pooling (kappa')", grid, c4, Series::Style::DASHED, "#888888"});
    write_svg((dir / "bounds_curve.svg").string(), chart);
  }
  return 0;
}

namespace {

EstimateVector estimates_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open estimates file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw data_error("estimates file '" + path + "': " + e.what());
  }
  EstimateVector est;
  try {
    est.labels = j.at("labels").get<std::vector<std::string>>();
    est.theta_hat = j.at("theta_hat").get<std::vector<double>>();
    est.sigma_hat = j.at("sigma_hat").get<std::vector<double>>();
    est.p_hat = j.at("p_hat").get<std::vector<double>>();
    est.cost_offset = j.value("cost_offset", 0.0);
  } catch (const json::exception& e) {
    throw data_error("estimates file '" + path + "': " + e.what());
  }
  if (est.theta_hat.size() != est.sigma_hat.size() ||
      est.theta_hat.size() != est.p_hat.size() || est.labels.size() != est.theta_hat.size())
    throw data_error("estimates file '" + path + "': field lengths disagree");
  return est;
}

// Intercept plus one indicator per non-reference level of each key column:
// the standard dummy coding of the group structure.
Eigen::MatrixXd dummy_design(const std::vector<std::vector<std::string>>& tuples) {
  const size_t k = tuples.size();
  const size_t cols = tuples[0].size();
  std::vector<std::vector<std::string>> levels(cols);
  for (size_t c = 0; c < cols; ++c) {
    std::set<std::string> seen;
    for (const auto& t : tuples) seen.insert(t[c]);
    levels[c].assign(seen.begin(), seen.end());
  }
  size_t width = 1;
  for (const auto& l : levels) width += l.size() - 1;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(k, width);
  for (size_t g = 0; g < k; ++g) {
    x(g, 0) = 1.0;
    size_t col = 1;
    for (size_t c = 0; c < cols; ++c) {
      for (size_t l = 1; l < levels[c].size(); ++l, ++col)
        if (tuples[g][c] == levels[c][l]) x(g, col) = 1.0;
    }
  }
  return x;
}

json diagnostic_to_json(const DispersionDiagnostic& diag) {
  return {{"observed_range", diag.observed_range},
          {"null_median", diag.null_median},
          {"below_null", diag.below_null},
          {"draws", diag.draws},
          {"seed", diag.seed}};
}

void print_estimate_table(const EstimateVector& est) {
  std::printf("%-24s %6s %6s %14s %12s %8s\n", "group", "n1", "n0", "theta_hat", "sigma_hat",
              "p_hat");
  for (int g = 0; g < est.k(); ++g) {
    const bool have_n = static_cast<size_t>(g) < est.n_treated.size();
    std::printf("%-24s %6ld %6ld %14.4f %12.4f %8.4f\n", est.labels[g].c_str(),
                have_n ? est.n_treated[g] : 0, have_n ? est.n_control[g] : 0,
                est.theta_hat[g], est.sigma_hat[g], est.p_hat[g]);
  }
  for (const auto& warning : est.dropped_groups)
    std::printf("warning: dropped group %s\n", warning.c_str());
  if (est.dropped_rows > 0)
    std::printf("note: %ld rows dropped for missing fields\n", est.dropped_rows);
}

}  // namespace

int cmd_estimate(const EstimateOptions& opt, const CommonOptions& common) {
  if (opt.data_path.empty()) throw config_error("estimate: --data is required");
  const MicroDataset data =
      read_micro_csv(opt.data_path, opt.y_column, opt.d_column, opt.key_columns);
  const EstimateVector est = estimate_groups(data, opt.cost_offset);
  const DispersionDiagnostic diag = dispersion_diagnostic(est, 100000, common.seed);
  const auto dir = prepare_out_dir(common);

  const json config = {{"command", "estimate"},   {"data", opt.data_path},
                       {"y_column", opt.y_column}, {"d_column", opt.d_column},
                       {"key_columns", opt.key_columns},
                       {"cost_offset", opt.cost_offset},
                       {"seed", common.seed},     {"out_dir", common.out_dir}};

  std::vector<std::string> rows;
  for (int g = 0; g < est.k(); ++g)
    rows.push_back(est.labels[g] + "," + std::to_string(est.n_treated[g]) + "," +
                   std::to_string(est.n_control[g]) + "," + num(est.theta_hat[g]) + "," +
                   num(est.sigma_hat[g]) + "," + num(est.p_hat[g]));
  write_csv(dir / "estimates.csv", "group,n_treated,n_control,theta_hat,sigma_hat,p_hat", rows,
            config);

  json full = estimates_to_json(est);
  full["dispersion"] = diagnostic_to_json(diag);
  full["seed"] = common.seed;
  {
    std::ofstream out(dir / "estimates.json", std::ios::binary);
    out << full.dump(2) << '\n';
  }

  if (common.json) {
    print_json(full);
  } else {
    print_estimate_table(est);
    std::printf("dispersion: observed range %.4f vs null median %.4f -> %s\n",
                diag.observed_range, diag.null_median,
                diag.below_null ? "below the noise level" : "above the noise level");
    // Point estimates with 1.96-sigma whiskers, one group per x position.
    Chart chart;
    chart.title = "Group estimates";
    chart.x_label = "group";
    chart.y_label = "theta_hat";
    chart.h_lines = {0.0};
    Series points{"theta_hat", {}, {}, Series::Style::POINTS, "#1a1a1a"};
    for (int g = 0; g < est.k(); ++g) {
      points.x.push_back(g + 1);
      points.y.push_back(est.theta_hat[g]);
      Series whisker;
      whisker.x = {static_cast<double>(g + 1), static_cast<double>(g + 1)};
      whisker.y = {est.theta_hat[g] - 1.96 * est.sigma_hat[g],
                   est.theta_hat[g] + 1.96 * est.sigma_hat[g]};
      whisker.color = "#888888";
      chart.series.push_back(std::move(whisker));
    }
    chart.series.push_back(std::move(points));
    write_svg((dir / "estimates.svg").string(), chart);
  }
  return 0;
}

int cmd_decide(const DecideOptions& opt, const CommonOptions& common) {
  if (!(opt.kappa >= 0.0)) throw config_error("decide: kappa must be >= 0");
  if (opt.data_path.empty() == opt.estimates_path.empty())
    throw config_error("decide: exactly one of --data and --estimates is required");

  EstimateVector est;
  std::vector<std::vector<std::string>> tuples;  // group keys, CSV path only
  if (!opt.data_path.empty()) {
    const MicroDataset data =
        read_micro_csv(opt.data_path, opt.y_column, opt.d_column, opt.key_columns);
    est = estimate_groups(data, opt.cost_offset);
    std::map<std::string, std::vector<std::string>> by_label;
    for (const auto& key : data.key) {
      std::string label;
      for (size_t i = 0; i < key.size(); ++i) label += (i ? "/" : "") + key[i];
      by_label.emplace(label, key);
    }
    for (const auto& label : est.labels) tuples.push_back(by_label.at(label));
  } else {
    est = estimates_from_json_file(opt.estimates_path);
    if (opt.cost_offset != 0.0)
      for (double& t : est.theta_hat) t -= opt.cost_offset;
  }

  // Assemble the decision problem; the regression variant shrinks toward a
  // dummy-coded fit of the group structure.
  ShrinkageSolution sol;
  LinearThresholdRule shrink_rule;
  TreatmentProblem pr = [&] {
    if (opt.variant == "mean") return TreatmentProblem(est.sigma_hat, est.p_hat);
    if (opt.variant != "regression")
      throw config_error("decide: variant must be mean or regression (got '" + opt.variant +
                         "')");
    if (tuples.empty())
      throw config_error("decide: the regression variant needs micro-data (--data)");
    return TreatmentProblem(est.sigma_hat, est.p_hat, dummy_design(tuples));
  }();
  if (opt.variant == "mean") {
    sol = solve_shrinkage_factors(pr, opt.kappa);
    shrink_rule = build_rule(pr, RuleKind::SHRINK_MEAN, sol.w_star);
  } else {
    sol = solve_regression_shrinkage(pr, opt.kappa);
    shrink_rule = build_rule(pr, RuleKind::SHRINK_REG, sol.w_star);
  }

  const auto ces = decide(build_rule(pr, RuleKind::CES), est.theta_hat);
  const auto pool = decide(build_rule(pr, RuleKind::POOL), est.theta_hat);
  const auto shrink = decide(shrink_rule, est.theta_hat);
  const DispersionDiagnostic diag = dispersion_diagnostic(est, 100000, common.seed);
  const auto dir = prepare_out_dir(common);

  const json config = {{"command", "decide"},
                       {"data", opt.data_path},
                       {"estimates", opt.estimates_path},
                       {"y_column", opt.y_column},
                       {"d_column", opt.d_column},
                       {"key_columns", opt.key_columns},
                       {"cost_offset", opt.cost_offset},
                       {"kappa", opt.kappa},
                       {"variant", opt.variant},
                       {"seed", common.seed},
                       {"out_dir", common.out_dir}};

  std::vector<std::string> rows;
  json groups = json::array();
  for (int g = 0; g < est.k(); ++g) {
    rows.push_back(est.labels[g] + "," + num(est.theta_hat[g]) + "," + num(est.sigma_hat[g]) +
                   "," + num(est.p_hat[g]) + "," + num(sol.w_star[g]) + "," +
                   num(shrink.statistic[g]) + "," + std::to_string(ces.treat[g]) + "," +
                   std::to_string(pool.treat[g]) + "," + std::to_string(shrink.treat[g]));
    groups.push_back({{"group", est.labels[g]},
                      {"theta_hat", est.theta_hat[g]},
                      {"sigma_hat", est.sigma_hat[g]},
                      {"p_hat", est.p_hat[g]},
                      {"w_star", sol.w_star[g]},
                      {"shrunk_estimate", shrink.statistic[g]},
                      {"treat_ces", ces.treat[g]},
                      {"treat_pooling", pool.treat[g]},
                      {"treat_shrinkage", shrink.treat[g]}});
  }
  write_csv(dir / "decide.csv",
            "group,theta_hat,sigma_hat,p_hat,w_star,shrunk_estimate,treat_ces,treat_pooling,"
            "treat_shrinkage",
            rows, config);

  json report = {{"kappa", opt.kappa},
                 {"variant", opt.variant},
                 {"cost_offset", opt.cost_offset},
                 {"groups", groups},
                 {"dispersion", diagnostic_to_json(diag)},
                 {"seed", common.seed}};
  {
    std::ofstream out(dir / "decide.json", std::ios::binary);
    out << report.dump(2) << '\n';
  }

  if (common.json) {
    print_json(report);
    return 0;
  }

  std::printf("%-24s %12s %10s %8s %12s  %4s %4s %6s\n", "group", "theta_hat", "sigma_hat",
              "w*", "shrunk", "sign", "pool", "shrink");
  for (int g = 0; g < est.k(); ++g)
    std::printf("%-24s %12.4f %10.4f %8.4f %12.4f  %4d %4d %6d\n", est.labels[g].c_str(),
                est.theta_hat[g], est.sigma_hat[g], sol.w_star[g], shrink.statistic[g],
                ces.treat[g], pool.treat[g], shrink.treat[g]);
  std::printf("dispersion: observed range %.4f vs null median %.4f -> %s\n",
              diag.observed_range, diag.null_median,
              diag.below_null ? "below the noise level" : "above the noise level");

  // Raw vs shrunk estimates around the zero and mean lines.
  double mean = 0.0;
  for (double t : est.theta_hat) mean += t;
  mean /= est.k();
  Chart points_chart;
  points_chart.title = "Raw and shrunk estimates";
  points_chart.x_label = "group";
  points_chart.y_label = "estimate";
  points_chart.h_lines = {0.0, mean};
  Series raw{"theta_hat", {}, {}, Series::Style::POINTS, "#1a1a1a"};
  Series shrunk{"shrunk", {}, {}, Series::Style::POINTS, "#888888"};
  for (int g = 0; g < est.k(); ++g) {
    raw.x.push_back(g + 1);
    raw.y.push_back(est.theta_hat[g]);
    shrunk.x.push_back(g + 1);
    shrunk.y.push_back(shrink.statistic[g]);
  }
  points_chart.series.push_back(std::move(raw));
  points_chart.series.push_back(std::move(shrunk));
  write_svg((dir / "decide_estimates.svg").string(), points_chart);

  Chart factor_chart;
  factor_chart.title = "Shrinkage factor by standard error";
  factor_chart.x_label = "sigma_hat";
  factor_chart.y_label = "w*";
  factor_chart.series.push_back(
      {"w*", est.sigma_hat, sol.w_star, Series::Style::POINTS, "#1a1a1a"});
  write_svg((dir / "decide_factors.svg").string(), factor_chart);
  return 0;
}

}  // namespace treatchoice
