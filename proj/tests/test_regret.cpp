#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "treatchoice/errors.hpp"
#include "treatchoice/problem.hpp"
#include "treatchoice/regret.hpp"
#include "treatchoice/rules.hpp"
#include "treatchoice/shrinkage.hpp"
#include "treatchoice/special_functions.hpp"

#include <nlohmann/json.hpp>

using namespace treatchoice;

namespace {
const double kEta0 = eta(0.0).eta;
const double kTStar0 = eta(0.0).t_star;

TreatmentProblem homoscedastic(int k) {
  return TreatmentProblem(std::vector<double>(k, 1.0), std::vector<double>(k, 1.0 / k));
}

// Single-group setup expressed as a two-group problem with all weight on one.
TreatmentProblem single_group() { return TreatmentProblem({1.0, 1.0}, {1.0, 0.0}); }
}  // namespace

TEST_CASE("regret vanishes at the zero parameter", "[regret]") {
  TreatmentProblem pr({1.0, 2.0}, {0.4, 0.6});
  std::vector<double> zero{0.0, 0.0};
  for (RuleKind kind : {RuleKind::CES, RuleKind::POOL}) {
    CHECK(regret_at(pr, build_rule(pr, kind), zero) == 0.0);
  }
  CHECK(regret_at(pr, build_rule(pr, RuleKind::SHRINK_MEAN, {0.3, 0.8}), zero) == 0.0);
}

TEST_CASE("single-group regret peaks at the kernel value", "[regret]") {
  TreatmentProblem pr = single_group();
  auto ces = build_rule(pr, RuleKind::CES);
  double r = regret_at(pr, ces, {kTStar0, kTStar0});
  CHECK_THAT(r, Catch::Matchers::WithinRel(kEta0, 1e-14));
  CHECK(r == Catch::Approx(0.17).margin(5e-4));
}

TEST_CASE("pooling regret at the balanced alternating point", "[regret]") {
  TreatmentProblem pr = homoscedastic(2);
  auto pool = build_rule(pr, RuleKind::POOL);
  // Mean zero puts both decision statistics exactly at the threshold.
  CHECK_THAT(regret_at(pr, pool, {1.0, -1.0}), Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("negative parameters mirror positive ones", "[regret]") {
  TreatmentProblem pr({0.8, 1.3, 1.0}, {0.2, 0.5, 0.3});
  auto rule = build_rule(pr, RuleKind::SHRINK_MEAN, {0.6, 0.2, 0.9});
  std::vector<double> theta{0.7, -0.3, 1.1};
  std::vector<double> flipped{-0.7, 0.3, -1.1};
  CHECK_THAT(regret_at(pr, rule, theta),
             Catch::Matchers::WithinRel(regret_at(pr, rule, flipped), 1e-14));
}

TEST_CASE("rules that cannot decide a group are rejected", "[regret]") {
  TreatmentProblem pr = homoscedastic(2);
  Eigen::MatrixXd c(2, 2);
  c << 0.0, 0.0, 0.0, 1.0;  // first statistic is identically zero
  auto broken = make_custom_rule(c);
  CHECK_THROWS_AS(regret_at(pr, broken, {1.0, 1.0}), config_error);
  // A zero parameter in the broken coordinate contributes nothing, so the
  // value is still well defined there.
  CHECK(regret_at(pr, broken, {0.0, 0.0}) == 0.0);
  CHECK_THROWS_AS(regret_at(pr, broken, {1.0}), data_error);
}

TEST_CASE("simulation agrees with the closed form", "[regret][slow]") {
  std::mt19937_64 rng(71);
  auto unif = [&](double lo, double hi) {
    return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
  };
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = std::vector<int>{2, 3, 5}[trial % 3];
    std::vector<double> sigma(k), p(k), theta(k);
    double total = 0.0;
    for (int g = 0; g < k; ++g) {
      sigma[g] = unif(0.4, 2.0);
      p[g] = unif(0.1, 1.0);
      total += p[g];
      theta[g] = unif(-2.5, 2.5);
    }
    for (int g = 0; g < k; ++g) p[g] /= total;
    TreatmentProblem pr(sigma, p);

    LinearThresholdRule rule = [&] {
      switch (trial % 4) {
        case 0: return build_rule(pr, RuleKind::CES);
        case 1: return build_rule(pr, RuleKind::POOL);
        case 2: {
          std::vector<double> w(k);
          for (int g = 0; g < k; ++g) w[g] = unif(0.0, 1.0);
          return build_rule(pr, RuleKind::SHRINK_MEAN, w);
        }
        default: {
          std::vector<double> v(k);
          for (int g = 0; g < k; ++g) v[g] = unif(0.0, 0.8);
          return build_rule(pr, RuleKind::CES, {}, v);  // randomized variant
        }
      }
    }();

    const double exact = regret_at(pr, rule, theta);
    const auto mc = regret_monte_carlo(pr, rule, theta, 1000000, 1000 + trial);
    CHECK_THAT(mc.estimate, Catch::Matchers::WithinAbs(exact, 3.0 * mc.std_error + 1e-12));
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("simulation edge behavior", "[regret]") {
  TreatmentProblem pr = homoscedastic(2);
  auto ces = build_rule(pr, RuleKind::CES);
  auto zero = regret_monte_carlo(pr, ces, {0.0, 0.0}, 2000, 5);
  CHECK(zero.estimate == 0.0);
  CHECK(zero.std_error == 0.0);
  auto far = regret_monte_carlo(pr, ces, {10.0, 10.0}, 100000, 6);
  CHECK(far.estimate <= 1e-3);
  CHECK_THROWS_AS(regret_monte_carlo(pr, ces, {0.0, 0.0}, 0, 1), config_error);

  // Same seed, same numbers: reports must be bit-reproducible.
  auto a = regret_monte_carlo(pr, ces, {0.3, -0.2}, 5000, 42);
  auto b = regret_monte_carlo(pr, ces, {0.3, -0.2}, 5000, 42);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("space membership enforces the dispersion constraints", "[regret]") {
  TreatmentProblem pr = homoscedastic(3);
  ParameterSpace space{0.5, SpaceKind::MEAN_CENTERED};
  CHECK(space_contains(pr, space, {1.5, 1.0, 0.5}));        // deviations (.5, 0, -.5)
  CHECK_FALSE(space_contains(pr, space, {1.8, 1.0, 0.2}));  // deviations exceed 0.5
  CHECK_FALSE(space_contains(pr, space, {1.0, 1.0}));       // wrong length

  Eigen::MatrixXd x(3, 1);
  x << 1.0, 1.0, 1.0;
  TreatmentProblem with_cov({1.0, 1.0, 1.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, x);
  ParameterSpace reg{0.5, SpaceKind::REGRESSION};
  // Intercept-only regression space coincides with the mean-centered one.
  CHECK(space_contains(with_cov, reg, {1.5, 1.0, 0.5}));
  CHECK_FALSE(space_contains(with_cov, reg, {1.8, 1.0, 0.2}));
  CHECK_THROWS_AS(space_contains(pr, reg, {1.0, 1.0, 0.0}), config_error);
  CHECK_THROWS_AS(space_contains(pr, ParameterSpace{-0.1, SpaceKind::MEAN_CENTERED},
                                 std::vector<double>{0.0, 0.0, 0.0}),
                  config_error);
}

TEST_CASE("witness families live inside their space", "[regret]") {
  std::mt19937_64 rng(9);
  auto unif = [&](double lo, double hi) {
    return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
  };
  for (int k : {2, 3, 5}) {
    std::vector<double> sigma(k), p(k);
    double total = 0.0;
    for (int g = 0; g < k; ++g) {
      sigma[g] = unif(0.5, 1.5);
      p[g] = unif(0.2, 1.0);
      total += p[g];
    }
    for (int g = 0; g < k; ++g) p[g] /= total;
    TreatmentProblem pr(sigma, p);
    for (double kappa : {0.0, 0.3, 1.7}) {
      ParameterSpace space{kappa, SpaceKind::MEAN_CENTERED};
      for (const auto& w : witness_ces_rectangle(pr, kappa))
        CHECK(space_contains(pr, space, w, 1e-12));
      for (const auto& w : witness_pool_alternating(pr, kappa))
        CHECK(space_contains(pr, space, w, 1e-12));
    }
  }
}

TEST_CASE("rectangle witness anchor attains the kernel level", "[regret]") {
  TreatmentProblem pr = homoscedastic(3);
  auto ces = build_rule(pr, RuleKind::CES);
  // The uniform corner at t = t*(0) sigma_min is in every family; its CES
  // regret is exactly eta(0) under homoscedasticity.
  double best = 0.0;
  for (const auto& w : witness_ces_rectangle(pr, 0.4))
    best = std::max(best, regret_at(pr, ces, w));
  CHECK(best >= kEta0 - 1e-12);

  // kappa = 0 collapses the rectangle to equal coordinates.
  for (const auto& w : witness_ces_rectangle(pr, 0.0)) {
    CHECK(w[0] == w[1]);
    CHECK(w[1] == w[2]);
  }
}

TEST_CASE("alternating witness reaches the pooled lower bound", "[regret]") {
  TreatmentProblem pr = homoscedastic(2);
  auto pool = build_rule(pr, RuleKind::POOL);
  const double kappa = 1.0;
  const double s0 = pr.s0();
  const double level = s0 * eta(kappa / s0).eta;
  double best = 0.0;
  for (const auto& w : witness_pool_alternating(pr, kappa))
    best = std::max(best, regret_at(pr, pool, w));
  CHECK(best >= 0.5 * level - 1e-12);
  CHECK(best >= level - kappa - 1e-12);

  // kappa = 0 gives the constant line.
  for (const auto& w : witness_pool_alternating(pr, 0.0)) CHECK(w[0] == w[1]);

  // Odd K keeps one coordinate in the middle and the big shares on top.
  TreatmentProblem odd({1.0, 1.0, 1.0}, {0.2, 0.5, 0.3});
  for (const auto& w : witness_pool_alternating(odd, 0.6)) {
    double mean = (w[0] + w[1] + w[2]) / 3.0;
    CHECK_THAT(w[1], Catch::Matchers::WithinAbs(mean + 0.6, 1e-12));  // largest share high
    CHECK_THAT(w[2], Catch::Matchers::WithinAbs(mean, 1e-12));
    CHECK_THAT(w[0], Catch::Matchers::WithinAbs(mean - 0.6, 1e-12));
  }
}

TEST_CASE("maximum search at kappa = 0 recovers the flat-space value", "[regret]") {
  // All coordinates equal: the CES maximum is eta(0) * sigma for a
  // single-group problem.
  TreatmentProblem pr = single_group();
  auto report = max_regret(pr, build_rule(pr, RuleKind::CES), {0.0, SpaceKind::MEAN_CENTERED});
  CHECK_THAT(report.max_regret, Catch::Matchers::WithinAbs(kEta0, 1e-7));
  CHECK_THAT(regret_at(pr, build_rule(pr, RuleKind::CES), report.witness_theta),
             Catch::Matchers::WithinAbs(report.max_regret, 1e-9));
}

TEST_CASE("pooled maximum dominates the alternating family", "[regret]") {
  TreatmentProblem pr = homoscedastic(2);
  auto pool = build_rule(pr, RuleKind::POOL);
  auto report = max_regret(pr, pool, {1.0, SpaceKind::MEAN_CENTERED});
  const double s0 = pr.s0();
  CHECK(report.max_regret >= 0.5 * s0 * eta(1.0 / s0).eta - 1e-9);
  // This configuration has a closed-form maximum: mixed-sign regret is
  // .5[v + m(1 - 2 Phi(m/s0))] <= .5, attained at theta = (1, -1).
  CHECK_THAT(report.max_regret, Catch::Matchers::WithinAbs(0.5, 1e-9));
  CHECK_THAT(regret_at(pr, pool, report.witness_theta),
             Catch::Matchers::WithinAbs(report.max_regret, 1e-9));
}

TEST_CASE("kappa = 0 search matches a dense one-dimensional scan", "[regret]") {
  TreatmentProblem pr({0.9, 1.4}, {0.35, 0.65});
  std::vector<LinearThresholdRule> rules;
  rules.push_back(build_rule(pr, RuleKind::SHRINK_MEAN, {0.3, 0.7}));
  rules.push_back(build_rule(pr, RuleKind::CES, {}, {0.5, 0.5}));  // randomized
  for (const auto& rule : rules) {
    auto report = max_regret(pr, rule, {0.0, SpaceKind::MEAN_CENTERED});
    const double c = 5.0 * (0.0 + pr.sigma_max());
    double oracle = 0.0;
    for (int i = 0; i <= 200000; ++i) {
      double m = -c + 2.0 * c * i / 200000.0;
      oracle = std::max(oracle, regret_at(pr, rule, {m, m}));
    }
    CHECK_THAT(report.max_regret, Catch::Matchers::WithinRel(oracle, 1e-6));
  }

  // Same story for K = 3, which runs the multistart engine instead.
  TreatmentProblem pr3({0.9, 1.4, 1.1}, {0.3, 0.4, 0.3});
  auto rule3 = build_rule(pr3, RuleKind::SHRINK_MEAN, {0.5, 0.5, 0.5});
  auto report3 = max_regret(pr3, rule3, {0.0, SpaceKind::MEAN_CENTERED});
  const double c3 = 5.0 * pr3.sigma_max();
  double oracle3 = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    double m = -c3 + 2.0 * c3 * i / 200000.0;
    oracle3 = std::max(oracle3, regret_at(pr3, rule3, {m, m, m}));
  }
  CHECK_THAT(report3.max_regret, Catch::Matchers::WithinRel(oracle3, 1e-6));
}

TEST_CASE("search reports are certified by their witness", "[regret]") {
  TreatmentProblem pr({1.0, 0.7, 1.3}, {0.25, 0.45, 0.3});
  ParameterSpace space{0.8, SpaceKind::MEAN_CENTERED};
  for (RuleKind kind : {RuleKind::CES, RuleKind::POOL}) {
    auto rule = build_rule(pr, kind);
    auto report = max_regret(pr, rule, space);
    CHECK(report.max_regret >= 0.0);
    CHECK(space_contains(pr, space, report.witness_theta, 1e-9));
    CHECK_THAT(regret_at(pr, rule, report.witness_theta),
               Catch::Matchers::WithinAbs(report.max_regret, 1e-9));
  }

  Eigen::MatrixXd x(3, 2);
  x << 1.0, -1.0, 1.0, 0.0, 1.0, 2.0;
  TreatmentProblem reg_pr({1.0, 0.7, 1.3}, {0.25, 0.45, 0.3}, x);
  ParameterSpace reg{0.8, SpaceKind::REGRESSION};
  auto rule = build_rule(reg_pr, RuleKind::SHRINK_REG, {0.4, 0.4, 0.4});
  auto report = max_regret(reg_pr, rule, reg);
  CHECK(space_contains(reg_pr, reg, report.witness_theta, 1e-9));
  CHECK_THAT(regret_at(reg_pr, rule, report.witness_theta),
             Catch::Matchers::WithinAbs(report.max_regret, 1e-9));
}

TEST_CASE("intercept-only regression search matches the mean-centered one", "[regret]") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 1);
  TreatmentProblem pr({1.0, 1.2, 0.8}, {0.3, 0.3, 0.4}, x);
  auto rule = build_rule(pr, RuleKind::SHRINK_MEAN, {0.6, 0.6, 0.6});
  auto mean_report = max_regret(pr, rule, {0.5, SpaceKind::MEAN_CENTERED});
  auto reg_report = max_regret(pr, rule, {0.5, SpaceKind::REGRESSION});
  CHECK_THAT(reg_report.max_regret,
             Catch::Matchers::WithinRel(mean_report.max_regret, 1e-4));
}

TEST_CASE("search budgets must be non-empty", "[regret]") {
  TreatmentProblem pr = homoscedastic(2);
  auto ces = build_rule(pr, RuleKind::CES);
  SearchBudget bad;
  bad.multistarts = 0;
  CHECK_THROWS_AS(max_regret(pr, ces, {0.5, SpaceKind::MEAN_CENTERED}, bad), config_error);
  bad = SearchBudget{};
  bad.grid = 4;
  CHECK_THROWS_AS(max_regret(pr, ces, {0.5, SpaceKind::MEAN_CENTERED}, bad), config_error);
  CHECK_THROWS_AS(max_regret(pr, ces, {-1.0, SpaceKind::MEAN_CENTERED}), config_error);
}

TEST_CASE("reports serialize with rule, witness, method, and bounds", "[regret]") {
  TreatmentProblem pr = homoscedastic(2);
  auto report = max_regret(pr, build_rule(pr, RuleKind::POOL), {0.4, SpaceKind::MEAN_CENTERED});
  report.bound_values["thm1"] = 0.9;
  report.bound_values["thm2"] = 1.4;
  nlohmann::json j = regret_report_to_json(report);
  CHECK(j["rule"] == "POOL");
  CHECK(j["max_regret"] == report.max_regret);
  CHECK(j["witness"].size() == 2);
  CHECK((j["method"] == "GRID" || j["method"] == "MULTISTART" ||
         j["method"] == "WITNESS_FAMILY"));
  CHECK(j["bounds"]["thm1"] == 0.9);
  CHECK(j["bounds"]["thm2"] == 1.4);
}

TEST_CASE("misspecified factors still beat treating on signs alone", "[regret][slow]") {
  // Homoscedastic two-group problems: factors tuned for 0.8x or 1.2x the true
  // dispersion keep the shrinkage rule weakly better than CES.
  for (auto p : {std::vector<double>{0.5, 0.5}, std::vector<double>{0.75, 0.25}}) {
    TreatmentProblem pr({1.0, 1.0}, p);
    auto ces = build_rule(pr, RuleKind::CES);
    for (double kappa : {0.1, 0.5, 1.0, 1.5}) {
      ParameterSpace space{kappa, SpaceKind::MEAN_CENTERED};
      const double ces_max = max_regret(pr, ces, space).max_regret;
      for (double mult : {0.8, 1.2}) {
        auto factors = solve_shrinkage_factors(pr, mult * kappa);
        auto rule = build_rule(pr, RuleKind::SHRINK_MEAN, factors.w_star);
        CHECK(max_regret(pr, rule, space).max_regret <= ces_max + 1e-6);
      }
    }
  }
}
