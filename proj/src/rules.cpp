#include "treatchoice/rules.hpp"

#include <algorithm>
#include <cmath>

#include "treatchoice/errors.hpp"
#include "treatchoice/rng.hpp"

namespace treatchoice {

std::string rule_kind_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::CES: return "CES";
    case RuleKind::POOL: return "POOL";
    case RuleKind::SHRINK_MEAN: return "SHRINK_MEAN";
    case RuleKind::SHRINK_REG: return "SHRINK_REG";
    case RuleKind::CUSTOM: return "CUSTOM";
  }
  return "CUSTOM";
}

RuleKind rule_kind_from_name(const std::string& name) {
  if (name == "CES") return RuleKind::CES;
  if (name == "POOL") return RuleKind::POOL;
  if (name == "SHRINK_MEAN") return RuleKind::SHRINK_MEAN;
  if (name == "SHRINK_REG") return RuleKind::SHRINK_REG;
  if (name == "CUSTOM") return RuleKind::CUSTOM;
  throw config_error("unknown rule kind: " + name);
}

bool LinearThresholdRule::randomized() const {
  return std::any_of(randomization.begin(), randomization.end(), [](double v) { return v != 0.0; });
}

namespace {

std::vector<double> checked_randomization(int k, const std::vector<double>& v) {
  if (v.empty()) return std::vector<double>(k, 0.0);
  if (static_cast<int>(v.size()) != k)
    throw config_error("rule: randomization vector length mismatch");
  for (double x : v)
    if (x < 0.0 || !std::isfinite(x)) throw config_error("rule: randomization entries must be >= 0");
  return v;
}

std::vector<double> checked_factors(int k, const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != k) throw config_error("rule: need one shrinkage factor per group");
  for (double x : w)
    if (!(x >= 0.0 && x <= 1.0)) throw config_error("rule: shrinkage factors must lie in [0,1]");
  return w;
}

}  // namespace

LinearThresholdRule build_rule(const TreatmentProblem& problem, RuleKind kind,
                               const std::vector<double>& w, const std::vector<double>& v) {
  const int k = problem.k();
  LinearThresholdRule rule;
  rule.label = kind;
  rule.randomization = checked_randomization(k, v);
  switch (kind) {
    case RuleKind::CES:
      if (!w.empty()) throw config_error("rule: CES takes no shrinkage factors");
      rule.weights = Eigen::MatrixXd::Identity(k, k);
      break;
    case RuleKind::POOL:
      if (!w.empty()) throw config_error("rule: POOL takes no shrinkage factors");
      rule.weights = Eigen::MatrixXd::Constant(k, k, 1.0 / k);
      break;
    case RuleKind::SHRINK_MEAN: {
      auto factors = checked_factors(k, w);
      rule.weights = Eigen::MatrixXd::Zero(k, k);
      for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) rule.weights(r, c) = (1.0 - factors[r]) / k;
        rule.weights(r, r) += factors[r];
      }
      break;
    }
    case RuleKind::SHRINK_REG: {
      auto factors = checked_factors(k, w);
      if (!problem.has_covariates())
        throw config_error("rule: regression shrinkage needs problem covariates");
      const Eigen::MatrixXd& h = problem.hat_matrix();
      rule.weights = Eigen::MatrixXd::Zero(k, k);
      for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) rule.weights(r, c) = (1.0 - factors[r]) * h(r, c);
        rule.weights(r, r) += factors[r];
      }
      break;
    }
    case RuleKind::CUSTOM:
      throw config_error("rule: CUSTOM rules are built with make_custom_rule");
  }
  return rule;
}

LinearThresholdRule make_custom_rule(Eigen::MatrixXd weights, std::vector<double> v) {
  if (weights.rows() != weights.cols() || weights.rows() < 1)
    throw config_error("rule: weight matrix must be square");
  LinearThresholdRule rule;
  rule.label = RuleKind::CUSTOM;
  rule.randomization = checked_randomization(static_cast<int>(weights.rows()), v);
  rule.weights = std::move(weights);
  return rule;
}

double rule_stat_stddev(const TreatmentProblem& problem, const LinearThresholdRule& rule, int k) {
  if (k < 0 || k >= rule.k()) throw std::out_of_range("rule_stat_stddev: group index");
  double var = rule.randomization[k] * rule.randomization[k];
  for (int l = 0; l < rule.k(); ++l) {
    double c = rule.weights(k, l);
    var += c * c * problem.sigma()[l] * problem.sigma()[l];
  }
  return std::sqrt(var);
}

DecisionResult decide(const LinearThresholdRule& rule, const std::vector<double>& theta_hat,
                      std::optional<std::uint64_t> seed) {
  const int k = rule.k();
  if (static_cast<int>(theta_hat.size()) != k)
    throw data_error("decide: estimate vector length mismatch");
  const bool random = rule.randomized();
  if (random && !seed) throw config_error("decide: randomized rule needs an explicit seed");

  DecisionResult out;
  out.seed = seed;
  out.treat.resize(k);
  out.statistic.resize(k);
  Eigen::Map<const Eigen::VectorXd> theta(theta_hat.data(), k);
  Eigen::VectorXd stat = rule.weights * theta;
  if (random) {
    GaussianSampler normal(*seed);
    out.z.resize(k);
    for (int i = 0; i < k; ++i) {
      out.z[i] = normal();
      stat(i) += rule.randomization[i] * out.z[i];
    }
  }
  for (int i = 0; i < k; ++i) {
    out.statistic[i] = stat(i);
    out.treat[i] = stat(i) >= 0.0 ? 1 : 0;
  }
  return out;
}

}  // namespace treatchoice
