#include "treatchoice/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "treatchoice/errors.hpp"

namespace treatchoice {

TreatmentProblem::TreatmentProblem(std::vector<double> sigma, std::vector<double> p,
                                   std::optional<Eigen::MatrixXd> covariates)
    : sigma_(std::move(sigma)), p_(std::move(p)), covariates_(std::move(covariates)) {
  const size_t k = sigma_.size();
  if (k < 2) throw data_error("problem: need at least 2 groups");
  if (p_.size() != k) throw data_error("problem: sigma and p length mismatch");
  for (double s : sigma_)
    if (!(s > 0.0) || !std::isfinite(s)) throw data_error("problem: sigma entries must be positive");
  double total = 0.0;
  for (double share : p_) {
    if (share < 0.0 || !std::isfinite(share)) throw data_error("problem: shares must be >= 0");
    total += share;
  }
  if (std::abs(total - 1.0) > 1e-12) throw data_error("problem: shares must sum to 1");
  if (covariates_) {
    if (static_cast<size_t>(covariates_->rows()) != k)
      throw data_error("problem: covariate rows must match group count");
    if (covariates_->cols() < 1) throw data_error("problem: covariates need at least one column");
    // Reject a rank-deficient design up front; the hat matrix would be garbage.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(*covariates_);
    const auto& sv = svd.singularValues();
    double smax = sv(0), smin = sv(sv.size() - 1);
    if (!(smin > smax * 1e-12))
      throw config_error("problem: covariate matrix is rank deficient");
  }
}

const Eigen::MatrixXd& TreatmentProblem::covariates() const {
  if (!covariates_) throw config_error("problem: covariates requested but not supplied");
  return *covariates_;
}

double TreatmentProblem::sigma_min() const { return *std::min_element(sigma_.begin(), sigma_.end()); }

double TreatmentProblem::sigma_max() const { return *std::max_element(sigma_.begin(), sigma_.end()); }

double TreatmentProblem::s0() const {
  double ss = 0.0;
  for (double s : sigma_) ss += s * s;
  return std::sqrt(ss) / static_cast<double>(k());
}

const Eigen::MatrixXd& TreatmentProblem::hat_matrix() const {
  if (!hat_) {
    const Eigen::MatrixXd& x = covariates();
    hat_ = x * (x.transpose() * x).ldlt().solve(x.transpose());
  }
  return *hat_;
}

TreatmentProblem problem_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw data_error("problem json: expected an object");
  if (!j.contains("sigma") || !j.contains("p"))
    throw data_error("problem json: \"sigma\" and \"p\" are required");
  std::vector<double> sigma, p;
  try {
    sigma = j.at("sigma").get<std::vector<double>>();
    p = j.at("p").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("problem json: ") + e.what());
  }
  std::optional<Eigen::MatrixXd> covariates;
  if (j.contains("covariates") && !j.at("covariates").is_null()) {
    std::vector<std::vector<double>> rows;
    try {
      rows = j.at("covariates").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
      throw data_error(std::string("problem json: covariates: ") + e.what());
    }
    if (rows.empty()) throw data_error("problem json: covariates must be non-empty if present");
    Eigen::MatrixXd x(rows.size(), rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows[0].size())
        throw data_error("problem json: covariate rows have unequal lengths");
      for (size_t c = 0; c < rows[i].size(); ++c) x(i, c) = rows[i][c];
    }
    covariates = std::move(x);
  }
  return TreatmentProblem(std::move(sigma), std::move(p), std::move(covariates));
}

nlohmann::json problem_to_json(const TreatmentProblem& problem) {
  nlohmann::json j;
  j["sigma"] = problem.sigma();
  j["p"] = problem.p();
  if (problem.has_covariates()) {
    const auto& x = problem.covariates();
    std::vector<std::vector<double>> rows(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      rows[r].resize(x.cols());
      for (Eigen::Index c = 0; c < x.cols(); ++c) rows[r][c] = x(r, c);
    }
    j["covariates"] = rows;
  }
  return j;
}

}  // namespace treatchoice
