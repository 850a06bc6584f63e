#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "treatchoice/commands.hpp"
#include "treatchoice/errors.hpp"
#include "treatchoice/shrinkage.hpp"

using namespace treatchoice;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fresh scratch directory per test case, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("treatchoice_cli_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

// Two-group micro-data with exactly computable estimates: effects +3 and -3,
// unit standard errors, equal shares.
void write_golden_csv(const fs::path& p) {
  std::ofstream out(p);
  out << "site,y,d\n";
  for (const char* row :
       {"a,3,1", "a,5,1", "a,1,0", "a,1,0", "b,2,1", "b,2,1", "b,4,0", "b,6,0"})
    out << row << '\n';
}

CommonOptions common_in(const TempDir& dir) {
  CommonOptions c;
  c.out_dir = dir.str();
  return c;
}

}  // namespace

TEST_CASE("eta command writes the curve and its sidecar") {
  TempDir dir("eta");
  EtaOptions opt;
  opt.min = 0.0;
  opt.max = 0.5;
  opt.step = 0.25;
  REQUIRE(cmd_eta(opt, common_in(dir)) == 0);

  const auto rows = lines_of(slurp(dir.path / "eta_curve.csv"));
  REQUIRE(rows.size() == 4);  // header + three grid points
  CHECK(rows[0] == "a,eta,t_star,eta_prime,envelope_lo,envelope_hi");
  CHECK(rows[1].substr(0, 2) == "0,");

  const json config = json::parse(slurp(dir.path / "eta_curve.config.json"));
  CHECK(config.at("command") == "eta");
  CHECK(config.at("step").get<double>() == 0.25);
  CHECK(config.at("seed").get<std::uint64_t>() == 20260819u);

  CHECK(fs::exists(dir.path / "eta_curve.svg"));
}

TEST_CASE("eta command validates its grid") {
  TempDir dir("eta_bad");
  EtaOptions opt;
  opt.step = -0.1;
  CHECK_THROWS_AS(cmd_eta(opt, common_in(dir)), config_error);
  opt.step = 0.1;
  opt.min = -1.0;
  CHECK_THROWS_AS(cmd_eta(opt, common_in(dir)), config_error);
  opt.min = 2.0;
  opt.max = 1.0;
  CHECK_THROWS_AS(cmd_eta(opt, common_in(dir)), config_error);
  opt.min = 0.0;
  opt.max = 1.0;
  opt.step = 1e-9;
  CHECK_THROWS_AS(cmd_eta(opt, common_in(dir)), config_error);
}

TEST_CASE("factors command tabulates panel curves with known endpoints") {
  TempDir dir("factors");
  FactorsOptions opt;
  opt.k_list = {2};
  opt.kappa_max = 1.6;
  opt.kappa_step = 0.8;
  REQUIRE(cmd_factors(opt, common_in(dir)) == 0);

  const auto rows = lines_of(slurp(dir.path / "factors_curve.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "kappa,K=2");
  CHECK(rows[1] == "0,0");        // no dispersion budget: full pooling
  CHECK(rows[3] == "1.6,1");      // large budget: no shrinkage at all

  const json config = json::parse(slurp(dir.path / "factors_curve.config.json"));
  CHECK(config.at("monotone").at("K=2").get<bool>());

  FactorsOptions bad;
  bad.k_list = {1};
  CHECK_THROWS_AS(cmd_factors(bad, common_in(dir)), config_error);
  bad.k_list = {};
  CHECK_THROWS_AS(cmd_factors(bad, common_in(dir)), config_error);
}

TEST_CASE("regret comparison produces one row per budget and is rerun-stable") {
  TempDir dir("compare");
  CompareOptions opt;
  opt.kappa_min = 0.2;
  opt.kappa_max = 0.4;
  opt.kappa_step = 0.2;
  opt.budget.multistarts = 4;
  opt.budget.grid = 201;
  opt.budget.refine_rounds = 3;
  REQUIRE(cmd_regret_compare(opt, common_in(dir)) == 0);

  const std::string first = slurp(dir.path / "regret_compare.csv");
  const auto rows = lines_of(first);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] ==
        "kappa,kappa_prime,max_regret_shrinkage,max_regret_ces,max_regret_pooling,"
        "thm1,thm2,thm3,thm4");

  const std::string first_svg = slurp(dir.path / "regret_compare.svg");
  REQUIRE(cmd_regret_compare(opt, common_in(dir)) == 0);
  CHECK(slurp(dir.path / "regret_compare.csv") == first);
  CHECK(slurp(dir.path / "regret_compare.svg") == first_svg);

  CompareOptions bad = opt;
  bad.kappa_prime_rule = "double";
  CHECK_THROWS_AS(cmd_regret_compare(bad, common_in(dir)), config_error);
}

TEST_CASE("bounds command applies the budget misstatement rule") {
  TempDir dir("bounds");
  BoundsOptions opt;
  opt.sigma = {0.75, 1.25};
  opt.p = {0.5, 0.5};
  opt.kappa_min = 0.5;
  opt.kappa_max = 0.5;
  opt.kappa_step = 0.1;
  opt.kappa_prime_rule = "0.8x";
  REQUIRE(cmd_bounds(opt, common_in(dir)) == 0);

  const auto rows = lines_of(slurp(dir.path / "bounds_curve.csv"));
  REQUIRE(rows.size() == 2);
  // kappa = 0.5 with the 0.8x rule gives kappa' = 0.4.
  CHECK(rows[1].substr(0, 8) == "0.5,0.4,");
  CHECK(fs::exists(dir.path / "bounds_curve.svg"));
}

TEST_CASE("estimate command reproduces the golden dataset by hand") {
  TempDir dir("estimate");
  const fs::path csv = dir.path / "micro.csv";
  write_golden_csv(csv);

  EstimateOptions opt;
  opt.data_path = csv.string();
  opt.key_columns = {"site"};
  REQUIRE(cmd_estimate(opt, common_in(dir)) == 0);

  const auto rows = lines_of(slurp(dir.path / "estimates.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "group,n_treated,n_control,theta_hat,sigma_hat,p_hat");
  CHECK(rows[1] == "a,2,2,3,1,0.5");
  CHECK(rows[2] == "b,2,2,-3,1,0.5");

  const json full = json::parse(slurp(dir.path / "estimates.json"));
  CHECK(full.at("theta_hat")[0].get<double>() == 3.0);
  CHECK(full.at("dispersion").at("draws").get<long>() == 100000);
  CHECK(fs::exists(dir.path / "estimates.svg"));

  EstimateOptions missing;
  CHECK_THROWS_AS(cmd_estimate(missing, common_in(dir)), config_error);
}

TEST_CASE("decide command matches direct library decisions") {
  TempDir dir("decide");
  const fs::path csv = dir.path / "micro.csv";
  write_golden_csv(csv);

  DecideOptions opt;
  opt.data_path = csv.string();
  opt.key_columns = {"site"};
  opt.kappa = 0.5;
  REQUIRE(cmd_decide(opt, common_in(dir)) == 0);

  const json report = json::parse(slurp(dir.path / "decide.json"));
  const auto& groups = report.at("groups");
  REQUIRE(groups.size() == 2);
  // theta_hat = (3, -3): the sign rule splits, and with kappa = 0.5 the
  // factors stay large enough that shrinkage toward a zero mean splits too.
  CHECK(groups[0].at("treat_ces").get<int>() == 1);
  CHECK(groups[1].at("treat_ces").get<int>() == 0);
  CHECK(groups[0].at("treat_pooling").get<int>() == groups[1].at("treat_pooling").get<int>());
  CHECK(groups[0].at("w_star").get<double>() == groups[1].at("w_star").get<double>());

  const TreatmentProblem pr({1.0, 1.0}, {0.5, 0.5});
  const auto sol = solve_shrinkage_factors(pr, 0.5);
  CHECK_THAT(groups[0].at("w_star").get<double>(),
             Catch::Matchers::WithinAbs(sol.w_star[0], 1e-12));

  CHECK(fs::exists(dir.path / "decide.csv"));
  CHECK(fs::exists(dir.path / "decide_estimates.svg"));
  CHECK(fs::exists(dir.path / "decide_factors.svg"));
}

TEST_CASE("decide command validates its inputs") {
  TempDir dir("decide_bad");
  const fs::path csv = dir.path / "micro.csv";
  write_golden_csv(csv);

  DecideOptions neither;
  CHECK_THROWS_AS(cmd_decide(neither, common_in(dir)), config_error);

  DecideOptions both;
  both.data_path = csv.string();
  both.estimates_path = "x.json";
  both.key_columns = {"site"};
  CHECK_THROWS_AS(cmd_decide(both, common_in(dir)), config_error);

  DecideOptions bad_variant;
  bad_variant.data_path = csv.string();
  bad_variant.key_columns = {"site"};
  bad_variant.variant = "median";
  CHECK_THROWS_AS(cmd_decide(bad_variant, common_in(dir)), config_error);

  DecideOptions neg_kappa;
  neg_kappa.data_path = csv.string();
  neg_kappa.key_columns = {"site"};
  neg_kappa.kappa = -1.0;
  CHECK_THROWS_AS(cmd_decide(neg_kappa, common_in(dir)), config_error);
}

TEST_CASE("decide regression variant needs micro-data for the design") {
  TempDir dir("decide_reg");
  const fs::path csv = dir.path / "micro.csv";
  write_golden_csv(csv);

  // First produce an estimates file, then ask for regression shrinkage from
  // it: without micro-data there is nothing to build the design from.
  EstimateOptions est_opt;
  est_opt.data_path = csv.string();
  est_opt.key_columns = {"site"};
  REQUIRE(cmd_estimate(est_opt, common_in(dir)) == 0);

  DecideOptions from_json;
  from_json.estimates_path = (dir.path / "estimates.json").string();
  from_json.variant = "regression";
  CHECK_THROWS_AS(cmd_decide(from_json, common_in(dir)), config_error);

  // With micro-data the single key column yields an intercept + site dummy
  // design, which saturates two groups: the fit equals theta_hat and the
  // decisions must coincide with the sign rule at any budget.
  DecideOptions with_data;
  with_data.data_path = csv.string();
  with_data.key_columns = {"site"};
  with_data.variant = "regression";
  with_data.kappa = 0.3;
  REQUIRE(cmd_decide(with_data, common_in(dir)) == 0);
  const json report = json::parse(slurp(dir.path / "decide.json"));
  CHECK(report.at("groups")[0].at("treat_shrinkage").get<int>() == 1);
  CHECK(report.at("groups")[1].at("treat_shrinkage").get<int>() == 0);
}

TEST_CASE("estimates json round-trips into decide") {
  TempDir dir("roundtrip");
  const fs::path csv = dir.path / "micro.csv";
  write_golden_csv(csv);

  EstimateOptions est_opt;
  est_opt.data_path = csv.string();
  est_opt.key_columns = {"site"};
  REQUIRE(cmd_estimate(est_opt, common_in(dir)) == 0);

  DecideOptions from_csv;
  from_csv.data_path = csv.string();
  from_csv.key_columns = {"site"};
  from_csv.kappa = 0.5;
  REQUIRE(cmd_decide(from_csv, common_in(dir)) == 0);
  const std::string direct = slurp(dir.path / "decide.csv");

  DecideOptions from_json;
  from_json.estimates_path = (dir.path / "estimates.json").string();
  from_json.kappa = 0.5;
  REQUIRE(cmd_decide(from_json, common_in(dir)) == 0);
  CHECK(slurp(dir.path / "decide.csv") == direct);
}
