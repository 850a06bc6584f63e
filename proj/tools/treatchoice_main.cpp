// Command-line front end: thin argument parsing over the command layer.
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "treatchoice/commands.hpp"
#include "treatchoice/errors.hpp"

namespace tc = treatchoice;

int main(int argc, char** argv) {
  CLI::App app{"Shrinkage treatment rules: kernels, factors, regret, bounds, decisions"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --seed/--out-dir/--json appear after the subcommand

  tc::CommonOptions common;
  app.add_option("--out-dir", common.out_dir, "Directory for CSV/SVG/JSON outputs");
  app.add_option("--seed", common.seed, "Seed for every randomized step");
  app.add_flag("--json", common.json, "Print machine-readable JSON to stdout, skip SVG plots");

  tc::EtaOptions eta;
  auto* c_eta = app.add_subcommand("eta", "Tabulate the worst-case regret kernel");
  c_eta->add_option("--min", eta.min, "Grid start");
  c_eta->add_option("--max", eta.max, "Grid end");
  c_eta->add_option("--step", eta.step, "Grid step");

  tc::FactorsOptions factors;
  auto* c_factors = app.add_subcommand("factors", "Tabulate optimal shrinkage factors");
  c_factors->add_option("--k", factors.k_list, "Homoscedastic panel sizes (one curve each)");
  c_factors->add_option("--sigma", factors.sigma, "Common standard error for the panels");
  c_factors->add_option("--kappa-max", factors.kappa_max, "Largest dispersion budget");
  c_factors->add_option("--kappa-step", factors.kappa_step, "Budget grid step");
  c_factors->add_option("--problem", factors.problem_path,
                        "Problem JSON: per-group curves instead of panels");

  tc::CompareOptions compare;
  auto* c_compare =
      app.add_subcommand("regret-compare", "Maximum regret of the three rules plus bounds");
  c_compare->add_option("--problem", compare.problem_path, "Problem JSON (overrides sigma/p)");
  c_compare->add_option("--sigma", compare.sigma, "Per-group standard errors");
  c_compare->add_option("--p", compare.p, "Per-group population shares");
  c_compare->add_option("--kappa-min", compare.kappa_min, "Smallest dispersion budget");
  c_compare->add_option("--kappa-max", compare.kappa_max, "Largest dispersion budget");
  c_compare->add_option("--kappa-step", compare.kappa_step, "Budget grid step");
  c_compare->add_option("--kappa-prime", compare.kappa_prime_rule,
                        "Budget used by the rule: equal, 1.2x, or 0.8x");
  c_compare->add_option("--multistarts", compare.budget.multistarts, "Search restarts");
  c_compare->add_option("--grid", compare.budget.grid, "Two-group grid resolution");
  c_compare->add_option("--refine-rounds", compare.budget.refine_rounds, "Grid zoom rounds");

  tc::BoundsOptions bounds;
  auto* c_bounds = app.add_subcommand("bounds", "Tabulate the regret ratio bounds");
  c_bounds->add_option("--problem", bounds.problem_path, "Problem JSON (overrides sigma/p)");
  c_bounds->add_option("--sigma", bounds.sigma, "Per-group standard errors");
  c_bounds->add_option("--p", bounds.p, "Per-group population shares");
  c_bounds->add_option("--kappa-min", bounds.kappa_min, "Smallest dispersion budget");
  c_bounds->add_option("--kappa-max", bounds.kappa_max, "Largest dispersion budget");
  c_bounds->add_option("--kappa-step", bounds.kappa_step, "Budget grid step");
  c_bounds->add_option("--kappa-prime", bounds.kappa_prime_rule,
                       "Budget used by the rule: equal, 1.2x, or 0.8x");

  tc::EstimateOptions estimate;
  auto* c_estimate = app.add_subcommand("estimate", "Group estimates from micro-data CSV");
  c_estimate->add_option("--data", estimate.data_path, "Micro-data CSV")->required();
  c_estimate->add_option("--y", estimate.y_column, "Outcome column");
  c_estimate->add_option("--d", estimate.d_column, "Treatment indicator column (0/1)");
  c_estimate->add_option("--key", estimate.key_columns, "Group key columns")->required();
  c_estimate->add_option("--cost", estimate.cost_offset, "Per-unit treatment cost");

  tc::DecideOptions decide;
  auto* c_decide = app.add_subcommand("decide", "Treatment decisions for estimated groups");
  c_decide->add_option("--data", decide.data_path, "Micro-data CSV");
  c_decide->add_option("--estimates", decide.estimates_path, "Estimates JSON from `estimate`");
  c_decide->add_option("--y", decide.y_column, "Outcome column");
  c_decide->add_option("--d", decide.d_column, "Treatment indicator column (0/1)");
  c_decide->add_option("--key", decide.key_columns, "Group key columns");
  c_decide->add_option("--cost", decide.cost_offset, "Per-unit treatment cost");
  c_decide->add_option("--kappa", decide.kappa, "Dispersion budget for the factors");
  c_decide->add_option("--variant", decide.variant, "Shrinkage target: mean or regression");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_eta->parsed()) return tc::cmd_eta(eta, common);
    if (c_factors->parsed()) return tc::cmd_factors(factors, common);
    if (c_compare->parsed()) return tc::cmd_regret_compare(compare, common);
    if (c_bounds->parsed()) return tc::cmd_bounds(bounds, common);
    if (c_estimate->parsed()) return tc::cmd_estimate(estimate, common);
    if (c_decide->parsed()) return tc::cmd_decide(decide, common);
  } catch (const tc::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const tc::data_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
