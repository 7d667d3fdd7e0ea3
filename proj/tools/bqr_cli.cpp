// Command-line driver: single trials, convergence ladders, the regression-only
// study and the property suites.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bqr/checks.hpp"
#include "bqr/config.hpp"
#include "bqr/experiment.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> threads;
  std::vector<std::size_t> ladder;
  std::optional<double> sigma;
  std::optional<std::string> problem;
  std::optional<std::string> scheme;
  std::optional<std::string> cutoff;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool regression) {
  cmd->add_option("-c,--config", o.config_path, "TOML configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.overrides, "Override a config key: section.key=value (repeatable)");
  cmd->add_option("--trials", o.trials, "Trials per ladder point");
  cmd->add_option("--threads", o.threads, "Worker threads for trials");
  cmd->add_option("--ladder", o.ladder, "Grid sizes n (strictly increasing)");
  cmd->add_option("--sigma", o.sigma, "Terminal-data noise level");
  if (!regression) {
    cmd->add_option("--problem", o.problem, "Manufactured problem: canonical | heat");
    cmd->add_option("--scheme", o.scheme, "Time scheme: backward_euler | crank_nicolson");
    cmd->add_option("--cutoff", o.cutoff, "Nonlinearity cutoff: clamped | paper_literal");
  }
}

std::string join(const std::vector<std::size_t>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s + "]";
}

/// Config file, then named flags, then --set overrides.
toml::table assemble(const CommonOptions& o, bool regression) {
  toml::table root = o.config_path.empty() ? toml::table{} : bqr::load_config_file(o.config_path);
  const std::string sec = regression ? "regression" : "ladder";
  if (o.seed) bqr::apply_override(root, "run.seed=" + std::to_string(*o.seed));
  if (o.threads) bqr::apply_override(root, "run.threads=" + std::to_string(*o.threads));
  if (o.trials) {
    bqr::apply_override(root, (regression ? "regression" : "run") + std::string(".trials=") +
                                  std::to_string(*o.trials));
  }
  if (!o.ladder.empty()) bqr::apply_override(root, sec + ".n=" + join(o.ladder));
  if (o.sigma) {
    bqr::apply_override(root, (regression ? "regression" : "noise") + std::string(".sigma=") +
                                  bqr::format_g17(*o.sigma));
  }
  if (o.problem) bqr::apply_override(root, "problem.id=\"" + *o.problem + "\"");
  if (o.scheme) bqr::apply_override(root, "solver.scheme=\"" + *o.scheme + "\"");
  if (o.cutoff) bqr::apply_override(root, "solver.cutoff=\"" + *o.cutoff + "\"");
  for (const auto& s : o.overrides) bqr::apply_override(root, s);
  return root;
}

void print_fits(const std::vector<bqr::RateFit>& fits) {
  for (const auto& f : fits) {
    std::printf("t = %-8g slope %.4f (theory %.4f), residual %.3e over %zu points\n", f.time,
                f.slope, f.reference_slope, f.residual_norm, f.points);
  }
}

void print_report(const bqr::ErrorReport& r) {
  std::printf("%8s %10s %14s %14s %10s\n", "n", "t", "mean_sq_err", "var_sq_err", "seconds");
  for (const auto& p : r.points) {
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      std::printf("%8zu %10g %14.6e %14.6e %10.3f\n", p.n, r.times[i], p.mean[i], p.variance[i],
                  p.wall_seconds);
    }
  }
}

std::filesystem::path default_plot(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  return p.replace_extension(".gp");
}

int run_trial_cmd(const CommonOptions& o, std::size_t n, std::size_t index, const std::string& out) {
  const bqr::ExperimentConfig cfg = bqr::experiment_from_toml(assemble(o, false));
  bqr::TrajectorySolution sol{bqr::TimeGrid(1, 1.0), {}, 1, 0};
  const bqr::TrialResult r = bqr::run_trial(cfg, n, index, &sol);
  for (std::size_t i = 0; i < cfg.times.size(); ++i) {
    std::printf("t = %-8g squared error %.17g\n", cfg.times[i], r.sq_errors[i]);
  }
  std::printf("explicit sub-steps per interval: %zu\n", r.substeps);
  if (r.clipped_samples > 0) {
    std::fprintf(stderr, "warning: %zu coefficient samples clipped to a0\n", r.clipped_samples);
  }
  if (!out.empty()) {
    const bqr::ManufacturedProblem problem = cfg.make_problem();
    std::string csv = "t,x,U,u\n";
    for (std::size_t j = 0; j < sol.states.size(); ++j) {
      const auto& s = sol.states[j];
      const double t = sol.timegrid.node(j);
      for (std::size_t k = 0; k < s.size(); ++k) {
        const double x = s.grid()[k];
        csv += bqr::format_g17(t) + ',' + bqr::format_g17(x) + ',' + bqr::format_g17(s[k]) + ',' +
               bqr::format_g17(problem.uExact(x, t)) + '\n';
      }
    }
    bqr::write_atomically(out, csv);
    std::printf("snapshots written to %s\n", out.c_str());
  }
  return 0;
}

int run_converge_cmd(const CommonOptions& o, const std::string& csv, std::string plot, bool quiet) {
  const bqr::ExperimentConfig cfg = bqr::experiment_from_toml(assemble(o, false));
  const bqr::ErrorReport report = bqr::run_monte_carlo(cfg);
  std::vector<bqr::RateFit> fits;
  if (report.points.size() >= 3) fits = bqr::fit_rates(report);
  if (plot.empty()) plot = default_plot(csv).string();
  bqr::emit_outputs(report, fits, csv, plot);
  if (!quiet) {
    print_report(report);
    print_fits(fits);
    std::size_t clipped = 0;
    for (const auto& p : report.points) clipped += p.clipped_samples;
    if (clipped > 0) std::fprintf(stderr, "warning: %zu coefficient samples clipped to a0\n", clipped);
    std::printf("wrote %s and %s\n", csv.c_str(), plot.c_str());
  }
  return 0;
}

int run_regression_cmd(const CommonOptions& o, const std::string& csv, std::string plot,
                       bool pure_noise) {
  toml::table root = assemble(o, true);
  if (pure_noise) bqr::apply_override(root, "regression.pure_noise=true");
  const bqr::RegressionConfig cfg = bqr::regression_from_toml(root);
  const bqr::ErrorReport report = bqr::run_regression_study(cfg);
  std::vector<bqr::RateFit> fits;
  if (report.points.size() >= 3) fits = bqr::fit_rates(report);
  if (plot.empty()) plot = default_plot(csv).string();
  bqr::emit_outputs(report, fits, csv, plot, "mean squared L2 error of the estimator");
  print_report(report);
  print_fits(fits);
  if (cfg.pure_noise) {
    for (const auto& p : report.points) {
      const std::size_t pcut = bqr::TruncationSet(p.params.betaN).pcut();
      std::printf("n = %zu: analytic pcut sigma^2 pi / n = %.6e, ratio %.4f\n", p.n,
                  bqr::analytic_noise_energy(p.n, pcut, cfg.sigma),
                  p.mean[0] / bqr::analytic_noise_energy(p.n, pcut, cfg.sigma));
    }
  }
  std::printf("wrote %s and %s\n", csv.c_str(), plot.c_str());
  return 0;
}

int run_check_cmd(const std::vector<std::string>& suites, bool full) {
  namespace ck = bqr::checks;
  auto wants = [&](const char* s) {
    for (const auto& x : suites) {
      if (x == s || x == "all") return true;
    }
    return false;
  };
  std::vector<ck::CheckResult> results;
  auto add = [&](std::vector<ck::CheckResult> rs) {
    for (auto& r : rs) {
      std::printf("%s  %-40s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
      std::fflush(stdout);
      results.push_back(std::move(r));
    }
  };
  if (wants("spectral")) add(ck::spectral_suite());
  if (wants("operators")) add({ck::estimate_p1(), ck::estimate_p2()});
  if (wants("lipschitz")) add(ck::lipschitz_suite());
  if (wants("linear")) add(ck::linear_backward_suite());
  if (wants("regression")) {
    bqr::RegressionConfig rc;
    if (!full) {
      rc.ladder = {64, 128, 256, 512, 1024};
      rc.trials = 1000;
    }
    add(ck::regression_rate_suite(rc).results);
  }
  if (wants("pipeline")) {
    bqr::ExperimentConfig cfg;
    if (!full) cfg.trials = 8;
    cfg.seed = 42;
    add(ck::pipeline_checks(bqr::run_monte_carlo(cfg)));
  }
  if (results.empty()) {
    std::fprintf(stderr, "error: no suite selected\n");
    return 2;
  }
  return ck::all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized backward Burgers solver with series-regression inputs"};
  app.require_subcommand(1);

  CommonOptions trial_opts, conv_opts, reg_opts;
  std::size_t trial_n = 128, trial_index = 0;
  std::string trial_out;
  auto* trial = app.add_subcommand("trial", "Run one trial and dump its snapshots");
  add_common(trial, trial_opts, false);
  trial->add_option("--seed", trial_opts.seed, "Base seed");
  trial->add_option("-n,--n", trial_n, "Grid size")->check(CLI::PositiveNumber);
  trial->add_option("--index", trial_index, "Trial index");
  trial->add_option("-o,--out", trial_out, "CSV file for the snapshots (t,x,U,u)");

  std::string conv_csv = "converge.csv", conv_plot;
  bool conv_quiet = false;
  auto* converge = app.add_subcommand("converge", "Monte-Carlo convergence study over the ladder");
  add_common(converge, conv_opts, false);
  converge->add_option("--seed", conv_opts.seed, "Base seed")->required();
  converge->add_option("--csv", conv_csv, "Output CSV path");
  converge->add_option("--plot", conv_plot, "Output gnuplot script (default: CSV path with .gp)");
  converge->add_flag("-q,--quiet", conv_quiet, "Only write files");

  std::string reg_csv = "regression.csv", reg_plot;
  bool pure_noise = false;
  auto* regression = app.add_subcommand("regression", "Estimator-only study for H(x) = x (pi - x)");
  add_common(regression, reg_opts, true);
  regression->add_option("--seed", reg_opts.seed, "Base seed");
  regression->add_option("--csv", reg_csv, "Output CSV path");
  regression->add_option("--plot", reg_plot, "Output gnuplot script (default: CSV path with .gp)");
  regression->add_flag("--pure-noise", pure_noise, "Use H = 0 to isolate the variance term");

  std::vector<std::string> suites{"spectral", "operators", "lipschitz", "linear"};
  bool full = false;
  auto* check = app.add_subcommand("check", "Run property suites");
  check->add_option("suites", suites,
                    "spectral operators lipschitz linear regression pipeline | all")
      ->check(CLI::IsMember({"spectral", "operators", "lipschitz", "linear", "regression",
                             "pipeline", "all"}));
  check->add_flag("--full", full, "Use the full trial counts for the Monte-Carlo suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*trial) return run_trial_cmd(trial_opts, trial_n, trial_index, trial_out);
    if (*converge) return run_converge_cmd(conv_opts, conv_csv, conv_plot, conv_quiet);
    if (*regression) return run_regression_cmd(reg_opts, reg_csv, reg_plot, pure_noise);
    if (*check) return run_check_cmd(suites, full);
  } catch (const bqr::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const bqr::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
