#pragma once

// Monte-Carlo harness: observe -> estimate -> regularized backward solve ->
// error, repeated over trials and a ladder of grid sizes, with log-log rate
// fits against the theoretical orders and CSV / gnuplot output.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bqr/manufactured.hpp"
#include "bqr/noise.hpp"
#include "bqr/operators.hpp"
#include "bqr/random.hpp"
#include "bqr/regression.hpp"
#include "bqr/solvers.hpp"
#include "bqr/spectral.hpp"

namespace bqr {

// ---------------------------------------------------------------------------
// Parameter schedules

struct BetaSchedule {
  enum class Kind { linear, balanced, constant } kind = Kind::linear;
  // linear: betaN = scale * n; balanced: scale * n^(4 mu0 / (mu0 + 1/2)).
  // The unscaled balanced value exceeds n^2, so it needs scale < 1 to stay in band.
  double scale = 1.0;
  double value = 1.0;  // constant

  double resolve(double n, double mu0) const {
    switch (kind) {
      case Kind::linear: return scale * n;
      case Kind::balanced: return scale * balanced_beta(n, mu0);
      case Kind::constant: return value;
    }
    return value;
  }
};

struct RhoSchedule {
  enum class Kind { logarithmic, constant } kind = Kind::logarithmic;
  double alpha = 0.0;  // logarithmic: rhoN = alpha log n; 0 selects mu0 / (2T)
  double value = 1.0;

  double resolve(double n, double mu0, double T) const {
    if (kind == Kind::constant) return value;
    const double a = alpha > 0.0 ? alpha : mu0 / (2.0 * T);
    return a * std::log(n);
  }
};

struct QhatSchedule {
  enum class Kind { constant, growing } kind = Kind::constant;
  double q0 = 2.0;

  double resolve(double n) const {
    if (kind == Kind::constant) return q0;
    return q0 * std::sqrt(std::log(std::log(n + 16.0)));
  }
};

struct KappaSchedule {
  enum class Kind { coupled, constant } kind = Kind::coupled;
  double value = 1.0;

  double resolve(double rho) const { return kind == Kind::coupled ? rho : value; }
};

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  std::string problem = "canonical";  // canonical | heat
  double final_time = 1.0;
  double a0 = 3.0;
  double a1 = 4.0;
  double gamma = 1.0;
  double mu0 = 2.0;

  std::vector<std::size_t> ladder{64, 128, 256, 512};
  double time_steps_factor = 2.0;  // m(n) = ceil(factor * n)
  std::size_t min_time_steps = 16;
  std::size_t trials = 64;
  std::vector<double> times{0.0, 0.5};

  double sigma = 0.01;
  double vartheta = 0.01;
  double varthetabar = 0.01;
  double vmax = 1.0;
  bool shared_noise = false;

  BetaSchedule beta;
  RhoSchedule rho;
  QhatSchedule qhat;
  KappaSchedule kappa;

  TimeScheme scheme = TimeScheme::backward_euler;
  CutoffMode cutoff = CutoffMode::clamped;
  double c_stab = 0.5;

  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::size_t time_steps(std::size_t n) const {
    const auto m = static_cast<std::size_t>(std::ceil(time_steps_factor * static_cast<double>(n)));
    return std::max(m, min_time_steps);
  }

  RegParams resolve(std::size_t n) const {
    const double nd = static_cast<double>(n);
    const double rho = this->rho.resolve(nd, mu0, final_time);
    return RegParams{a0,  a1,    rho, beta.resolve(nd, mu0), qhat.resolve(nd), kappa.resolve(rho),
                     gamma, mu0};
  }

  ManufacturedProblem make_problem() const {
    if (problem == "canonical") {
      return manufacture(solutions::decaying_sine(), coefficients::oscillating(), final_time, a0);
    }
    if (problem == "heat") {
      return manufacture(solutions::decaying_sine(), coefficients::constant(1.0), final_time, a0,
                         false);
    }
    throw std::invalid_argument("unknown problem id '" + problem + "' (expected canonical or heat)");
  }

  void validate() const {
    if (ladder.empty()) throw std::invalid_argument("config: ladder is empty");
    for (std::size_t i = 1; i < ladder.size(); ++i) {
      if (ladder[i] <= ladder[i - 1]) {
        throw std::invalid_argument("config: ladder must be strictly increasing");
      }
    }
    if (trials == 0) throw std::invalid_argument("config: trials must be at least 1");
    if (!(final_time > 0.0)) throw std::invalid_argument("config: final_time must be positive");
    if (!(time_steps_factor > 0.0)) throw std::invalid_argument("config: time_steps_factor <= 0");
    if (threads == 0) throw std::invalid_argument("config: threads must be at least 1");
    for (double t : times) {
      if (!(t >= 0.0) || t > final_time) {
        throw std::invalid_argument("config: evaluation time " + std::to_string(t) +
                                    " outside [0, T]");
      }
    }
    for (std::size_t n : ladder) {
      const RegParams rp = resolve(n);
      rp.validate();
      const TruncationSet ts(rp.betaN);
      check_band(ts.pcut(), n);
      if (rp.band_cutoff() + 1 > n) {
        throw std::invalid_argument("config: rho band exceeds the grid at n = " +
                                    std::to_string(n));
      }
    }
    make_problem();
  }
};

// ---------------------------------------------------------------------------
// Trials

struct TrialResult {
  std::vector<double> sq_errors;  // one per cfg.times entry
  std::size_t clipped_samples = 0;
  std::size_t substeps = 1;
};

struct TrialInputs {
  SpatialGrid grid;
  TimeGrid timegrid;
  RegParams params;
  NoisyObservations observations;
};

inline std::uint64_t trial_seed(std::uint64_t base, std::size_t n, std::size_t trial_index) {
  return derive_seed(base, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial_index)});
}

/// Truth sampling and noisy observation for one trial.
inline TrialInputs prepare_trial(const ExperimentConfig& cfg, const ManufacturedProblem& problem,
                                 std::size_t n, std::size_t trial_index) {
  const SpatialGrid grid(n);
  const TimeGrid tg(cfg.time_steps(n), cfg.final_time);
  const auto truthH = GridFunction::sample(grid, [&](double x) { return problem.hDerived(x); });
  const auto truthG = SampledField::tabulate(
      grid, tg, [&](double x, double t) { return problem.gDerived(x, t); });
  const auto truthA = SampledField::tabulate(
      grid, tg, [&](double x, double t) { return problem.aExact(x, t); });
  NoiseConfig noise = NoiseConfig::uniform(n, cfg.sigma, cfg.vartheta, cfg.varthetabar,
                                           trial_seed(cfg.seed, n, trial_index), cfg.vmax);
  noise.shared_noise = cfg.shared_noise;
  return TrialInputs{grid, tg, cfg.resolve(n), observe(truthH, truthG, truthA, tg, noise)};
}

/// Full pipeline for one (n, trial) pair; the solution is returned through
/// `solution` when non-null.
inline TrialResult run_trial(const ExperimentConfig& cfg, std::size_t n, std::size_t trial_index,
                             TrajectorySolution* solution = nullptr) {
  const ManufacturedProblem problem = cfg.make_problem();
  const TrialInputs in = prepare_trial(cfg, problem, n, trial_index);
  const TruncationSet ts(in.params.betaN);
  const SpectralCoeffs hHat = estimate_static(in.observations.hTilde, ts);
  const TimeField gHat = estimate_time_field(in.observations.gTilde, in.timegrid, ts);
  const TimeField aHat = estimate_time_field(in.observations.aTilde, in.timegrid, ts);

  BackwardOptions opts;
  opts.scheme = cfg.scheme;
  opts.cutoff = cfg.cutoff;
  opts.nonlinear = problem.nonlinear;
  opts.c_stab = cfg.c_stab;

  auto solve = [&] {
    try {
      return backward_solve_regularized(hHat, gHat, aHat, in.params, in.grid, in.timegrid, opts);
    } catch (const SolverError& e) {
      throw SolverError("trial " + std::to_string(trial_index) + " at n = " + std::to_string(n) +
                            ": " + e.what(),
                        e.time());
    }
  };
  TrajectorySolution sol = solve();
  TrialResult out;
  out.clipped_samples = sol.clipped_samples;
  out.substeps = sol.substeps;
  for (double t : cfg.times) {
    const double e = error_at(t, sol, problem);
    out.sq_errors.push_back(e * e);
  }
  if (solution) *solution = std::move(sol);
  return out;
}

// ---------------------------------------------------------------------------
// Reports

struct LadderResult {
  std::size_t n = 0;
  std::size_t m = 0;
  RegParams params;
  std::size_t trials = 0;
  std::vector<std::vector<double>> sq_errors;  // [time index][trial index]
  std::vector<double> mean;
  std::vector<double> variance;  // unbiased sample variance, 0 for one trial
  std::vector<double> theory;
  double wall_seconds = 0.0;
  std::size_t clipped_samples = 0;
};

struct ErrorReport {
  std::vector<double> times;
  std::vector<LadderResult> points;
};

/// Mean and unbiased variance accumulated in index order.
inline std::pair<double, double> mean_and_variance(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  // Identical samples (zero noise) report exactly zero variance.
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) {
    return {xs.front(), 0.0};
  }
  double s = 0.0;
  for (double x : xs) s += x;
  const double mean = s / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, ss / static_cast<double>(xs.size() - 1)};
}

/// Order of E||U - u||^2 at time t:
/// exp(16 Q^2 T / (A1 - A0)) e^{-2 kappa t}
///   max(e^{2 rho T} sqrt(beta) n^{-4 mu0}, e^{2 rho T} beta^{-mu0}, rho^{-2 gamma}).
inline double log_theorem_order(const RegParams& rp, double n, double t, double T) {
  const double growth = 2.0 * rp.rhoN * T;
  const double branch1 = growth + 0.5 * std::log(rp.betaN) - 4.0 * rp.mu0 * std::log(n);
  const double branch2 = growth - rp.mu0 * std::log(rp.betaN);
  const double branch3 = -2.0 * rp.gamma * std::log(rp.rhoN);
  return 16.0 * rp.qhatN * rp.qhatN * T / (rp.a1 - rp.a0) - 2.0 * rp.kappaN * t +
         std::max({branch1, branch2, branch3});
}

inline double theorem_order(const RegParams& rp, double n, double t, double T) {
  return std::exp(log_theorem_order(rp, n, t, T));
}

namespace detail {

/// Runs body(i) for i in [0, count) on up to `threads` workers; results are
/// written by index so completion order never matters.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += threads) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

/// All trials for every ladder point. A failing trial fails the run.
inline ErrorReport run_monte_carlo(const ExperimentConfig& cfg) {
  cfg.validate();
  ErrorReport report;
  report.times = cfg.times;
  for (std::size_t n : cfg.ladder) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<TrialResult> results(cfg.trials);
    detail::parallel_for(cfg.trials, cfg.threads,
                         [&](std::size_t i) { results[i] = run_trial(cfg, n, i); });

    LadderResult lr;
    lr.n = n;
    lr.m = cfg.time_steps(n);
    lr.params = cfg.resolve(n);
    lr.trials = cfg.trials;
    lr.sq_errors.assign(cfg.times.size(), std::vector<double>(cfg.trials));
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      lr.clipped_samples += results[i].clipped_samples;
      for (std::size_t ti = 0; ti < cfg.times.size(); ++ti) {
        lr.sq_errors[ti][i] = results[i].sq_errors[ti];
      }
    }
    for (std::size_t ti = 0; ti < cfg.times.size(); ++ti) {
      const auto [mean, var] = mean_and_variance(lr.sq_errors[ti]);
      lr.mean.push_back(mean);
      lr.variance.push_back(var);
      lr.theory.push_back(
          theorem_order(lr.params, static_cast<double>(n), cfg.times[ti], cfg.final_time));
    }
    lr.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.points.push_back(std::move(lr));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Regression-only study

struct RegressionConfig {
  std::vector<std::size_t> ladder{64, 128, 256, 512, 1024, 2048, 4096};
  std::size_t trials = 10000;
  double sigma = 0.01;
  double vmax = 1.0;
  double mu0 = 1.5;
  BetaSchedule beta;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool pure_noise = false;  // truth identically zero

  void validate() const {
    if (ladder.empty()) throw std::invalid_argument("regression: ladder is empty");
    for (std::size_t i = 1; i < ladder.size(); ++i) {
      if (ladder[i] <= ladder[i - 1]) {
        throw std::invalid_argument("regression: ladder must be strictly increasing");
      }
    }
    if (trials == 0) throw std::invalid_argument("regression: trials must be at least 1");
    if (!(mu0 > 0.5)) throw std::invalid_argument("regression: mu0 must exceed 1/2");
    for (std::size_t n : ladder) check_band(TruncationSet(beta.resolve(double(n), mu0)).pcut(), n);
  }
};

/// E||Hhat - H||^2 for H(x) = x (pi - x) (or H = 0) over the ladder. The
/// report has a single evaluation time t = 0 and its theory column holds
/// theoretical_mse_order; rho, qhat and kappa are reported as 0.
inline ErrorReport run_regression_study(const RegressionConfig& cfg) {
  cfg.validate();
  const TruthSeries truth = cfg.pure_noise ? TruthSeries::zero() : TruthSeries::parabola();
  ErrorReport report;
  report.times = {0.0};
  for (std::size_t n : cfg.ladder) {
    const auto start = std::chrono::steady_clock::now();
    const SpatialGrid grid(n);
    const double nd = static_cast<double>(n);
    const double betaN = cfg.beta.resolve(nd, cfg.mu0);
    const TruncationSet ts(betaN);
    std::vector<double> clean(n);
    if (!cfg.pure_noise) {
      for (std::size_t k = 0; k < n; ++k) clean[k] = grid[k] * (std::numbers::pi - grid[k]);
    }
    std::vector<double> errors(cfg.trials);
    detail::parallel_for(cfg.trials, cfg.threads, [&](std::size_t i) {
      const NoiseConfig noise =
          NoiseConfig::uniform(n, cfg.sigma, 0.0, 0.0, trial_seed(cfg.seed, n, i), cfg.vmax);
      const auto eps = sample_gaussian_errors(n, noise);
      std::vector<double> h(n);
      for (std::size_t k = 0; k < n; ++k) h[k] = clean[k] + eps[k];
      errors[i] = squared_error(estimate_static(GridFunction(grid, std::move(h)), ts), truth);
    });
    LadderResult lr;
    lr.n = n;
    lr.params = RegParams{0.0, 0.0, 0.0, betaN, 0.0, 0.0, 0.0, cfg.mu0};
    lr.trials = cfg.trials;
    const auto [mean, var] = mean_and_variance(errors);
    lr.mean = {mean};
    lr.variance = {var};
    lr.theory = {theoretical_mse_order(nd, betaN, cfg.mu0)};
    lr.sq_errors = {std::move(errors)};
    lr.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.points.push_back(std::move(lr));
  }
  return report;
}

/// Variance of the truncated estimator under pure noise: pcut sigma^2 pi / n.
inline double analytic_noise_energy(std::size_t n, std::size_t pcut, double sigma) {
  return static_cast<double>(pcut) * sigma * sigma * std::numbers::pi / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Rate fits

struct RateFit {
  double time = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double residual_norm = 0.0;
  double reference_slope = 0.0;  // slope of the theoretical order over the same ladder
  std::size_t points = 0;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_norm = 0.0;
};

/// Least-squares line through (xs, ys).
inline LineFit least_squares_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t k = xs.size();
  if (k < 2 || ys.size() != k) throw std::invalid_argument("least_squares_line: need >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rr = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    rr += r * r;
  }
  f.residual_norm = std::sqrt(rr);
  return f;
}

/// log-log fit of the mean squared error against n at report.times[time_index].
inline RateFit fit_rate(const ErrorReport& report, std::size_t time_index) {
  if (report.points.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 ladder points");
  if (time_index >= report.times.size()) throw std::out_of_range("fit_rate: bad time index");
  std::vector<double> xs, ys, ts;
  for (const auto& p : report.points) {
    const double mean = p.mean.at(time_index);
    if (!(mean > 0.0)) {
      throw std::invalid_argument("fit_rate: nonpositive mean at n = " + std::to_string(p.n));
    }
    xs.push_back(std::log(static_cast<double>(p.n)));
    ys.push_back(std::log(mean));
    ts.push_back(std::log(p.theory.at(time_index)));
  }
  const LineFit data = least_squares_line(xs, ys);
  RateFit fit;
  fit.time = report.times[time_index];
  fit.slope = data.slope;
  fit.intercept = data.intercept;
  fit.residual_norm = data.residual_norm;
  fit.points = xs.size();
  bool finite = true;
  for (double t : ts) finite = finite && std::isfinite(t);
  fit.reference_slope = finite ? least_squares_line(xs, ts).slope
                               : std::numeric_limits<double>::quiet_NaN();
  return fit;
}

inline std::vector<RateFit> fit_rates(const ErrorReport& report) {
  std::vector<RateFit> out;
  for (std::size_t i = 0; i < report.times.size(); ++i) out.push_back(fit_rate(report, i));
  return out;
}

// ---------------------------------------------------------------------------
// Output

inline constexpr const char* kCsvHeader =
    "n,t,beta_n,rho_n,qhat_n,kappa_n,trials,mean_sq_error,var_sq_error,theory_order";

struct CsvRow {
  std::size_t n = 0;
  double t = 0.0;
  double beta_n = 0.0;
  double rho_n = 0.0;
  double qhat_n = 0.0;
  double kappa_n = 0.0;
  std::size_t trials = 0;
  double mean_sq_error = 0.0;
  double var_sq_error = 0.0;
  double theory_order = 0.0;

  friend bool operator==(const CsvRow&, const CsvRow&) = default;
};

inline std::vector<CsvRow> csv_rows(const ErrorReport& report) {
  std::vector<CsvRow> rows;
  for (const auto& p : report.points) {
    for (std::size_t ti = 0; ti < report.times.size(); ++ti) {
      rows.push_back(CsvRow{p.n, report.times[ti], p.params.betaN, p.params.rhoN, p.params.qhatN,
                            p.params.kappaN, p.trials, p.mean[ti], p.variance[ti], p.theory[ti]});
    }
  }
  return rows;
}

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string render_csv(const ErrorReport& report) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : csv_rows(report)) {
    out += std::to_string(r.n) + ',' + format_g17(r.t) + ',' + format_g17(r.beta_n) + ',' +
           format_g17(r.rho_n) + ',' + format_g17(r.qhat_n) + ',' + format_g17(r.kappa_n) + ',' +
           std::to_string(r.trials) + ',' + format_g17(r.mean_sq_error) + ',' +
           format_g17(r.var_sq_error) + ',' + format_g17(r.theory_order) + '\n';
  }
  return out;
}

inline std::vector<CsvRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::invalid_argument("parse_csv: missing or unexpected header");
  }
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw std::invalid_argument("parse_csv: expected 10 fields in '" + line + "'");
    rows.push_back(CsvRow{std::stoull(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]),
                          std::stod(f[4]), std::stod(f[5]), std::stoull(f[6]), std::stod(f[7]),
                          std::stod(f[8]), std::stod(f[9])});
  }
  return rows;
}

/// Write `contents` to a sibling temporary and rename it over `path`.
inline void write_atomically(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw std::runtime_error("cannot move '" + tmp.string() + "' to '" + path.string() +
                             "': " + ec.message());
  }
}

/// gnuplot script: log-log mean error against n per evaluation time, with the
/// theoretical order rescaled to meet the data at the smallest n.
inline std::string render_plot_script(const ErrorReport& report, const std::vector<RateFit>& fits,
                                      const std::string& csv_name, const std::string& ylabel) {
  std::ostringstream s;
  s << "# log-log error against n; data read from " << csv_name << "\n"
    << "set datafile separator ','\n"
    << "set logscale xy\n"
    << "set key bottom left\n"
    << "set xlabel 'n'\n"
    << "set ylabel '" << ylabel << "'\n";
  std::vector<std::string> curves;
  for (std::size_t ti = 0; ti < report.times.size(); ++ti) {
    const auto& first = report.points.front();
    const double scale = first.mean[ti] / first.theory[ti];
    const std::string t = format_g17(report.times[ti]);
    s << "scale" << ti << " = " << format_g17(std::isfinite(scale) ? scale : 1.0) << "\n";
    const std::string sel = "(abs($2-(" + t + "))<1e-12";
    std::string title = "t = " + t;
    if (ti < fits.size()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, " (slope %.3f)", fits[ti].slope);
      title += buf;
    }
    curves.push_back("'" + csv_name + "' skip 1 using 1:" + sel + " ? $8 : 1/0) with linespoints title '" +
                     title + "'");
    curves.push_back("'" + csv_name + "' skip 1 using 1:" + sel + " ? scale" + std::to_string(ti) +
                     "*$10 : 1/0) with lines dashtype 2 title 'theory, t = " + t + "'");
  }
  s << "plot ";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    s << curves[i] << (i + 1 < curves.size() ? ", \\\n     " : "\n");
  }
  return s.str();
}

inline void emit_outputs(const ErrorReport& report, const std::vector<RateFit>& fits,
                         const std::filesystem::path& csv_path,
                         const std::filesystem::path& plot_path,
                         const std::string& ylabel = "mean squared L2 error") {
  if (report.points.empty() || report.times.empty()) {
    throw std::invalid_argument("emit_outputs: empty report");
  }
  write_atomically(csv_path, render_csv(report));
  if (!plot_path.empty()) {
    write_atomically(plot_path,
                     render_plot_script(report, fits, csv_path.filename().string(), ylabel));
  }
}

}  // namespace bqr
