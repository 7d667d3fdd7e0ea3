#pragma once

// Property suites shared by the `check` subcommand and the acceptance binary.
// Each suite returns named pass/fail results with a one-line measurement.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "bqr/experiment.hpp"
#include "bqr/manufactured.hpp"
#include "bqr/operators.hpp"
#include "bqr/random.hpp"
#include "bqr/regression.hpp"
#include "bqr/solvers.hpp"
#include "bqr/spectral.hpp"

namespace bqr::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

inline bool all_passed(const std::vector<CheckResult>& rs) {
  return std::all_of(rs.begin(), rs.end(), [](const CheckResult& r) { return r.passed; });
}

/// Uniform draw on [lo, hi) from the stream.
inline double uniform(NormalStream& rng, double lo, double hi) {
  return lo + (hi - lo) * (rng.uniform_open0() - 0x1.0p-53);
}

// ---------------------------------------------------------------------------
// Spectral

struct SpectralOptions {
  std::vector<std::size_t> sizes{16, 64, 256};
  std::size_t functions = 100;
  std::uint64_t seed = 1;
};

inline std::vector<CheckResult> spectral_suite(const SpectralOptions& o = {}) {
  double ortho = 0.0, roundtrip = 0.0, parseval = 0.0;
  for (std::size_t n : o.sizes) {
    const SpatialGrid grid(n);
    const double w = std::numbers::pi / static_cast<double>(n);
    std::vector<double> col(n);
    for (std::size_t q = 1; q < n; ++q) {
      for (std::size_t k = 0; k < n; ++k) col[k] = grid.basis(q, k);
      for (std::size_t p = 1; p < n; ++p) {
        const double ip = w * grid.project(p, col);
        ortho = std::max(ortho, std::abs(ip - (p == q ? 1.0 : 0.0)));
      }
    }
    NormalStream rng(derive_seed(o.seed, {n}));
    for (std::size_t f = 0; f < o.functions; ++f) {
      SpectralCoeffs c(n - 1);
      for (double& v : c.c) v = rng.standard_normal();
      const GridFunction g = synthesize(c, grid);
      const SpectralCoeffs back = analyze(g, n - 1);
      for (std::size_t p = 0; p < n - 1; ++p) {
        roundtrip = std::max(roundtrip, std::abs(back.c[p] - c.c[p]));
      }
      const double lhs = discrete_l2_norm(g);
      const double rhs = l2_norm(c);
      parseval = std::max(parseval, std::abs(lhs * lhs - rhs * rhs) / std::max(1.0, rhs * rhs));
    }
  }
  return {
      {"discrete orthogonality", ortho <= 1e-12, fmt("max |<psi_p,psi_q>_n - delta| = %.3e", ortho)},
      {"analyze/synthesize round trip", roundtrip <= 1e-10, fmt("max coefficient error = %.3e", roundtrip)},
      {"grid Parseval", parseval <= 1e-10, fmt("max relative energy mismatch = %.3e", parseval)},
  };
}

// ---------------------------------------------------------------------------
// Operator bounds

struct OperatorOptions {
  std::vector<double> rhos{1.0, 4.0, 16.0, 64.0};
  std::vector<double> gammas{0.0, 1.0, 2.0};
  std::size_t vectors = 1000;
  std::size_t pmax = 64;
  double a1 = 2.0;
  double T = 1.0;
  std::uint64_t seed = 2;
};

/// ||P_rho c|| <= rho ||c||.
inline CheckResult estimate_p1(const OperatorOptions& o = {}) {
  NormalStream rng(derive_seed(o.seed, {1}));
  double worst = 0.0;
  bool ok = true;
  for (double rho : o.rhos) {
    const RegParams rp{0.5 * o.a1, o.a1, rho, 1.0, 1.0, rho, 1.0, 1.0};
    for (std::size_t i = 0; i < o.vectors; ++i) {
      SpectralCoeffs c(o.pmax);
      for (double& v : c.c) v = rng.standard_normal();
      const double lhs = l2_norm(apply_P_trunc(c, rp));
      const double rhs = rho * l2_norm(c);
      worst = std::max(worst, lhs / rhs);
      ok = ok && lhs <= rhs * (1.0 + 1e-14);
    }
  }
  return {"P_rho norm bound", ok, fmt("max ||P_rho c|| / (rho ||c||) = %.6f", worst)};
}

/// ||P c - P_rho c|| <= a1 rho^-gamma e^{-T rho} ||c||_{gamma, T a1} for
/// c_p = u_p e^{-T a1 p^2}, u_p uniform on [-1, 1].
inline CheckResult estimate_p2(const OperatorOptions& o = {}) {
  NormalStream rng(derive_seed(o.seed, {2}));
  double worst = 0.0;
  bool ok = true;
  std::size_t cases = 0;
  for (double gamma : o.gammas) {
    for (double rho : o.rhos) {
      const RegParams rp{0.5 * o.a1, o.a1, rho, 1.0, 1.0, rho, gamma, 1.0};
      for (std::size_t i = 0; i < 32; ++i) {
        SpectralCoeffs c(o.pmax);
        for (std::size_t p = 1; p <= o.pmax; ++p) {
          const double pd = static_cast<double>(p);
          c.c[p - 1] = uniform(rng, -1.0, 1.0) * std::exp(-o.T * o.a1 * pd * pd);
        }
        const SpectralCoeffs full = apply_P(c, rp);
        const SpectralCoeffs trunc = apply_P_trunc(c, rp);
        double diff = 0.0;
        for (std::size_t p = 0; p < o.pmax; ++p) diff += (full.c[p] - trunc.c[p]) * (full.c[p] - trunc.c[p]);
        const double lhs = std::sqrt(diff);
        const double rhs = o.a1 * std::pow(rho, -gamma) * std::exp(-o.T * rho) *
                           gevrey_norm(c, SmoothnessParams{gamma, o.T * o.a1});
        worst = std::max(worst, lhs / rhs);
        ok = ok && lhs <= rhs;
      }
      ++cases;
    }
  }
  return {"P - P_rho tail bound", ok,
          fmt("%zu (gamma, rho) cases, max lhs / rhs = %.3e", cases, worst)};
}

// ---------------------------------------------------------------------------
// Lipschitz property of the cutoff

/// Where max{v, vhat} falls relative to [-q, q].
enum class Region { inside, above, below };

inline Region region_of(double v, double vhat, double q) {
  const double top = std::max(v, vhat);
  if (top > q) return Region::above;
  if (top < -q) return Region::below;
  return Region::inside;
}

/// A pair (v, vhat) whose max lies in `r`; magnitudes up to `scale * q`.
inline std::array<double, 2> draw_pair(NormalStream& rng, Region r, double q, double scale) {
  switch (r) {
    case Region::above: {
      const double top = uniform(rng, q, scale * q) + 1e-9 * q;
      const double other = uniform(rng, -scale * q, scale * q);
      return rng.raw() & 1 ? std::array{top, other} : std::array{other, top};
    }
    case Region::below:
      return {uniform(rng, -scale * q, -q) - 1e-9 * q, uniform(rng, -scale * q, -q) - 1e-9 * q};
    case Region::inside:
    default: {
      const double top = uniform(rng, -q, q);
      const double other = uniform(rng, -scale * q, top);
      return rng.raw() & 1 ? std::array{top, other} : std::array{other, top};
    }
  }
}

struct LipschitzOptions {
  std::size_t quadruples = 100000;
  double scale = 4.0;
  std::uint64_t seed = 3;
};

/// Clamped cutoff on random quadruples covering every pairing of regions.
inline std::vector<CheckResult> lipschitz_suite(const LipschitzOptions& o = {}) {
  NormalStream rng(derive_seed(o.seed, {1}));
  constexpr std::array regions{Region::inside, Region::above, Region::below};
  std::array<std::size_t, 9> hits{};
  double worst = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i < o.quadruples; ++i) {
    const double q = std::exp(uniform(rng, std::log(0.1), std::log(100.0)));
    const std::size_t combo = i % 9;
    const auto a = draw_pair(rng, regions[combo / 3], q, o.scale);
    const auto b = draw_pair(rng, regions[combo % 3], q, o.scale);
    ++hits[combo];
    const double lhs = std::abs(cutoff_F(a[0], a[1], q) - cutoff_F(b[0], b[1], q));
    const double dist = std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]);
    const double rhs = q * dist;
    if (dist > 0.0) worst = std::max(worst, lhs / rhs);
    ok = ok && lhs <= rhs * (1.0 + 1e-12) + 1e-300;
  }
  const std::size_t fewest = *std::min_element(hits.begin(), hits.end());

  // Witness against the three-case form keyed on max{v, vhat}.
  const double q = 10.0;
  const double v = -1e6, vh = q, w = -1e6, wh = q - 1.0;
  const double lit = std::abs(cutoff_F(v, vh, q, CutoffMode::paper_literal) -
                              cutoff_F(w, wh, q, CutoffMode::paper_literal));
  const double bound = q * (std::abs(v - w) + std::abs(vh - wh));
  return {
      {"clamped cutoff Lipschitz", ok && fewest > 0,
       fmt("%zu quadruples, 9 region pairings (min %zu each), max ratio = %.6f", o.quadruples,
           fewest, worst)},
      {"paper_literal witness violates bound", lit > bound,
       fmt("|dF| = %.6g > q (|dv| + |dvhat|) = %.6g", lit, bound)},
  };
}

// ---------------------------------------------------------------------------
// Regression rate

struct RegressionRateResult {
  ErrorReport report;
  ErrorReport noise_report;
  RateFit fit;
  std::vector<CheckResult> results;
};

inline RegressionRateResult regression_rate_suite(RegressionConfig cfg) {
  RegressionRateResult out;
  cfg.pure_noise = false;
  out.report = run_regression_study(cfg);
  out.fit = fit_rate(out.report, 0);

  bool decreasing = true;
  for (std::size_t i = 1; i < out.report.points.size(); ++i) {
    decreasing = decreasing && out.report.points[i].mean[0] < out.report.points[i - 1].mean[0];
  }
  out.results.push_back({"regression MSE decreasing", decreasing,
                         fmt("MSE %.3e (n=%zu) -> %.3e (n=%zu)", out.report.points.front().mean[0],
                             out.report.points.front().n, out.report.points.back().mean[0],
                             out.report.points.back().n)});
  out.results.push_back({"regression slope within 0.4 of theory",
                         std::abs(out.fit.slope - out.fit.reference_slope) <= 0.4,
                         fmt("fitted %.4f, theoretical %.4f", out.fit.slope, out.fit.reference_slope)});

  cfg.pure_noise = true;
  out.noise_report = run_regression_study(cfg);
  double worst = 0.0;
  for (const auto& p : out.noise_report.points) {
    const std::size_t pcut = TruncationSet(p.params.betaN).pcut();
    const double expect = analytic_noise_energy(p.n, pcut, cfg.sigma);
    worst = std::max(worst, std::abs(p.mean[0] / expect - 1.0));
  }
  out.results.push_back({"pure-noise variance term", worst <= 0.05,
                         fmt("max relative deviation from pcut sigma^2 pi / n = %.4f", worst)});
  return out;
}

// ---------------------------------------------------------------------------
// Linear backward sanity

struct LinearBackwardOptions {
  std::size_t n = 256;
  std::size_t m = 1024;
  double a1 = 2.0;
  double rho = 8.0;
  double T = 1.0;
  TimeScheme scheme = TimeScheme::crank_nicolson;
};

/// Error at t = 0 of the zero-noise heat-mode reconstruction with A = 1.
inline double linear_backward_error(const LinearBackwardOptions& o) {
  const ManufacturedProblem problem =
      manufacture(solutions::decaying_sine(), coefficients::constant(1.0), o.T, 1.0, false);
  const SpatialGrid grid(o.n);
  const TimeGrid tg(o.m, o.T);
  const auto h = GridFunction::sample(grid, [&](double x) { return problem.hDerived(x); });
  const auto g = SampledField::tabulate(grid, tg, [&](double x, double t) { return problem.gDerived(x, t); });
  const auto a = SampledField::tabulate(grid, tg, [&](double x, double t) { return problem.aExact(x, t); });
  const RegParams rp = RegParams::coupled(1.0, o.a1, o.rho, static_cast<double>(o.n), 1.0);
  BackwardOptions opts;
  opts.scheme = o.scheme;
  opts.nonlinear = false;
  const TrajectorySolution sol = backward_solve_regularized(h, g, a, rp, grid, tg, opts);
  return error_at(0.0, sol, problem);
}

inline std::vector<CheckResult> linear_backward_suite(const LinearBackwardOptions& o = {}) {
  const double coarse = linear_backward_error(o);
  LinearBackwardOptions fine = o;
  fine.n *= 2;
  fine.m *= 2;
  const double refined = linear_backward_error(fine);
  return {
      {"linear backward error at t = 0", coarse <= 1e-2,
       fmt("error %.3e at n=%zu, m=%zu", coarse, o.n, o.m)},
      {"linear backward refinement", coarse >= 2.0 * refined,
       fmt("error %.3e -> %.3e at n=%zu, m=%zu (ratio %.2f)", coarse, refined, fine.n, fine.m,
           coarse / refined)},
  };
}

// ---------------------------------------------------------------------------
// Full pipeline

/// Mean error at t = 0 nonincreasing along the ladder, with at most one
/// increase and that one within a standard error; mean at T/2 no larger than
/// 1.25 times the mean at t = 0.
inline std::vector<CheckResult> pipeline_checks(const ErrorReport& report) {
  std::size_t t0 = report.times.size(), tmid = report.times.size();
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    if (report.times[i] == 0.0) t0 = i;
    else if (tmid == report.times.size()) tmid = i;
  }
  std::vector<CheckResult> out;
  if (t0 == report.times.size() || tmid == report.times.size()) {
    out.push_back({"pipeline report layout", false, "report must contain t = 0 and a later time"});
    return out;
  }
  std::size_t inversions = 0;
  bool within_se = true;
  std::string trail;
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    const auto& p = report.points[i];
    trail += fmt("%s%.3e", i ? " -> " : "", p.mean[t0]);
    if (i == 0) continue;
    const auto& prev = report.points[i - 1];
    if (p.mean[t0] > prev.mean[t0]) {
      ++inversions;
      const double se = std::sqrt(p.variance[t0] / static_cast<double>(p.trials) +
                                  prev.variance[t0] / static_cast<double>(prev.trials));
      within_se = within_se && p.mean[t0] - prev.mean[t0] <= se;
    }
  }
  out.push_back({"pipeline error nonincreasing in n", inversions <= 1 && within_se,
                 fmt("%zu inversions; mean at t=0: ", inversions) + trail});
  double worst = 0.0;
  for (const auto& p : report.points) worst = std::max(worst, p.mean[tmid] / p.mean[t0]);
  out.push_back({"pipeline later-time weighting", worst <= 1.25,
                 fmt("max mean(t=%.3g) / mean(t=0) = %.4f", report.times[tmid], worst)});
  return out;
}

}  // namespace bqr::checks
