#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "bqr/checks.hpp"
#include "bqr/manufactured.hpp"
#include "bqr/solvers.hpp"
#include "bqr/tridiagonal.hpp"

using namespace bqr;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

// G for u = e^{-t} sin x, A = 2 + sin x cos t, differentiated by hand.
double canonical_g(double x, double t) {
  const double e = std::exp(-t);
  const double ut = -e * std::sin(x);
  const double ux = e * std::cos(x);
  const double uxx = -e * std::sin(x);
  const double a = 2.0 + std::sin(x) * std::cos(t);
  const double ax = std::cos(x) * std::cos(t);
  return ut - ax * ux - a * uxx - e * std::sin(x) * ux;
}

struct CanonicalInputs {
  SpatialGrid grid;
  TimeGrid tg;
  SpectralCoeffs h;
  TimeField g, a;
};

CanonicalInputs canonical_inputs(const ManufacturedProblem& pr, std::size_t n, std::size_t m,
                                 double beta) {
  const SpatialGrid grid(n);
  const TimeGrid tg(m, pr.T);
  const TruncationSet ts(beta);
  const auto H = GridFunction::sample(grid, [&](double x) { return pr.hDerived(x); });
  const auto G = SampledField::tabulate(grid, tg, [&](double x, double t) { return pr.gDerived(x, t); });
  const auto A = SampledField::tabulate(grid, tg, [&](double x, double t) { return pr.aExact(x, t); });
  return {grid, tg, estimate_static(H, ts), estimate_time_field(G, tg, ts), estimate_time_field(A, tg, ts)};
}

}  // namespace

TEST_CASE("Thomas solver", "[solvers]") {
  Tridiagonal m(5);
  for (std::size_t i = 0; i < 5; ++i) {
    m.diag[i] = 4.0 + i;
    if (i > 0) m.lower[i] = -1.0 - 0.1 * i;
    if (i + 1 < 5) m.upper[i] = -2.0 + 0.2 * i;
  }
  const std::vector<double> x{1, -2, 3, 0.5, -1};
  std::vector<double> b(5);
  m.multiply(x, b);
  const auto y = solve_tridiagonal(m, b);
  for (std::size_t i = 0; i < 5; ++i) CHECK_THAT(y[i], WithinAbs(x[i], 1e-13));
  Tridiagonal singular(2);
  CHECK_THROWS(solve_tridiagonal(singular, std::vector<double>{1, 1}));
}

TEST_CASE("manufacture", "[solvers]") {
  SECTION("u = e^{-t} sin x, A = 1") {
    const auto pr = manufacture(solutions::decaying_sine(), coefficients::constant(1.0), 1.0, 1.0);
    for (double x : {0.1, 0.7, 1.5, 2.9}) {
      for (double t : {0.0, 0.3, 1.0}) {
        // u_t - u_xx = 0, so only -u u_x remains.
        const double expect = -std::exp(-2 * t) * std::sin(x) * std::cos(x);
        CHECK_THAT(pr.gDerived(x, t), WithinAbs(expect, 1e-12));
      }
      CHECK_THAT(pr.hDerived(x), WithinAbs(std::exp(-1.0) * std::sin(x), 1e-15));
    }
  }
  SECTION("zero solution") {
    const auto pr = manufacture(solutions::zero(), coefficients::constant(1.0), 2.0, 1.0);
    for (double x : {0.2, 1.0, 3.0}) {
      CHECK(pr.gDerived(x, 0.5) == 0.0);
      CHECK(pr.hDerived(x) == 0.0);
    }
  }
  SECTION("canonical residual at 1000 random points") {
    const auto pr = canonical_problem();
    NormalStream rng(21);
    double worst = 0.0, worst_fd = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double x = kPi * rng.uniform_open0();
      const double t = rng.uniform_open0();
      worst = std::max(worst, std::abs(pr.gDerived(x, t) - canonical_g(x, t)));
      // Residual with every derivative taken by central differences of the
      // closed forms only.
      const double h = 1e-4;
      auto u = [&](double xx, double tt) { return pr.uExact(xx, tt); };
      auto flux = [&](double xx) { return pr.aExact(xx, t) * (u(xx + h, t) - u(xx - h, t)) / (2 * h); };
      const double ut = (u(x, t + h) - u(x, t - h)) / (2 * h);
      const double div = (flux(x + h) - flux(x - h)) / (2 * h);
      const double ux = (u(x + h, t) - u(x - h, t)) / (2 * h);
      worst_fd = std::max(worst_fd, std::abs(ut - div - u(x, t) * ux - pr.gDerived(x, t)));
    }
    CHECK(worst <= 1e-10);
    CHECK(worst_fd <= 1e-6);
  }
  SECTION("rejections") {
    SolutionSpec cosine{[](double x, double) { return std::cos(x); }, [](double x, double) { return -std::sin(x); },
                        [](double x, double) { return -std::cos(x); }, [](double, double) { return 0.0; }};
    CHECK_THROWS_AS(manufacture(cosine, coefficients::constant(1.0), 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(manufacture(solutions::decaying_sine(), coefficients::constant(2.0), 1.0, 1.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(manufacture(solutions::decaying_sine(), coefficients::constant(-1.0), 1.0, 1.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(manufacture(solutions::decaying_sine(), coefficients::constant(1.0), 0.0, 1.5),
                    std::invalid_argument);
  }
}

TEST_CASE("forward_solve", "[solvers]") {
  SECTION("nonlinear, A = 1, n = 256, m = 512") {
    const auto pr = manufacture(solutions::decaying_sine(), coefficients::constant(1.0), 1.0, 1.0);
    const auto sol = forward_solve(pr, SpatialGrid(256), TimeGrid(512, 1.0));
    REQUIRE(sol.states.size() == 513);
    const double e = error_at(1.0, sol, pr);
    CHECK(e <= 1e-3);
    const auto fine = forward_solve(pr, SpatialGrid(512), TimeGrid(1024, 1.0));
    CHECK(error_at(1.0, fine, pr) <= 0.6 * e);
  }
  SECTION("linear heat mode, n = 256, m = 512") {
    const auto pr = manufacture(solutions::decaying_sine(), coefficients::constant(1.0), 1.0, 1.0, false);
    for (auto scheme : {TimeScheme::backward_euler, TimeScheme::crank_nicolson}) {
      const auto sol = forward_solve(pr, SpatialGrid(256), TimeGrid(512, 1.0), {scheme});
      for (std::size_t j = 0; j <= 512; j += 64) {
        const double t = sol.timegrid.node(j);
        CHECK(error_at(t, sol, pr) <= 1e-3);
      }
    }
  }
  SECTION("canonical problem converges") {
    const auto pr = canonical_problem();
    const double e1 = error_at(1.0, forward_solve(pr, SpatialGrid(128), TimeGrid(256, 1.0)), pr);
    const double e2 = error_at(1.0, forward_solve(pr, SpatialGrid(256), TimeGrid(512, 1.0)), pr);
    CHECK(e2 <= 1e-3);
    CHECK(e1 / e2 >= 1.8);
  }
  SECTION("zero data stays zero") {
    const auto pr = manufacture(solutions::zero(), coefficients::constant(1.0), 1.0, 1.0);
    const auto sol = forward_solve(pr, SpatialGrid(32), TimeGrid(16, 1.0));
    for (const auto& s : sol.states) {
      for (std::size_t k = 0; k < 32; ++k) CHECK(s[k] == 0.0);
    }
  }
  SECTION("instability is reported") {
    const auto pr = manufacture(solutions::decaying_sine(), coefficients::constant(1.0), 1.0, 1.0);
    ForwardOptions opts;
    opts.growth_limit = 1e-3;
    CHECK_THROWS_AS(forward_solve(pr, SpatialGrid(16), TimeGrid(8, 1.0), opts), SolverError);
  }
  SECTION("time grid must match T") {
    const auto pr = canonical_problem();
    CHECK_THROWS_AS(forward_solve(pr, SpatialGrid(16), TimeGrid(8, 2.0)), std::invalid_argument);
  }
}

TEST_CASE("backward_solve_regularized: basic contracts", "[solvers]") {
  const SpatialGrid grid(64);
  const TimeGrid tg(32, 1.0);
  const auto rp = RegParams::coupled(3.0, 4.0, 16.0, 64.0, 2.0);

  SECTION("zero data gives zero") {
    const SampledField zero(64, 33), a(64, 33, 2.0);
    const auto sol = backward_solve_regularized(GridFunction(grid), zero, a, rp, grid, tg);
    for (const auto& s : sol.states) {
      for (std::size_t k = 0; k < 64; ++k) CHECK(s[k] == 0.0);
    }
    // Spectral-input overload.
    TimeField g{tg, std::vector<SpectralCoeffs>(33, SpectralCoeffs(8))};
    const auto sol2 = backward_solve_regularized(SpectralCoeffs(8), g, g, rp, grid, tg);
    for (std::size_t k = 0; k < 64; ++k) CHECK(sol2.at_node(0)[k] == 0.0);
  }
  SECTION("terminal snapshot is the data and sub-stepping follows c_stab") {
    const auto h = GridFunction::sample(grid, [](double x) { return std::sin(x); });
    const auto sol = backward_solve_regularized(h, SampledField(64, 33), SampledField(64, 33, 2.0), rp, grid, tg);
    for (std::size_t k = 0; k < 64; ++k) CHECK(sol.at_node(32)[k] == h[k]);
    // dtau rho = 16 / 32 = 0.5 <= c_stab: one step per interval.
    CHECK(sol.substeps == 1);
    BackwardOptions opts;
    opts.c_stab = 0.1;
    CHECK(backward_solve_regularized(h, SampledField(64, 33), SampledField(64, 33, 2.0), rp, grid, tg, opts).substeps == 5);
  }
  SECTION("overshooting Ahat is clipped with a warning") {
    SampledField a(64, 33, 2.0);
    a(3, 7) = 3.5;
    a(10, 0) = 10.0;
    std::vector<std::string> warnings;
    BackwardOptions opts;
    opts.warn = [&](const std::string& s) { warnings.push_back(s); };
    const auto sol = backward_solve_regularized(GridFunction(grid), SampledField(64, 33), a, rp, grid, tg, opts);
    CHECK(sol.clipped_samples == 2);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("clipped") != std::string::npos);
  }
  SECTION("shape and parameter errors") {
    CHECK_THROWS_AS(backward_solve_regularized(GridFunction(grid), SampledField(64, 30), SampledField(64, 33, 2.0),
                                               rp, grid, tg),
                    std::invalid_argument);
    auto bad = rp;
    bad.a1 = 2.0;
    CHECK_THROWS_AS(backward_solve_regularized(GridFunction(grid), SampledField(64, 33), SampledField(64, 33, 1.0),
                                               bad, grid, tg),
                    std::invalid_argument);
    auto huge = rp;
    huge.rhoN = 4.0 * 64 * 64;
    CHECK_THROWS_AS(backward_solve_regularized(GridFunction(grid), SampledField(64, 33), SampledField(64, 33, 1.0),
                                               huge, grid, tg),
                    std::invalid_argument);
  }
  SECTION("non-finite state aborts with the time") {
    auto wild = rp;
    wild.rhoN = 4.0 * 60 * 60;  // band of 60 modes: growth e^{a0 p^2 tau}
    wild.kappaN = wild.rhoN;
    NormalStream rng(3);
    std::vector<double> h(64);
    for (double& v : h) v = rng.standard_normal();
    BackwardOptions opts;
    opts.nonlinear = false;
    opts.c_stab = 1e9;
    try {
      backward_solve_regularized(GridFunction(grid, h), SampledField(64, 1001), SampledField(64, 1001, 3.0), wild,
                                 grid, TimeGrid(1000, 200.0), opts);
      FAIL("expected a SolverError");
    } catch (const SolverError& e) {
      CHECK(e.time() < 200.0);
      CHECK(e.time() >= 0.0);
    }
  }
}

TEST_CASE("backward_solve_regularized: linear reconstruction", "[solvers]") {
  checks::LinearBackwardOptions o;  // A = 1, A1 = 2, rho = 8, n = 256, m = 1024
  SECTION("Crank-Nicolson meets the accuracy and refinement targets") {
    for (const auto& r : checks::linear_backward_suite(o)) {
      INFO(r.name << ": " << r.detail);
      CHECK(r.passed);
    }
  }
  SECTION("backward Euler meets the accuracy target") {
    o.scheme = TimeScheme::backward_euler;
    CHECK(checks::linear_backward_error(o) <= 1e-2);
  }
}

TEST_CASE("backward_solve_regularized: reversed-time energy bound", "[solvers]") {
  // With data only in Hhat, ||U(tau)||^2 <= e^{2 rho tau} ||Hhat||^2.
  const SpatialGrid grid(64);
  const TimeGrid tg(64, 1.0);
  NormalStream rng(12);
  for (double rho : {1.0, 4.0, 16.0}) {
    const auto rp = RegParams::coupled(1.0, 2.0, rho, 64.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> h(64);
      for (double& v : h) v = rng.standard_normal();
      const GridFunction H(grid, h);
      BackwardOptions opts;
      opts.nonlinear = false;
      const auto sol = backward_solve_regularized(H, SampledField(64, 65), SampledField(64, 65, 1.0), rp, grid, tg, opts);
      const double h2 = std::pow(discrete_l2_norm(H), 2);
      for (std::size_t j = 0; j <= 64; ++j) {
        const double tau = 1.0 - tg.node(j);
        CHECK(std::pow(discrete_l2_norm(sol.at_node(j)), 2) <= std::exp(2.0 * rho * tau) * h2 * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("backward_solve_regularized: high modes decay", "[solvers]") {
  const std::size_t n = 128;
  const SpatialGrid grid(n);
  const TimeGrid tg(200, 0.25);
  const double a0 = 1.0, a1 = 2.0;
  const auto rp = RegParams::coupled(a0, a1, 8.0, 64.0, 1.0);  // band = 2
  for (std::size_t q : {3u, 5u, 9u}) {
    const auto H = GridFunction::sample(grid, [&](double x) { return basis_eval(q, x); });
    BackwardOptions opts;
    opts.nonlinear = false;
    const auto sol = backward_solve_regularized(H, SampledField(n, 201), SampledField(n, 201, a0), rp, grid, tg, opts);
    double prev = 1.0;
    for (std::size_t r = 1; r <= 200; ++r) {
      const std::size_t j = 200 - r;
      const double tau = 0.25 - tg.node(j);
      const double amp = std::abs(analyze(sol.at_node(j), q).mode(q));
      CHECK(amp < prev);
      CHECK(amp <= std::exp(-(a1 - a0) * double(q) * q * tau / 2.0));
      prev = amp;
    }
  }
}

TEST_CASE("backward_solve_regularized: clamp inactivity", "[solvers]") {
  // |u| <= 1 and |u_x| <= 1 for u = e^{-t} sin x, below qhat = 2.
  const auto pr = canonical_problem();
  const auto in = canonical_inputs(pr, 128, 256, 128.0);
  const auto rp = RegParams::coupled(3.0, 4.0, std::log(128.0), 128.0, 2.0, 1.0, 2.0);
  BackwardOptions clamped, literal;
  literal.cutoff = CutoffMode::paper_literal;
  const auto a = backward_solve_regularized(in.h, in.g, in.a, rp, in.grid, in.tg, clamped);
  const auto b = backward_solve_regularized(in.h, in.g, in.a, rp, in.grid, in.tg, literal);
  double worst = 0.0;
  for (std::size_t j = 0; j < a.states.size(); ++j) {
    for (std::size_t k = 0; k < 128; ++k) worst = std::max(worst, std::abs(a.states[j][k] - b.states[j][k]));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("backward_solve_regularized: rho sweep on the canonical problem", "[solvers]") {
  // Zero noise, betaN = n = 256, qhat = 2. The error at t = 0 may only grow
  // from one rho to the next by the discretization floor, measured as the
  // distance to the same solve at 4x resolution in n and m.
  const auto pr = canonical_problem();
  const std::size_t n = 256, m = 512;
  const auto coarse = canonical_inputs(pr, n, m, 256.0);
  const auto fine = canonical_inputs(pr, 4 * n, 4 * m, 256.0);
  std::vector<double> err, floor;
  for (double rho : {2.0, 4.0, 8.0, 16.0}) {
    const auto rp = RegParams::coupled(3.0, 4.0, rho, 256.0, 2.0, 1.0, 2.0);
    const auto a = backward_solve_regularized(coarse.h, coarse.g, coarse.a, rp, coarse.grid, coarse.tg);
    const auto b = backward_solve_regularized(fine.h, fine.g, fine.a, rp, fine.grid, fine.tg);
    err.push_back(error_at(0.0, a, pr));
    // Coarse midpoint k sits between fine samples 4k + 1 and 4k + 2.
    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) {
      d[k] = a.at_node(0)[k] - 0.5 * (b.at_node(0)[4 * k + 1] + b.at_node(0)[4 * k + 2]);
    }
    floor.push_back(discrete_l2_norm(d));
  }
  CAPTURE(err, floor);
  CHECK(err[1] < 0.1 * err[0]);
  for (std::size_t i = 1; i < err.size(); ++i) CHECK(err[i] <= err[i - 1] + floor[i]);
}

TEST_CASE("error_at", "[solvers]") {
  const auto pr = canonical_problem();
  const SpatialGrid grid(50);
  const TimeGrid tg(10, 1.0);
  std::vector<GridFunction> exact, shifted;
  for (std::size_t j = 0; j <= 10; ++j) {
    exact.push_back(GridFunction::sample(grid, [&](double x) { return pr.uExact(x, tg.node(j)); }));
    shifted.push_back(GridFunction::sample(grid, [&](double x) { return pr.uExact(x, tg.node(j)) + 0.3; }));
  }
  const TrajectorySolution self{tg, exact, 1, 0};
  const TrajectorySolution off{tg, shifted, 1, 0};
  CHECK(error_at(0.0, self, pr) == 0.0);
  CHECK(error_at(0.55, self, pr) == 0.0);
  CHECK_THAT(error_at(0.5, off, pr), WithinRel(0.3 * std::sqrt(kPi), 1e-12));
  CHECK_THROWS_AS(error_at(1.5, self, pr), std::out_of_range);
  CHECK_THROWS_AS(error_at(-0.1, self, pr), std::out_of_range);

  SECTION("agrees with Parseval for band-limited differences") {
    NormalStream rng(4);
    SpectralCoeffs c(20);
    for (double& v : c.c) v = rng.standard_normal();
    const auto diff = synthesize(c, grid);
    std::vector<GridFunction> states(11, exact[0]);
    std::vector<double> v(50);
    for (std::size_t k = 0; k < 50; ++k) v[k] = exact[0][k] + diff[k];
    states[0] = GridFunction(grid, v);
    const TrajectorySolution sol{tg, states, 1, 0};
    CHECK_THAT(error_at(0.0, sol, pr), WithinRel(l2_norm(c), 1e-10));
  }
}
