#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "bqr/checks.hpp"
#include "bqr/operators.hpp"
#include "bqr/random.hpp"

using namespace bqr;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

RegParams params(double a1, double rho, double gamma = 1.0) {
  return RegParams{0.5 * a1, a1, rho, 1.0, 1.0, rho, gamma, 1.0};
}

SpectralCoeffs random_coeffs(NormalStream& rng, std::size_t pmax) {
  SpectralCoeffs c(pmax);
  for (double& v : c.c) v = rng.standard_normal();
  return c;
}

double dot(const SpectralCoeffs& a, const SpectralCoeffs& b) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.pmax(); ++p) s += a.c[p] * b.c[p];
  return s;
}

}  // namespace

TEST_CASE("RegParams", "[operators]") {
  const auto rp = RegParams::coupled(3.0, 4.0, 5.0, 64.0, 2.0);
  CHECK(rp.kappaN == rp.rhoN);
  CHECK_NOTHROW(rp.validate());
  CHECK_THROWS_AS(RegParams::coupled(4.0, 4.0, 5.0, 64.0, 2.0).validate(), std::invalid_argument);
  auto bad = rp;
  bad.mu0 = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  CHECK(params(2.0, 1.0).band_cutoff() == 0);
  CHECK(params(2.0, 2.0).band_cutoff() == 1);
  CHECK(params(2.0, 7.99).band_cutoff() == 1);
  CHECK(params(2.0, 8.0).band_cutoff() == 2);
  CHECK(params(4.0, 64.0).band_cutoff() == 4);
  CHECK(params(1.0, 1e4).band_cutoff() == 100);
}

TEST_CASE("apply_P", "[operators]") {
  const auto out = apply_P(SpectralCoeffs(std::vector<double>{1, 0, 0}), params(2.0, 1.0));
  CHECK(out.c == std::vector<double>{-2, 0, 0});
  const auto z = apply_P(SpectralCoeffs(5), params(2.0, 1.0));
  for (double v : z.c) CHECK(v == 0.0);

  NormalStream rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto c = random_coeffs(rng, 40);
    CHECK(dot(apply_P(c, params(3.0, 1.0)), c) <= 0.0);
  }
}

TEST_CASE("apply_P_trunc", "[operators]") {
  SECTION("rho below a1 empties the band") {
    NormalStream rng(2);
    const auto out = apply_P_trunc(random_coeffs(rng, 10), params(2.0, 1.5));
    for (double v : out.c) CHECK(v == 0.0);
  }
  SECTION("agrees with P inside the band and vanishes outside") {
    NormalStream rng(3);
    const auto c = random_coeffs(rng, 20);
    const auto rp = params(2.0, 50.0);  // band = 5
    const auto full = apply_P(c, rp);
    const auto trunc = apply_P_trunc(c, rp);
    for (std::size_t p = 1; p <= 20; ++p) {
      CHECK(trunc.mode(p) == (p <= 5 ? full.mode(p) : 0.0));
    }
  }
  SECTION("commutes with band projection") {
    NormalStream rng(4);
    for (double rho : {1.0, 4.0, 16.0, 64.0, 300.0}) {
      const auto rp = params(2.0, rho);
      const auto c = random_coeffs(rng, 30);
      const auto a = apply_P_trunc(c, rp);
      const auto b = apply_P(band_project(c, rp.band_cutoff()), rp);
      const auto d = band_project(apply_P(c, rp), rp.band_cutoff());
      CHECK(a.c == b.c);
      CHECK(a.c == d.c);
    }
  }
  SECTION("norm bound on 1000 random vectors") {
    const auto r = checks::estimate_p1();
    INFO(r.detail);
    CHECK(r.passed);
  }
  SECTION("tail bound for c_p = e^{-T a1 p^2}") {
    const double a1 = 2.0, T = 1.0;
    SpectralCoeffs c(64);
    for (std::size_t p = 1; p <= 64; ++p) c.c[p - 1] = std::exp(-T * a1 * double(p) * p);
    for (double gamma : {0.0, 1.0, 2.0}) {
      for (double rho : {1.0, 4.0, 16.0, 64.0}) {
        const auto rp = params(a1, rho, gamma);
        const auto full = apply_P(c, rp);
        const auto trunc = apply_P_trunc(c, rp);
        double diff = 0.0;
        for (std::size_t p = 0; p < 64; ++p) diff += (full.c[p] - trunc.c[p]) * (full.c[p] - trunc.c[p]);
        const double rhs = a1 * std::pow(rho, -gamma) * std::exp(-T * rho) *
                           gevrey_norm(c, SmoothnessParams{gamma, T * a1});
        INFO("gamma = " << gamma << ", rho = " << rho);
        CHECK(std::sqrt(diff) <= rhs);
      }
    }
    const auto r = checks::estimate_p2();
    INFO(r.detail);
    CHECK(r.passed);
  }
}

TEST_CASE("cutoff_F", "[operators]") {
  for (auto mode : {CutoffMode::clamped, CutoffMode::paper_literal}) {
    CHECK(cutoff_F(2, 3, 10, mode) == 6.0);
    CHECK(cutoff_F(-1.5, 0.5, 2, mode) == -0.75);
  }
  CHECK(cutoff_F(20, 1, 10, CutoffMode::paper_literal) == 100.0);
  CHECK(cutoff_F(20, 1, 10, CutoffMode::clamped) == 10.0);
  CHECK(cutoff_F(-20, -30, 10, CutoffMode::paper_literal) == 100.0);
  CHECK(cutoff_F(-20, -30, 10, CutoffMode::clamped) == 100.0);
  CHECK(cutoff_F(-20, 30, 10, CutoffMode::clamped) == -100.0);
  CHECK_THROWS_AS(cutoff_F(1, 1, 0), std::invalid_argument);

  SECTION("modes agree when |v|, |vhat| <= qhat") {
    NormalStream rng(6);
    for (int i = 0; i < 10000; ++i) {
      const double q = 0.1 + 10 * rng.uniform_open0();
      const double v = checks::uniform(rng, -q, q), vh = checks::uniform(rng, -q, q);
      CHECK(cutoff_F(v, vh, q, CutoffMode::clamped) == v * vh);
      CHECK(cutoff_F(v, vh, q, CutoffMode::paper_literal) == v * vh);
    }
  }
}

TEST_CASE("Lipschitz property of the cutoff", "[operators]") {
  SECTION("region classification") {
    using checks::Region;
    CHECK(checks::region_of(1, 2, 3) == Region::inside);
    CHECK(checks::region_of(-5, 2, 3) == Region::inside);
    CHECK(checks::region_of(-5, 4, 3) == Region::above);
    CHECK(checks::region_of(-5, -4, 3) == Region::below);
    NormalStream rng(8);
    for (auto r : {Region::inside, Region::above, Region::below}) {
      for (int i = 0; i < 1000; ++i) {
        const auto pr = checks::draw_pair(rng, r, 2.0, 4.0);
        CHECK(checks::region_of(pr[0], pr[1], 2.0) == r);
      }
    }
  }
  SECTION("1e5 quadruples and the paper_literal witness") {
    for (const auto& r : checks::lipschitz_suite()) {
      INFO(r.name << ": " << r.detail);
      CHECK(r.passed);
    }
  }
  SECTION("witness values") {
    const double q = 10.0;
    const double lhs = std::abs(cutoff_F(-1e6, q, q, CutoffMode::paper_literal) -
                                cutoff_F(-1e6, q - 1, q, CutoffMode::paper_literal));
    CHECK_THAT(lhs, WithinRel(1e6, 1e-15));   // 1e7 - 9e6
    CHECK(lhs > q * 1.0);
    // The clamped form on the same pair stays inside the bound.
    const double clamped = std::abs(cutoff_F(-1e6, q, q) - cutoff_F(-1e6, q - 1, q));
    CHECK(clamped <= q * 1.0);
  }
}

TEST_CASE("variable_diffusion", "[operators]") {
  SECTION("second-order convergence on sin x with a = 1") {
    std::vector<double> errs;
    for (std::size_t n : {64u, 128u, 256u}) {
      const SpatialGrid g(n);
      const auto u = GridFunction::sample(g, [](double x) { return std::sin(x); });
      const auto out = variable_diffusion(u, GridFunction(g, std::vector<double>(n, 1.0)), g);
      double e = 0.0;
      for (std::size_t k = 0; k < n; ++k) e = std::max(e, std::abs(out[k] + std::sin(g[k])));
      errs.push_back(e);
    }
    for (std::size_t i = 1; i < errs.size(); ++i) CHECK(std::log2(errs[i - 1] / errs[i]) >= 1.9);
  }
  SECTION("variable coefficient: interior truncation and solve are second order") {
    // a = 2 + cos x, u = sin 2x: (a u_x)_x = -sin x * 2 cos 2x - (2 + cos x) 4 sin 2x.
    // The extrapolated edge coefficient leaves an O(h) residual in the two
    // boundary rows only; the discrete solve stays second order.
    std::vector<double> interior, edge, solved;
    for (std::size_t n : {64u, 128u, 256u}) {
      const SpatialGrid g(n);
      const auto u = GridFunction::sample(g, [](double x) { return std::sin(2 * x); });
      const auto a = GridFunction::sample(g, [](double x) { return 2 + std::cos(x); });
      const auto out = variable_diffusion(u, a, g);
      std::vector<double> exact(n);
      double ei = 0.0, ee = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double x = g[k];
        exact[k] = -std::sin(x) * 2 * std::cos(2 * x) - (2 + std::cos(x)) * 4 * std::sin(2 * x);
        const double d = std::abs(out[k] - exact[k]);
        if (k == 0 || k + 1 == n) ee = std::max(ee, d); else ei = std::max(ei, d);
      }
      const auto v = solve_tridiagonal(diffusion_stencil(a.values(), g.spacing()), exact);
      double es = 0.0;
      for (std::size_t k = 0; k < n; ++k) es = std::max(es, std::abs(v[k] - u[k]));
      interior.push_back(ei);
      edge.push_back(ee);
      solved.push_back(es);
    }
    for (std::size_t i = 1; i < interior.size(); ++i) {
      CHECK(std::log2(interior[i - 1] / interior[i]) >= 1.9);
      CHECK(std::log2(edge[i - 1] / edge[i]) >= 0.9);
      CHECK(std::log2(solved[i - 1] / solved[i]) >= 1.9);
    }
  }
  SECTION("zero input and linearity in a") {
    const SpatialGrid g(32);
    const auto a1 = GridFunction(g, std::vector<double>(32, 1.0));
    const auto a3 = GridFunction(g, std::vector<double>(32, 3.0));
    const auto z = variable_diffusion(GridFunction(g), a1, g);
    for (std::size_t k = 0; k < 32; ++k) CHECK(z[k] == 0.0);
    const auto u = GridFunction::sample(g, [](double x) { return x * (std::numbers::pi - x) * std::exp(x); });
    const auto o1 = variable_diffusion(u, a1, g);
    const auto o3 = variable_diffusion(u, a3, g);
    for (std::size_t k = 0; k < 32; ++k) CHECK_THAT(o3[k], WithinAbs(3.0 * o1[k], 1e-12 * std::abs(o1[k]) + 1e-12));
  }
  SECTION("stencil is symmetric negative definite") {
    const SpatialGrid g(20);
    std::vector<double> a(20);
    for (std::size_t k = 0; k < 20; ++k) a[k] = 1.0 + 0.5 * std::sin(3.0 * g[k]);
    const auto m = diffusion_stencil(a, g.spacing());
    for (std::size_t k = 0; k + 1 < 20; ++k) CHECK(m.upper[k] == m.lower[k + 1]);
    NormalStream rng(10);
    std::vector<double> v(20), mv(20);
    for (double& x : v) x = rng.standard_normal();
    m.multiply(v, mv);
    double q = 0.0;
    for (std::size_t k = 0; k < 20; ++k) q += v[k] * mv[k];
    CHECK(q < 0.0);
  }
  SECTION("non-elliptic coefficients are rejected") {
    const SpatialGrid g(8);
    std::vector<double> a(8, 1.0);
    a[3] = 0.0;
    CHECK_THROWS_AS(variable_diffusion(GridFunction(g), GridFunction(g, a), g), std::invalid_argument);
    CHECK_THROWS_AS(variable_diffusion(GridFunction(g), GridFunction(g, std::vector<double>(8, 0.5)), g, 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("centered_gradient", "[operators]") {
  std::vector<double> errs;
  for (std::size_t n : {64u, 128u, 256u}) {
    const SpatialGrid g(n);
    std::vector<double> u(n), du(n);
    for (std::size_t k = 0; k < n; ++k) u[k] = std::sin(g[k]);
    centered_gradient(u, g.spacing(), du);
    double e = 0.0;
    for (std::size_t k = 0; k < n; ++k) e = std::max(e, std::abs(du[k] - std::cos(g[k])));
    errs.push_back(e);
  }
  for (std::size_t i = 1; i < errs.size(); ++i) CHECK(std::log2(errs[i - 1] / errs[i]) >= 1.9);
}
