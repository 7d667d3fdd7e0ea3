#pragma once

// Manufactured solutions of u_t - (A u_x)_x = u u_x + G on (0, pi) x (0, T)
// with homogeneous Dirichlet data: pick u and A in closed form and derive G
// so the equation holds exactly.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bqr {

using Field2 = std::function<double(double x, double t)>;

/// A closed-form u with its partial derivatives.
struct SolutionSpec {
  Field2 value;
  Field2 dx;
  Field2 dxx;
  Field2 dt;
};

/// A closed-form diffusion coefficient with its x-derivative.
struct CoefficientSpec {
  Field2 value;
  Field2 dx;
};

struct ManufacturedProblem {
  SolutionSpec u;
  CoefficientSpec a;
  double T = 1.0;
  double a0 = 1.0;         // declared upper bound on A
  bool nonlinear = true;   // include u u_x in the equation

  double uExact(double x, double t) const { return u.value(x, t); }
  double aExact(double x, double t) const { return a.value(x, t); }

  /// G = u_t - (A u_x)_x - u u_x.
  double gDerived(double x, double t) const {
    double g = u.dt(x, t) - a.dx(x, t) * u.dx(x, t) - a.value(x, t) * u.dxx(x, t);
    if (nonlinear) g -= u.value(x, t) * u.dx(x, t);
    return g;
  }

  double hDerived(double x) const { return u.value(x, T); }
};

/// Builds the problem after checking the boundary condition, the positivity
/// of A and the declared bound a0 on a sampling lattice.
inline ManufacturedProblem manufacture(SolutionSpec u, CoefficientSpec a, double T, double a0,
                                       bool nonlinear = true) {
  if (!(T > 0.0)) throw std::invalid_argument("manufacture: T must be positive");
  constexpr int kTimes = 33;
  constexpr int kPoints = 257;
  for (int j = 0; j < kTimes; ++j) {
    const double t = T * j / (kTimes - 1);
    for (double xb : {0.0, std::numbers::pi}) {
      const double ub = u.value(xb, t);
      if (std::abs(ub) > 1e-12) {
        throw std::invalid_argument("manufacture: u(" + std::to_string(xb) + ", " +
                                    std::to_string(t) + ") = " + std::to_string(ub) +
                                    " violates the Dirichlet condition");
      }
    }
    for (int k = 0; k <= kPoints; ++k) {
      const double x = std::numbers::pi * k / kPoints;
      const double av = a.value(x, t);
      if (!(av > 0.0) || av > a0 * (1.0 + 1e-12)) {
        throw std::invalid_argument("manufacture: A(" + std::to_string(x) + ", " +
                                    std::to_string(t) + ") = " + std::to_string(av) +
                                    " is outside (0, a0]");
      }
    }
  }
  return ManufacturedProblem{std::move(u), std::move(a), T, a0, nonlinear};
}

namespace solutions {

/// u = exp(-t) sin x.
inline SolutionSpec decaying_sine() {
  return SolutionSpec{
      [](double x, double t) { return std::exp(-t) * std::sin(x); },
      [](double x, double t) { return std::exp(-t) * std::cos(x); },
      [](double x, double t) { return -std::exp(-t) * std::sin(x); },
      [](double x, double t) { return -std::exp(-t) * std::sin(x); },
  };
}

inline SolutionSpec zero() {
  auto z = [](double, double) { return 0.0; };
  return SolutionSpec{z, z, z, z};
}

}  // namespace solutions

namespace coefficients {

inline CoefficientSpec constant(double c) {
  return CoefficientSpec{[c](double, double) { return c; }, [](double, double) { return 0.0; }};
}

/// A = 2 + sin x cos t, bounded by 3.
inline CoefficientSpec oscillating() {
  return CoefficientSpec{
      [](double x, double t) { return 2.0 + std::sin(x) * std::cos(t); },
      [](double x, double t) { return std::cos(x) * std::cos(t); },
  };
}

}  // namespace coefficients

/// u = exp(-t) sin x, A = 2 + sin x cos t, A0 = 3.
inline ManufacturedProblem canonical_problem(double T = 1.0) {
  return manufacture(solutions::decaying_sine(), coefficients::oscillating(), T, 3.0);
}

}  // namespace bqr
