#pragma once

// Forward solver for manufactured problems and the regularized terminal-value
// solver.
//
// The regularized problem is integrated in reversed time tau = T - t:
//
//   dU/dtau = (Bbar U_x)_x - P_rho U - F(U, U_x) - Ghat(T - tau),
//   Bbar = A1 - Ahat >= A1 - A0 > 0,   U(tau = 0) = Hhat,
//
// which is parabolic. The diffusion term is implicit (one tridiagonal solve
// per step, coefficient frozen over the step); the truncated operator, the
// clamped nonlinearity and the source are explicit. P_rho has norm at most
// rho, so the explicit part is sub-stepped until dtau * rho <= c_stab.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bqr/manufactured.hpp"
#include "bqr/noise.hpp"
#include "bqr/operators.hpp"
#include "bqr/regression.hpp"
#include "bqr/spectral.hpp"
#include "bqr/tridiagonal.hpp"

namespace bqr {

enum class TimeScheme {
  backward_euler,  // implicit Euler + explicit Euler, first order, L-stable
  crank_nicolson,  // trapezoidal + Heun predictor-corrector, second order
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

struct TrajectorySolution {
  TimeGrid timegrid;
  std::vector<GridFunction> states;  // states[j] approximates U(., t_j)
  std::size_t substeps = 1;          // explicit sub-steps per time interval
  std::size_t clipped_samples = 0;   // coefficient samples clipped to a0

  const GridFunction& at_node(std::size_t j) const { return states.at(j); }
};

namespace detail {

struct ImexWorkspace {
  Tridiagonal system;
  std::vector<double> lu, n0, n1, rhs, predicted, scratch;

  void resize(std::size_t n) {
    lu.resize(n);
    n0.resize(n);
    n1.resize(n);
    rhs.resize(n);
    predicted.resize(n);
    system = Tridiagonal(n);
  }
};

/// system = I - theta * dt * L
inline void shifted_identity(const Tridiagonal& L, double theta_dt, Tridiagonal& out) {
  const std::size_t n = L.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.lower[i] = -theta_dt * L.lower[i];
    out.diag[i] = 1.0 - theta_dt * L.diag[i];
    out.upper[i] = -theta_dt * L.upper[i];
  }
}

/// One IMEX step of du/ds = L u + N(s, u). `explicit_rhs(which, u, out)`
/// evaluates N at the step start (which = 0) or end (which = 1).
template <class Explicit>
void imex_step(TimeScheme scheme, const Tridiagonal& L, double dt, std::vector<double>& u,
               Explicit&& explicit_rhs, ImexWorkspace& ws) {
  const std::size_t n = u.size();
  if (ws.rhs.size() != n) ws.resize(n);
  explicit_rhs(0, std::span<const double>(u), std::span<double>(ws.n0));
  if (scheme == TimeScheme::backward_euler) {
    shifted_identity(L, dt, ws.system);
    for (std::size_t i = 0; i < n; ++i) ws.rhs[i] = u[i] + dt * ws.n0[i];
    solve_tridiagonal(ws.system, ws.rhs, u, ws.scratch);
    return;
  }
  shifted_identity(L, 0.5 * dt, ws.system);
  L.multiply(u, ws.lu);
  for (std::size_t i = 0; i < n; ++i) ws.rhs[i] = u[i] + 0.5 * dt * ws.lu[i] + dt * ws.n0[i];
  solve_tridiagonal(ws.system, ws.rhs, ws.predicted, ws.scratch);
  explicit_rhs(1, std::span<const double>(ws.predicted), std::span<double>(ws.n1));
  for (std::size_t i = 0; i < n; ++i) {
    ws.rhs[i] = u[i] + 0.5 * dt * ws.lu[i] + 0.5 * dt * (ws.n0[i] + ws.n1[i]);
  }
  solve_tridiagonal(ws.system, ws.rhs, u, ws.scratch);
}

inline void require_finite(std::span<const double> u, double time, const char* who) {
  for (double v : u) {
    if (!std::isfinite(v)) {
      throw SolverError(std::string(who) + ": non-finite state at time " + std::to_string(time),
                        time);
    }
  }
}

}  // namespace detail

struct ForwardOptions {
  TimeScheme scheme = TimeScheme::backward_euler;
  double growth_limit = 1e6;  // abort when ||U|| exceeds growth_limit * (1 + ||U0||)
  double cfl = 1.0;           // dt * max|U| / h bound for the explicit advection
};

/// Integrates the manufactured problem forward from u(., 0).
inline TrajectorySolution forward_solve(const ManufacturedProblem& problem, const SpatialGrid& grid,
                                        const TimeGrid& tg, const ForwardOptions& opts = {}) {
  if (std::abs(tg.final_time() - problem.T) > 1e-12 * problem.T) {
    throw std::invalid_argument("forward_solve: time grid does not end at the problem's T");
  }
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  std::vector<double> u(n);
  for (std::size_t k = 0; k < n; ++k) u[k] = problem.uExact(grid[k], 0.0);
  const double limit = opts.growth_limit * (1.0 + discrete_l2_norm(u));

  TrajectorySolution sol{tg, {}, 1, 0};
  sol.states.reserve(tg.nodes());
  sol.states.emplace_back(grid, u);

  detail::ImexWorkspace ws;
  std::vector<double> a(n), grad(n);
  for (std::size_t j = 0; j + 1 < tg.nodes(); ++j) {
    const double t0 = tg.node(j);
    const double dt_node = tg.node(j + 1) - t0;
    double umax = 0.0;
    for (double v : u) umax = std::max(umax, std::abs(v));
    const auto sub = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(dt_node * umax / (h * opts.cfl))));
    sol.substeps = std::max(sol.substeps, sub);
    const double dt = dt_node / static_cast<double>(sub);
    for (std::size_t q = 0; q < sub; ++q) {
      const double ts = t0 + static_cast<double>(q) * dt;
      const double tm = ts + 0.5 * dt;
      for (std::size_t k = 0; k < n; ++k) a[k] = problem.aExact(grid[k], tm);
      const Tridiagonal L = diffusion_stencil(a, h);
      auto rhs = [&](int which, std::span<const double> state, std::span<double> out) {
        const double t = which == 0 ? ts : ts + dt;
        if (problem.nonlinear) centered_gradient(state, h, grad);
        for (std::size_t k = 0; k < n; ++k) {
          double v = problem.gDerived(grid[k], t);
          if (problem.nonlinear) v += state[k] * grad[k];
          out[k] = v;
        }
      };
      detail::imex_step(opts.scheme, L, dt, u, rhs, ws);
      detail::require_finite(u, ts + dt, "forward_solve");
      if (discrete_l2_norm(u) > limit) {
        throw SolverError("forward_solve: norm growth beyond limit at t = " +
                              std::to_string(ts + dt),
                          ts + dt);
      }
    }
    sol.states.emplace_back(grid, u);
  }
  return sol;
}

struct BackwardOptions {
  TimeScheme scheme = TimeScheme::backward_euler;
  CutoffMode cutoff = CutoffMode::clamped;
  bool nonlinear = true;  // false drops F entirely (linear test problems)
  double c_stab = 0.5;    // bound on dtau * rho for the explicit part
  std::function<void(const std::string&)> warn;  // receives the clipping summary
};

/// Regularized terminal-value solve with all inputs sampled on the grid:
/// hHat at t = T, gHat and aHat at every time node.
inline TrajectorySolution backward_solve_regularized(const GridFunction& hHat,
                                                     const SampledField& gHat,
                                                     const SampledField& aHat, const RegParams& rp,
                                                     const SpatialGrid& grid, const TimeGrid& tg,
                                                     const BackwardOptions& opts = {}) {
  rp.validate();
  const std::size_t n = grid.size();
  if (hHat.size() != n || gHat.rows() != n || aHat.rows() != n || gHat.cols() != tg.nodes() ||
      aHat.cols() != tg.nodes()) {
    throw std::invalid_argument("backward_solve_regularized: input shapes do not match the grids");
  }
  if (!(opts.c_stab > 0.0)) throw std::invalid_argument("backward_solve_regularized: c_stab <= 0");
  const std::size_t band = rp.band_cutoff();
  if (band + 1 > n) {
    throw std::invalid_argument("backward_solve_regularized: rho band of " +
                                std::to_string(band) + " modes exceeds the grid");
  }
  const double h = grid.spacing();
  const double T = tg.final_time();
  const std::size_t m = tg.intervals();
  const double dtau_node = tg.step();
  const auto sub = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(dtau_node * rp.rhoN / opts.c_stab - 1e-12)));
  const double dtau = dtau_node / static_cast<double>(sub);

  // Bbar = a1 - min(Ahat, a0) at every node, computed once.
  SampledField bbar(n, tg.nodes());
  std::size_t clipped = 0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < tg.nodes(); ++j) {
      double av = aHat(k, j);
      if (!std::isfinite(av)) throw std::invalid_argument("backward_solve_regularized: non-finite Ahat");
      if (av > rp.a0) {
        av = rp.a0;
        ++clipped;
      }
      bbar(k, j) = rp.a1 - av;
    }
  }
  if (clipped > 0 && opts.warn) {
    opts.warn("Ahat exceeded a0 = " + std::to_string(rp.a0) + " at " + std::to_string(clipped) +
              " samples; clipped");
  }

  std::vector<double> u(hHat.values().begin(), hHat.values().end());
  std::vector<GridFunction> reversed;
  reversed.reserve(tg.nodes());
  reversed.emplace_back(grid, u);

  detail::ImexWorkspace ws;
  std::vector<double> column(n), grad(n), coeffs(band);
  const double w = std::numbers::pi / static_cast<double>(n);
  const double s = static_cast<double>(sub);

  // Sub-step q of the interval from node j down to node j - 1 spans the
  // positions j - q/sub .. j - (q+1)/sub in node units; piecewise-constant
  // inputs come from the nearest node, ties resolved toward node j.
  auto nearest = [&](std::size_t j, double offset) { return offset > 0.5 ? j - 1 : j; };

  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t j = m - r;
    for (std::size_t q = 0; q < sub; ++q) {
      const double qd = static_cast<double>(q);
      const std::size_t implicit_node = nearest(j, (qd + 0.5) / s);
      const std::size_t start_node = nearest(j, qd / s);
      const std::size_t end_node = nearest(j, (qd + 1.0) / s);
      for (std::size_t k = 0; k < n; ++k) column[k] = bbar(k, implicit_node);
      const Tridiagonal L = diffusion_stencil(column, h);

      auto rhs = [&](int which, std::span<const double> state, std::span<double> out) {
        const std::size_t node = which == 0 ? start_node : end_node;
        for (std::size_t k = 0; k < n; ++k) out[k] = -gHat(k, node);
        // -P_rho U = +a1 sum_{p <= band} p^2 <U, psi_p> psi_p
        for (std::size_t p = 1; p <= band; ++p) {
          const double pd = static_cast<double>(p);
          coeffs[p - 1] = rp.a1 * pd * pd * w * grid.project(p, state);
        }
        for (std::size_t p = 1; p <= band; ++p) grid.add_mode(p, coeffs[p - 1], out);
        if (opts.nonlinear) {
          centered_gradient(state, h, grad);
          for (std::size_t k = 0; k < n; ++k) {
            out[k] -= cutoff_F(state[k], grad[k], rp.qhatN, opts.cutoff);
          }
        }
      };
      detail::imex_step(opts.scheme, L, dtau, u, rhs, ws);
      const double tau = static_cast<double>(r) * dtau_node + (qd + 1.0) * dtau;
      detail::require_finite(u, T - tau, "backward_solve_regularized");
    }
    reversed.emplace_back(grid, u);
  }

  TrajectorySolution sol{tg, {}, sub, clipped};
  sol.states.assign(std::make_move_iterator(reversed.rbegin()),
                    std::make_move_iterator(reversed.rend()));
  return sol;
}

/// Spectral-input form: the estimators' series are evaluated on the grid.
inline TrajectorySolution backward_solve_regularized(const SpectralCoeffs& hHat,
                                                     const TimeField& gHat, const TimeField& aHat,
                                                     const RegParams& rp, const SpatialGrid& grid,
                                                     const TimeGrid& tg,
                                                     const BackwardOptions& opts = {}) {
  if (gHat.coeffsPerNode.size() != tg.nodes() || aHat.coeffsPerNode.size() != tg.nodes()) {
    throw std::invalid_argument("backward_solve_regularized: time fields do not match the time grid");
  }
  return backward_solve_regularized(synthesize(hHat, grid), gHat.to_samples(grid),
                                    aHat.to_samples(grid), rp, grid, tg, opts);
}

/// Discrete L2 distance between the snapshot at the node nearest t and the
/// exact solution at that node.
inline double error_at(double t, const TrajectorySolution& sol, const ManufacturedProblem& truth) {
  const TimeGrid& tg = sol.timegrid;
  if (!(t >= 0.0) || t > tg.final_time() * (1.0 + 1e-12)) {
    throw std::out_of_range("error_at: t = " + std::to_string(t) + " outside [0, T]");
  }
  const std::size_t j = tg.nearest_node(t);
  const GridFunction& state = sol.states.at(j);
  const SpatialGrid& grid = state.grid();
  const double tj = tg.node(j);
  std::vector<double> diff(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) diff[k] = state[k] - truth.uExact(grid[k], tj);
  return discrete_l2_norm(diff);
}

}  // namespace bqr
