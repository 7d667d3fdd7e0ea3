// Reconstruct u(., 0) of the canonical manufactured problem from one set of
// noisy observations at n = 256 and print a few samples next to the truth.

#include <cstdio>

#include "bqr/experiment.hpp"

int main() {
  using namespace bqr;
  const std::size_t n = 256;
  ExperimentConfig cfg;
  cfg.seed = 7;

  const ManufacturedProblem problem = cfg.make_problem();
  const TrialInputs in = prepare_trial(cfg, problem, n, 0);
  const TruncationSet ts(in.params.betaN);
  const SpectralCoeffs hHat = estimate_static(in.observations.hTilde, ts);
  const TimeField gHat = estimate_time_field(in.observations.gTilde, in.timegrid, ts);
  const TimeField aHat = estimate_time_field(in.observations.aTilde, in.timegrid, ts);

  BackwardOptions opts;
  opts.warn = [](const std::string& msg) { std::fprintf(stderr, "warning: %s\n", msg.c_str()); };
  const TrajectorySolution sol =
      backward_solve_regularized(hHat, gHat, aHat, in.params, in.grid, in.timegrid, opts);

  std::printf("beta_n = %g, rho_n = %g, qhat_n = %g\n", in.params.betaN, in.params.rhoN,
              in.params.qhatN);
  std::printf("%10s %12s %12s\n", "x", "U(x,0)", "u(x,0)");
  const GridFunction& u0 = sol.at_node(0);
  for (std::size_t k = 0; k < n; k += n / 8) {
    std::printf("%10.5f %12.6f %12.6f\n", in.grid[k], u0[k], problem.uExact(in.grid[k], 0.0));
  }
  std::printf("L2 error at t = 0: %.4e\n", error_at(0.0, sol, problem));
  std::printf("L2 error at t = T/2: %.4e\n", error_at(0.5 * cfg.final_time, sol, problem));
}
