// Truncated sine-series estimate of H(x) = x (pi - x) from noisy samples.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "bqr/noise.hpp"
#include "bqr/regression.hpp"

int main() {
  using namespace bqr;
  const TruthSeries truth = TruthSeries::parabola();
  std::printf("%6s %6s %14s %14s\n", "n", "pcut", "sq_error", "noise_term");
  for (std::size_t n : {64, 256, 1024, 4096}) {
    const SpatialGrid grid(n);
    const NoiseConfig noise = NoiseConfig::uniform(n, 0.01, 0.0, 0.0, 2024);
    const std::vector<double> eps = sample_gaussian_errors(n, noise);
    std::vector<double> h(n);
    for (std::size_t k = 0; k < n; ++k) h[k] = grid[k] * (std::numbers::pi - grid[k]) + eps[k];

    const TruncationSet ts(static_cast<double>(n));
    const SpectralCoeffs hHat = estimate_static(GridFunction(grid, h), ts);
    std::printf("%6zu %6zu %14.6e %14.6e\n", n, ts.pcut(), squared_error(hHat, truth),
                static_cast<double>(ts.pcut()) * 1e-4 * std::numbers::pi / static_cast<double>(n));
  }
}
