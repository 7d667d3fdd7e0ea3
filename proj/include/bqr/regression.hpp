#pragma once

// Truncated sine-series regression estimators for the terminal data, the
// source and the diffusion coefficient, and the reference MSE order used to
// draw rate curves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bqr/noise.hpp"
#include "bqr/spectral.hpp"

namespace bqr {

/// Modes p = 1..floor(sqrt(betaN)).
class TruncationSet {
 public:
  explicit TruncationSet(double betaN) : betaN_(betaN) {
    if (!(betaN >= 1.0) || !std::isfinite(betaN)) {
      throw std::invalid_argument("TruncationSet: betaN must be >= 1 so that mode 1 is kept");
    }
    auto p = static_cast<std::size_t>(std::sqrt(betaN));
    // Guard the floor against sqrt rounding on perfect squares.
    while (static_cast<double>(p + 1) * static_cast<double>(p + 1) <= betaN) ++p;
    while (p > 0 && static_cast<double>(p) * static_cast<double>(p) > betaN) --p;
    pcut_ = p;
  }

  double betaN() const noexcept { return betaN_; }
  std::size_t pcut() const noexcept { return pcut_; }

 private:
  double betaN_;
  std::size_t pcut_;
};

/// One coefficient vector per time node, all with the same pmax.
struct TimeField {
  TimeGrid timegrid;
  std::vector<SpectralCoeffs> coeffsPerNode;

  /// Evaluate the series on `grid` at every node.
  SampledField to_samples(const SpatialGrid& grid) const {
    SampledField out(grid.size(), timegrid.nodes());
    std::vector<double> column(grid.size());
    for (std::size_t j = 0; j < coeffsPerNode.size(); ++j) {
      const auto& c = coeffsPerNode[j];
      std::fill(column.begin(), column.end(), 0.0);
      for (std::size_t p = 1; p <= c.pmax(); ++p) {
        if (c.c[p - 1] != 0.0) grid.add_mode(p, c.c[p - 1], column);
      }
      out.set_column(j, column);
    }
    return out;
  }
};

inline void check_band(std::size_t pcut, std::size_t n) {
  if (pcut + 1 > n) {
    throw std::invalid_argument("truncation keeps " + std::to_string(pcut) +
                                " modes but an " + std::to_string(n) +
                                "-point grid resolves at most " + std::to_string(n - 1) +
                                " without aliasing");
  }
}

/// Truncated-series estimate of a static function from its noisy samples.
inline SpectralCoeffs estimate_static(const GridFunction& samples, const TruncationSet& ts) {
  check_band(ts.pcut(), samples.size());
  return analyze(samples, ts.pcut());
}

/// Column-wise estimate_static of an n x (m + 1) path matrix.
inline TimeField estimate_time_field(const SampledField& paths, const TimeGrid& tg,
                                     const TruncationSet& ts) {
  if (paths.cols() != tg.nodes()) {
    throw std::invalid_argument("estimate_time_field: path matrix has " +
                                std::to_string(paths.cols()) + " columns, time grid has " +
                                std::to_string(tg.nodes()) + " nodes");
  }
  const SpatialGrid grid(paths.rows());
  check_band(ts.pcut(), grid.size());
  TimeField out{tg, {}};
  out.coeffsPerNode.reserve(tg.nodes());
  const double w = std::numbers::pi / static_cast<double>(grid.size());
  for (std::size_t j = 0; j < tg.nodes(); ++j) {
    const std::vector<double> column = paths.column(j);
    SpectralCoeffs c(ts.pcut());
    for (std::size_t p = 1; p <= ts.pcut(); ++p) c.c[p - 1] = w * grid.project(p, column);
    out.coeffsPerNode.push_back(std::move(c));
  }
  return out;
}

/// max(sqrt(betaN) n^(-4 mu0), betaN^(-mu0)).
inline double theoretical_mse_order(double n, double betaN, double mu0) {
  if (!(mu0 > 0.5)) throw std::invalid_argument("theoretical_mse_order: mu0 must exceed 1/2");
  if (!(n > 0.0) || !(betaN > 0.0)) {
    throw std::invalid_argument("theoretical_mse_order: n and betaN must be positive");
  }
  return std::max(std::sqrt(betaN) * std::pow(n, -4.0 * mu0), std::pow(betaN, -mu0));
}

/// betaN = n^(4 mu0 / (mu0 + 1/2)), where both branches of the order coincide.
inline double balanced_beta(double n, double mu0) {
  return std::pow(n, 4.0 * mu0 / (mu0 + 0.5));
}

/// Known sine coefficients of a truth function plus the energy of every mode
/// beyond the stored ones.
class TruthSeries {
 public:
  TruthSeries() = default;
  TruthSeries(std::vector<double> coeffs, double tail_beyond)
      : coeffs_(std::move(coeffs)), suffix_(coeffs_.size() + 1) {
    // suffix_[i] = sum_{p > i} c_p^2, accumulated from the small end.
    suffix_[coeffs_.size()] = tail_beyond;
    for (std::size_t p = coeffs_.size(); p > 0; --p) {
      suffix_[p - 1] = suffix_[p] + coeffs_[p - 1] * coeffs_[p - 1];
    }
  }

  std::size_t stored() const noexcept { return coeffs_.size(); }

  double coefficient(std::size_t p) const {
    return p >= 1 && p <= coeffs_.size() ? coeffs_[p - 1] : 0.0;
  }

  /// sum_{p > pcut} c_p^2.
  double tail_energy(std::size_t pcut) const {
    return suffix_.empty() ? 0.0 : suffix_[std::min(pcut, coeffs_.size())];
  }

  /// H(x) = x (pi - x): c_p = 8 / (sqrt(2 pi) p^3) for odd p, 0 for even p.
  static TruthSeries parabola(std::size_t stored = std::size_t{1} << 16) {
    std::vector<double> c(stored, 0.0);
    const double a = 8.0 / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t p = 1; p <= stored; p += 2) {
      const double pd = static_cast<double>(p);
      c[p - 1] = a / (pd * pd * pd);
    }
    // sum over odd p > P of a^2 / p^6 ~ a^2 / (10 P^5)
    const double P = static_cast<double>(stored);
    return TruthSeries(std::move(c), a * a / (10.0 * std::pow(P, 5.0)));
  }

  static TruthSeries zero() { return TruthSeries({}, 0.0); }

 private:
  std::vector<double> coeffs_;
  std::vector<double> suffix_;
};

/// ||estimate - truth||^2 in L2, measured through Parseval: in-band
/// coefficient differences plus the truth's energy outside the band.
inline double squared_error(const SpectralCoeffs& estimate, const TruthSeries& truth) {
  double s = 0.0;
  for (std::size_t p = 1; p <= estimate.pmax(); ++p) {
    const double d = estimate.c[p - 1] - truth.coefficient(p);
    s += d * d;
  }
  return s + truth.tail_energy(estimate.pmax());
}

/// Monte-Carlo mean of squared_error over the supplied trial estimates.
inline double empirical_mse(std::span<const SpectralCoeffs> estimates, const TruthSeries& truth) {
  if (estimates.empty()) throw std::invalid_argument("empirical_mse: need at least one trial");
  double s = 0.0;
  for (const auto& e : estimates) s += squared_error(e, truth);
  return s / static_cast<double>(estimates.size());
}

}  // namespace bqr
