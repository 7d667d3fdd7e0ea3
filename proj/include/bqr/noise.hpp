#pragma once

// Observation model: Gaussian errors on the terminal samples and Brownian
// perturbations of the source and diffusion-coefficient paths at each grid
// point, realized on the solver's time nodes.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bqr/random.hpp"
#include "bqr/spectral.hpp"

namespace bqr {

class TimeGrid {
 public:
  TimeGrid(std::size_t m, double final_time) : m_(m), final_time_(final_time) {
    if (m == 0) throw std::invalid_argument("TimeGrid: need at least one interval");
    if (!(final_time > 0.0) || !std::isfinite(final_time)) {
      throw std::invalid_argument("TimeGrid: final time must be positive");
    }
  }

  std::size_t intervals() const noexcept { return m_; }
  std::size_t nodes() const noexcept { return m_ + 1; }
  double final_time() const noexcept { return final_time_; }
  double step() const noexcept { return final_time_ / static_cast<double>(m_); }
  double node(std::size_t j) const noexcept {
    return j == m_ ? final_time_ : static_cast<double>(j) * step();
  }

  /// Index of the node nearest to t (ties go to the larger index).
  std::size_t nearest_node(double t) const {
    if (t < 0.0 || t > final_time_ * (1.0 + 1e-12)) {
      throw std::out_of_range("TimeGrid: time " + std::to_string(t) + " outside [0, T]");
    }
    const double r = std::floor(t / step() + 0.5);
    return std::min<std::size_t>(static_cast<std::size_t>(r), m_);
  }

 private:
  std::size_t m_;
  double final_time_;
};

/// n x (m + 1) samples: row k is grid point x_k, column j is time node t_j.
class SampledField {
 public:
  SampledField() = default;
  SampledField(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  template <class F>
  static SampledField tabulate(const SpatialGrid& grid, const TimeGrid& tg, F&& f) {
    SampledField out(grid.size(), tg.nodes());
    for (std::size_t k = 0; k < out.rows_; ++k) {
      for (std::size_t j = 0; j < out.cols_; ++j) out(k, j) = f(grid[k], tg.node(j));
    }
    return out;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t k, std::size_t j) { return data_[k * cols_ + j]; }
  double operator()(std::size_t k, std::size_t j) const { return data_[k * cols_ + j]; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t k = 0; k < rows_; ++k) out[k] = (*this)(k, j);
    return out;
  }

  void set_column(std::size_t j, std::span<const double> values) {
    if (values.size() != rows_) throw std::invalid_argument("SampledField: column length mismatch");
    for (std::size_t k = 0; k < rows_; ++k) (*this)(k, j) = values[k];
  }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const SampledField&, const SampledField&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct NoiseConfig {
  std::vector<double> sigma;  // per-point standard deviations
  double vartheta = 0.0;      // source path amplitude
  double varthetabar = 0.0;   // coefficient path amplitude
  double vmax = 1.0;
  std::uint64_t seed = 0;
  // Reuse the source Brownian family for the coefficient perturbation.
  bool shared_noise = false;

  static NoiseConfig uniform(std::size_t n, double sigma, double vartheta, double varthetabar,
                             std::uint64_t seed, double vmax = 1.0) {
    NoiseConfig cfg;
    cfg.sigma.assign(n, sigma);
    cfg.vartheta = vartheta;
    cfg.varthetabar = varthetabar;
    cfg.vmax = vmax;
    cfg.seed = seed;
    return cfg;
  }

  void validate() const {
    if (!(vmax > 0.0)) throw std::invalid_argument("NoiseConfig: vmax must be positive");
    for (double s : sigma) {
      if (!(s >= 0.0) || !(s < vmax)) {
        throw std::invalid_argument("NoiseConfig: each sigma_k must satisfy 0 <= sigma_k < vmax");
      }
    }
    if (!(vartheta >= 0.0) || !(varthetabar >= 0.0)) {
      throw std::invalid_argument("NoiseConfig: path amplitudes must be nonnegative");
    }
  }
};

/// A standard Brownian path on the time nodes; `amplitude` scales it at use.
struct BrownianPath {
  std::vector<double> w;
  double amplitude = 1.0;

  double value(std::size_t j) const { return amplitude * w[j]; }
};

/// (sigma_1 eps_1, ..., sigma_n eps_n) with eps_k i.i.d. N(0, 1).
inline std::vector<double> sample_gaussian_errors(std::size_t n, const NoiseConfig& cfg) {
  if (cfg.sigma.size() != n) {
    throw std::invalid_argument("sample_gaussian_errors: sigma has " +
                                std::to_string(cfg.sigma.size()) + " entries, expected " +
                                std::to_string(n));
  }
  NormalStream rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::terminal_errors)}));
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = cfg.sigma[k] * rng.standard_normal();
  return out;
}

/// `count` mutually independent paths with N(0, dt) increments; path i of a
/// family draws from its own stream (seed, family, i).
inline std::vector<BrownianPath> sample_brownian_paths(std::size_t count, const TimeGrid& tg,
                                                       double amplitude, const NoiseConfig& cfg,
                                                       Stream family = Stream::source_paths) {
  if (amplitude < 0.0) throw std::invalid_argument("sample_brownian_paths: negative amplitude");
  const double scale = std::sqrt(tg.step());
  std::vector<BrownianPath> paths(count);
  for (std::size_t i = 0; i < count; ++i) {
    NormalStream rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(family), i}));
    auto& path = paths[i];
    path.amplitude = amplitude;
    path.w.resize(tg.nodes());
    path.w[0] = 0.0;
    for (std::size_t j = 1; j < tg.nodes(); ++j) {
      path.w[j] = path.w[j - 1] + scale * rng.standard_normal();
    }
  }
  return paths;
}

struct NoisyObservations {
  GridFunction hTilde;
  SampledField gTilde;
  SampledField aTilde;
};

inline NoisyObservations observe(const GridFunction& truthH, const SampledField& truthG,
                                 const SampledField& truthA, const TimeGrid& tg,
                                 const NoiseConfig& cfg) {
  const std::size_t n = truthH.size();
  cfg.validate();
  if (truthG.rows() != n || truthA.rows() != n || truthG.cols() != tg.nodes() ||
      truthA.cols() != tg.nodes()) {
    throw std::invalid_argument("observe: truth fields must be " + std::to_string(n) + " x " +
                                std::to_string(tg.nodes()));
  }

  const auto eps = sample_gaussian_errors(n, cfg);
  std::vector<double> h(n);
  for (std::size_t k = 0; k < n; ++k) h[k] = truthH[k] + eps[k];

  const auto xi = sample_brownian_paths(n, tg, cfg.vartheta, cfg, Stream::source_paths);
  const auto xi_bar =
      cfg.shared_noise ? sample_brownian_paths(n, tg, cfg.varthetabar, cfg, Stream::source_paths)
                       : sample_brownian_paths(n, tg, cfg.varthetabar, cfg,
                                               Stream::coefficient_paths);

  SampledField g = truthG;
  SampledField a = truthA;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < tg.nodes(); ++j) {
      g(k, j) += xi[k].value(j);
      a(k, j) += xi_bar[k].value(j);
    }
  }
  if (!g.all_finite() || !a.all_finite()) {
    throw std::invalid_argument("observe: non-finite observation");
  }
  return NoisyObservations{GridFunction(truthH.grid(), std::move(h)), std::move(g), std::move(a)};
}

}  // namespace bqr
