#pragma once

// Sine basis psi_p(x) = sqrt(2/pi) sin(p x) on (0, pi), the midpoint sample
// grid x_k = pi (2k - 1) / (2n), the discrete analysis/synthesis pair and the
// weighted coefficient norms.
//
// On the midpoint grid the quadrature (pi/n) sum_k psi_p(x_k) psi_q(x_k) is
// exactly delta_pq for 1 <= p, q <= n - 1. Mode p = n has discrete norm 2 and
// modes p > n alias onto lower ones, so analysis is limited to pmax <= n.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bqr {

inline const double kBasisScale = std::sqrt(2.0 / std::numbers::pi);

/// psi_p(x) = sqrt(2/pi) sin(p x).
inline double basis_eval(std::size_t p, double x) {
  return kBasisScale * std::sin(static_cast<double>(p) * x);
}

class SpatialGrid {
 public:
  explicit SpatialGrid(std::size_t n) {
    if (n == 0) throw std::invalid_argument("SpatialGrid: n must be positive");
    auto d = std::make_shared<Data>();
    d->n = n;
    d->points.resize(n);
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      d->points[k] = std::numbers::pi * (2.0 * static_cast<double>(k) + 1.0) / (2.0 * nn);
    }
    // sin(j pi / (2n)) for j in [0, 4n): every sin(p x_k) is one of these.
    d->sine_table.resize(4 * n);
    for (std::size_t j = 0; j < 4 * n; ++j) {
      d->sine_table[j] = std::sin(std::numbers::pi * static_cast<double>(j) / (2.0 * nn));
    }
    data_ = std::move(d);
  }

  std::size_t size() const noexcept { return data_->n; }
  double spacing() const noexcept { return std::numbers::pi / static_cast<double>(data_->n); }
  std::span<const double> points() const noexcept { return data_->points; }
  double operator[](std::size_t k) const { return data_->points[k]; }

  /// psi_p at the 0-based sample k, read from the reduced-argument table.
  double basis(std::size_t p, std::size_t k) const noexcept {
    const std::size_t period = 4 * data_->n;
    return kBasisScale * data_->sine_table[(p * (2 * k + 1)) % period];
  }

  /// sum_k v[k] psi_p(x_k), walking the table index in steps of 2p.
  double project(std::size_t p, std::span<const double> v) const noexcept {
    const std::size_t period = 4 * data_->n;
    const std::size_t stride = (2 * p) % period;
    std::size_t idx = p % period;
    const double* table = data_->sine_table.data();
    double acc = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      acc += v[k] * table[idx];
      idx += stride;
      if (idx >= period) idx -= period;
    }
    return kBasisScale * acc;
  }

  /// out[k] += coeff * psi_p(x_k).
  void add_mode(std::size_t p, double coeff, std::span<double> out) const noexcept {
    const std::size_t period = 4 * data_->n;
    const std::size_t stride = (2 * p) % period;
    std::size_t idx = p % period;
    const double* table = data_->sine_table.data();
    const double scaled = kBasisScale * coeff;
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] += scaled * table[idx];
      idx += stride;
      if (idx >= period) idx -= period;
    }
  }

  friend bool operator==(const SpatialGrid& a, const SpatialGrid& b) noexcept {
    return a.size() == b.size();
  }

 private:
  struct Data {
    std::size_t n = 0;
    std::vector<double> points;
    std::vector<double> sine_table;
  };
  std::shared_ptr<const Data> data_;
};

inline SpatialGrid make_grid(std::size_t n) { return SpatialGrid(n); }

/// Real samples of a function on a SpatialGrid.
class GridFunction {
 public:
  GridFunction(SpatialGrid grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw std::invalid_argument("GridFunction: expected " + std::to_string(grid_.size()) +
                                  " samples, got " + std::to_string(values_.size()));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("GridFunction: non-finite sample");
    }
  }

  explicit GridFunction(SpatialGrid grid)
      : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

  static GridFunction sample(const SpatialGrid& grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(grid[k]);
    return GridFunction(grid, std::move(v));
  }

  const SpatialGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }

 private:
  SpatialGrid grid_;
  std::vector<double> values_;
};

/// Coefficients of psi_1 .. psi_pmax; c[p - 1] multiplies psi_p.
struct SpectralCoeffs {
  std::vector<double> c;

  SpectralCoeffs() = default;
  explicit SpectralCoeffs(std::size_t pmax) : c(pmax, 0.0) {}
  explicit SpectralCoeffs(std::vector<double> values) : c(std::move(values)) {}

  std::size_t pmax() const noexcept { return c.size(); }
  /// 1-based mode access.
  double& mode(std::size_t p) { return c.at(p - 1); }
  double mode(std::size_t p) const { return p >= 1 && p <= c.size() ? c[p - 1] : 0.0; }
};

struct SmoothnessParams {
  double gamma = 0.0;
  double bigB = 0.0;
};

/// c_p = (pi/n) sum_k f(x_k) psi_p(x_k) for p = 1..pmax.
inline SpectralCoeffs analyze(const GridFunction& f, std::size_t pmax) {
  const SpatialGrid& grid = f.grid();
  const std::size_t n = grid.size();
  if (pmax == 0) throw std::invalid_argument("analyze: pmax must be positive");
  if (pmax > n) {
    throw std::invalid_argument("analyze: pmax " + std::to_string(pmax) +
                                " exceeds the " + std::to_string(n) +
                                "-point grid's resolvable band (aliasing)");
  }
  const double w = std::numbers::pi / static_cast<double>(n);
  SpectralCoeffs out(pmax);
  const auto v = f.values();
  for (std::size_t p = 1; p <= pmax; ++p) out.c[p - 1] = w * grid.project(p, v);
  return out;
}

/// values[k] = sum_p c_p psi_p(x_k).
inline GridFunction synthesize(const SpectralCoeffs& coeffs, const SpatialGrid& grid) {
  std::vector<double> v(grid.size(), 0.0);
  for (std::size_t p = 1; p <= coeffs.pmax(); ++p) {
    const double cp = coeffs.c[p - 1];
    if (cp != 0.0) grid.add_mode(p, cp, v);
  }
  return GridFunction(grid, std::move(v));
}

/// Plain l2 norm of the coefficient vector (the L2 norm of the series).
inline double l2_norm(const SpectralCoeffs& coeffs) {
  double s = 0.0;
  for (double x : coeffs.c) s += x * x;
  return std::sqrt(s);
}

/// sqrt((pi/n) sum_k v_k^2), the midpoint-rule L2(0, pi) norm.
inline double discrete_l2_norm(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double x : values) s += x * x;
  return std::sqrt(std::numbers::pi / static_cast<double>(values.size()) * s);
}

inline double discrete_l2_norm(const GridFunction& f) { return discrete_l2_norm(f.values()); }

/// sqrt(sum_p lambda_p^(2 gamma) c_p^2) with lambda_p = p^2.
inline double sobolev_norm(const SpectralCoeffs& coeffs, double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("sobolev_norm: gamma must be nonnegative");
  double s = 0.0;
  for (std::size_t p = 1; p <= coeffs.pmax(); ++p) {
    const double cp = coeffs.c[p - 1];
    s += std::pow(static_cast<double>(p), 4.0 * gamma) * cp * cp;
  }
  return std::sqrt(s);
}

/// sqrt(sum_p p^(2 + 2 gamma) exp(2 B p^2) c_p^2), accumulated in log space.
/// Returns +infinity when the result is not representable.
inline double gevrey_norm(const SpectralCoeffs& coeffs, const SmoothnessParams& s) {
  if (s.gamma < 0.0 || s.bigB < 0.0) {
    throw std::invalid_argument("gevrey_norm: gamma and bigB must be nonnegative");
  }
  std::vector<double> logs;
  logs.reserve(coeffs.pmax());
  for (std::size_t p = 1; p <= coeffs.pmax(); ++p) {
    const double cp = coeffs.c[p - 1];
    if (cp == 0.0) continue;
    const double pd = static_cast<double>(p);
    logs.push_back((2.0 + 2.0 * s.gamma) * std::log(pd) + 2.0 * s.bigB * pd * pd +
                   2.0 * std::log(std::abs(cp)));
  }
  if (logs.empty()) return 0.0;
  const double top = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - top);
  const double half_log = 0.5 * (top + std::log(acc));
  if (half_log >= std::log(std::numeric_limits<double>::max())) {
    return std::numeric_limits<double>::infinity();
  }
  return std::exp(half_log);
}

}  // namespace bqr
