#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace bqr {

/// Tridiagonal matrix stored by diagonals; lower[0] and upper[n-1] unused.
struct Tridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

  std::size_t size() const noexcept { return diag.size(); }

  void multiply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += lower[i] * x[i - 1];
      if (i + 1 < n) s += upper[i] * x[i + 1];
      y[i] = s;
    }
  }
};

/// Thomas algorithm without pivoting; the systems built here are strictly
/// diagonally dominant. `scratch` is resized as needed.
inline void solve_tridiagonal(const Tridiagonal& m, std::span<const double> rhs, std::span<double> x,
                              std::vector<double>& scratch) {
  const std::size_t n = m.size();
  if (rhs.size() != n || x.size() != n) throw std::invalid_argument("solve_tridiagonal: size mismatch");
  if (n == 0) return;
  scratch.resize(n);
  double beta = m.diag[0];
  if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
  x[0] = rhs[0] / beta;
  for (std::size_t i = 1; i < n; ++i) {
    scratch[i] = m.upper[i - 1] / beta;
    beta = m.diag[i] - m.lower[i] * scratch[i];
    if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
    x[i] = (rhs[i] - m.lower[i] * x[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i + 1] * x[i + 1];
}

inline std::vector<double> solve_tridiagonal(const Tridiagonal& m, std::span<const double> rhs) {
  std::vector<double> x(rhs.size());
  std::vector<double> scratch;
  solve_tridiagonal(m, rhs, x, scratch);
  return x;
}

}  // namespace bqr
