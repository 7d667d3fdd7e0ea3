#pragma once

// Stabilizing operator P = A1 * Laplacian, its band truncation, the clamped
// Burgers nonlinearity and the conservative variable-coefficient diffusion
// stencil.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bqr/spectral.hpp"
#include "bqr/tridiagonal.hpp"

namespace bqr {

struct RegParams {
  double a0 = 1.0;      // bound on A and its estimate
  double a1 = 2.0;      // shift constant, a1 > a0
  double rhoN = 1.0;    // spectral cutoff parameter
  double betaN = 1.0;   // regression truncation
  double qhatN = 1.0;   // nonlinearity clamp
  double kappaN = 1.0;  // weight rate, normally equal to rhoN
  double gamma = 1.0;
  double mu0 = 1.0;

  /// Parameters with kappaN tied to rhoN.
  static RegParams coupled(double a0, double a1, double rhoN, double betaN, double qhatN,
                           double gamma = 1.0, double mu0 = 1.0) {
    return RegParams{a0, a1, rhoN, betaN, qhatN, rhoN, gamma, mu0};
  }

  void validate() const {
    if (!(a0 > 0.0)) throw std::invalid_argument("RegParams: a0 must be positive");
    if (!(a1 > a0)) throw std::invalid_argument("RegParams: a1 must exceed a0");
    if (!(rhoN > 0.0) || !(betaN > 0.0) || !(qhatN > 0.0) || !(kappaN > 0.0)) {
      throw std::invalid_argument("RegParams: rhoN, betaN, qhatN and kappaN must be positive");
    }
    if (!(gamma >= 0.0)) throw std::invalid_argument("RegParams: gamma must be nonnegative");
    if (!(mu0 > 0.5)) throw std::invalid_argument("RegParams: mu0 must exceed 1/2");
  }

  /// Largest p with a1 p^2 <= rhoN (0 when rhoN < a1).
  std::size_t band_cutoff() const {
    std::size_t p = 0;
    while (a1 * static_cast<double>(p + 1) * static_cast<double>(p + 1) <= rhoN) ++p;
    return p;
  }
};

enum class CutoffMode { clamped, paper_literal };

/// (P c)_p = -a1 p^2 c_p.
inline SpectralCoeffs apply_P(const SpectralCoeffs& c, const RegParams& rp) {
  SpectralCoeffs out(c.pmax());
  for (std::size_t p = 1; p <= c.pmax(); ++p) {
    const double pd = static_cast<double>(p);
    out.c[p - 1] = -rp.a1 * pd * pd * c.c[p - 1];
  }
  return out;
}

/// apply_P restricted to modes p <= band_cutoff(); higher modes map to zero.
inline SpectralCoeffs apply_P_trunc(const SpectralCoeffs& c, const RegParams& rp) {
  SpectralCoeffs out = apply_P(c, rp);
  const std::size_t cut = rp.band_cutoff();
  for (std::size_t p = cut + 1; p <= out.pmax(); ++p) out.c[p - 1] = 0.0;
  return out;
}

/// Zero every mode above `cutoff`.
inline SpectralCoeffs band_project(const SpectralCoeffs& c, std::size_t cutoff) {
  SpectralCoeffs out = c;
  for (std::size_t p = cutoff + 1; p <= out.pmax(); ++p) out.c[p - 1] = 0.0;
  return out;
}

inline double clip(double z, double bound) { return std::min(std::max(z, -bound), bound); }

/// Bounded replacement for v * vhat.
///
/// clamped: clip(v) clip(vhat), globally Lipschitz with constant qhat in the
/// l1 distance of the argument pairs.
/// paper_literal: qhat^2 when max(v, vhat) lies outside [-qhat, qhat], else
/// v * vhat. This form is not globally Lipschitz.
inline double cutoff_F(double v, double vhat, double qhat, CutoffMode mode = CutoffMode::clamped) {
  if (!(qhat > 0.0)) throw std::invalid_argument("cutoff_F: qhat must be positive");
  if (mode == CutoffMode::clamped) return clip(v, qhat) * clip(vhat, qhat);
  const double top = std::max(v, vhat);
  if (top > qhat || top < -qhat) return qhat * qhat;
  return v * vhat;
}

/// Conservative three-point stencil for (a u_x)_x on the midpoint grid with
/// u = 0 at x = 0 and x = pi imposed through odd ghost values.
///
/// Interior half-point coefficients are arithmetic means; the two boundary
/// half-points use linear extrapolation from the first two samples, falling
/// back to the nearest sample if the extrapolation loses ellipticity.
inline Tridiagonal diffusion_stencil(std::span<const double> a, double h, double floor = 0.0) {
  const std::size_t n = a.size();
  if (n == 0) throw std::invalid_argument("diffusion_stencil: empty coefficient");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(a[k] > floor) || !std::isfinite(a[k])) {
      throw std::invalid_argument("diffusion_stencil: coefficient " + std::to_string(a[k]) +
                                  " at sample " + std::to_string(k) + " is not elliptic");
    }
  }
  auto edge = [](double inner, double next) {
    const double e = 1.5 * inner - 0.5 * next;
    return e > 0.5 * std::min(inner, next) ? e : inner;
  };
  std::vector<double> half(n + 1);
  for (std::size_t k = 1; k < n; ++k) half[k] = 0.5 * (a[k - 1] + a[k]);
  half[0] = n > 1 ? edge(a[0], a[1]) : a[0];
  half[n] = n > 1 ? edge(a[n - 1], a[n - 2]) : a[0];

  const double ih2 = 1.0 / (h * h);
  Tridiagonal m(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double west = half[k] * ih2;
    const double east = half[k + 1] * ih2;
    m.diag[k] = -(west + east);
    if (k > 0) {
      m.lower[k] = west;
    } else {
      m.diag[k] -= west;
    }
    if (k + 1 < n) {
      m.upper[k] = east;
    } else {
      m.diag[k] -= east;
    }
  }
  return m;
}

/// Second-order approximation of (a u_x)_x at the samples of u.
inline GridFunction variable_diffusion(const GridFunction& u, const GridFunction& aField,
                                       const SpatialGrid& grid, double floor = 0.0) {
  if (u.size() != grid.size() || aField.size() != grid.size()) {
    throw std::invalid_argument("variable_diffusion: shape mismatch");
  }
  const Tridiagonal m = diffusion_stencil(aField.values(), grid.spacing(), floor);
  std::vector<double> out(grid.size());
  m.multiply(u.values(), out);
  return GridFunction(grid, std::move(out));
}

/// Centered first difference with the same odd ghost values.
inline void centered_gradient(std::span<const double> u, double h, std::span<double> out) {
  const std::size_t n = u.size();
  const double inv = 0.5 / h;
  for (std::size_t k = 0; k < n; ++k) {
    const double west = k > 0 ? u[k - 1] : -u[0];
    const double east = k + 1 < n ? u[k + 1] : -u[n - 1];
    out[k] = (east - west) * inv;
  }
}

}  // namespace bqr
