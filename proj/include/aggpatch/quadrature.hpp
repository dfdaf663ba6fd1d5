#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "vec2.hpp"

namespace aggpatch::quadrature {

/// Gauss-Legendre nodes and weights on [-1, 1].
template <class Real = double>
std::pair<std::vector<Real>, std::vector<Real>> gauss_legendre(std::size_t n) {
  if (n == 0) throw ConfigurationError("gauss_legendre: n must be positive");
  const Real pi = std::numbers::pi_v<Real>;
  const auto nr = static_cast<Real>(n);
  // Legendre P_n and its derivative at x
  auto legendre = [&](Real x) {
    Real p0 = 1, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const auto kr = static_cast<Real>(k);
      const Real pk = ((2 * kr - 1) * x * p1 - (kr - 1) * p0) / kr;
      p0 = p1;
      p1 = pk;
    }
    const Real dp = nr * (x * p1 - p0) / (x * x - 1);
    return std::pair{p1, dp};
  };
  std::vector<Real> nodes(n), weights(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    Real x = std::cos(pi * (static_cast<Real>(i) + Real(0.75)) / (nr + Real(0.5)));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const Real dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 4 * std::numeric_limits<Real>::epsilon()) break;
    }
    const Real dp = legendre(x).second;
    const Real w = 2 / ((1 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  return {nodes, weights};
}

/// Product-integration weights for the periodic log singularity.
///
/// Returns W[m], m = 0..N-1, such that for a smooth 2pi-periodic f sampled at
/// t_j = 2 pi j / N,
///
///   int_0^{2pi} log|2 sin((t_i - s)/2)| f(s) ds  ~=  sum_j W[(j - i) mod N] f_j
///
/// exactly for trigonometric polynomials of degree < N/2. The weights integrate
/// the log kernel against the trigonometric interpolant of f, using
/// log|2 sin(x/2)| = -sum_{m>=1} cos(m x) / m.
template <class Real = double>
std::vector<Real> periodic_log_weights(std::size_t n_points) {
  const Real pi = std::numbers::pi_v<Real>;
  const auto N = static_cast<Real>(n_points);
  const std::size_t half = n_points / 2;
  const bool even = n_points % 2 == 0;
  std::vector<Real> w(n_points, Real(0));
  for (std::size_t m = 0; m < n_points; ++m) {
    const Real delta = 2 * pi * static_cast<Real>(m) / N;
    Real acc = 0;
    const std::size_t top = even ? half - 1 : half;
    for (std::size_t k = 1; k <= top; ++k) {
      acc += std::cos(static_cast<Real>(k) * delta) / static_cast<Real>(k);
    }
    Real value = -(2 * pi / N) * acc;
    if (even) {
      value -= (pi / N) * std::cos(static_cast<Real>(half) * delta) /
               static_cast<Real>(half);
    }
    w[m] = value;
  }
  return w;
}

/// Derivative with respect to the uniform parameter t_j = 2 pi j / N of a
/// periodic sequence, by the 4-point central stencil (fourth order).
template <class T, class Real = double>
std::vector<T> periodic_derivative(const std::vector<T>& f) {
  const std::size_t n = f.size();
  if (n < 5) throw GeometryError("periodic_derivative: need at least 5 samples");
  const Real h = 2 * std::numbers::pi_v<Real> / static_cast<Real>(n);
  std::vector<T> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T& fp1 = f[(i + 1) % n];
    const T& fp2 = f[(i + 2) % n];
    const T& fm1 = f[(i + n - 1) % n];
    const T& fm2 = f[(i + n - 2) % n];
    d[i] = (fm2 - fp2 + (fp1 - fm1) * Real(8)) / (Real(12) * h);
  }
  return d;
}

/// Marker-coordinate overload; the parameter spacing uses the marker scalar.
template <class Real>
std::vector<Vec2<Real>> periodic_derivative(const std::vector<Vec2<Real>>& f) {
  return periodic_derivative<Vec2<Real>, Real>(f);
}

}  // namespace aggpatch::quadrature
