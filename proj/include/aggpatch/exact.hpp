#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "vec2.hpp"

namespace aggpatch::exact {

inline double t_from_s(double s) { return -std::expm1(-s); }
inline double s_from_t(double t) {
  if (!(t < 1)) throw DomainError("s_from_t: t must be < 1");
  return -std::log1p(-t);
}

/// Collapsing disc of initial radius r0; density 1/(1-t) on the disc of
/// radius r0 sqrt(1-t) in original time.
struct DiscSolution {
  double r0 = 1;
  Point center{0, 0};
};

inline void check(const DiscSolution& sol) {
  if (!(sol.r0 > 0)) throw ConfigurationError("disc: r0 must be > 0");
}

inline double disc_radius(const DiscSolution& sol, double s) {
  check(sol);
  return sol.r0 * std::exp(-s / 2);
}

/// Velocity in original time: -(x-c)/(2(1-t)) inside, -r0^2 (x-c)/(2|x-c|^2)
/// outside; continuous across the boundary.
inline Point disc_velocity(const DiscSolution& sol, const Point& x, double t) {
  check(sol);
  if (!(t < 1)) throw DomainError("disc_velocity: t must be < 1");
  const Point y = x - sol.center;
  const double rr = norm2(y);
  const double R2 = sol.r0 * sol.r0 * (1 - t);
  if (rr < R2) return y * (-0.5 / (1 - t));
  return y * (-0.5 * sol.r0 * sol.r0 / rr);
}

/// Preimage at time 0 of x at time t: (x-c)/sqrt(1-t) inside,
/// sqrt(|x-c|^2 + t r0^2) (x-c)/|x-c| outside.
inline Point disc_inverse_flow(const DiscSolution& sol, const Point& x, double t) {
  check(sol);
  if (!(t < 1)) throw DomainError("disc_inverse_flow: t must be < 1");
  const Point y = x - sol.center;
  const double rr = norm2(y);
  const double R2 = sol.r0 * sol.r0 * (1 - t);
  if (rr < R2) return sol.center + y / std::sqrt(1 - t);
  const double r = std::sqrt(rr);
  return sol.center + y * (std::sqrt(rr + t * sol.r0 * sol.r0) / r);
}

/// Radius of the collapsing ball in d dimensions, r0 (1-t)^{1/d}.
inline double ball_radius(int d, double r0, double t) {
  if (d != 2 && d != 3) throw ConfigurationError("ball_radius: d must be 2 or 3");
  if (!(t < 1)) throw DomainError("ball_radius: t must be < 1");
  return r0 * std::pow(1 - t, 1.0 / d);
}

/// Semi-axes of an elliptical patch, which stays elliptical with
/// da/ds = db/ds = -ab/(a+b).
struct EllipseSolution {
  double a = 2;
  double b = 1;
};

inline double ellipse_rate(double a, double b) { return -a * b / (a + b); }

inline EllipseSolution ellipse_axes_step(const EllipseSolution& sol, double ds) {
  if (!(sol.a >= sol.b && sol.b > 0)) throw ConfigurationError("ellipse: need a >= b > 0");
  // both axes share the same rate, so a - b is carried exactly
  const double gap = sol.a - sol.b;
  auto f = [gap](double b) { return ellipse_rate(b + gap, b); };
  const double k1 = f(sol.b);
  const double k2 = f(sol.b + ds / 2 * k1);
  const double k3 = f(sol.b + ds / 2 * k2);
  const double k4 = f(sol.b + ds * k3);
  const double b = sol.b + ds / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  if (!(b > 0)) throw CollapseError("ellipse collapsed onto its major axis");
  return {b + gap, b};
}

/// Axes at rescaled time s by repeated steps of at most ds_max.
inline EllipseSolution ellipse_axes(const EllipseSolution& sol, double s, double ds_max = 1e-3) {
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(s) / ds_max)));
  EllipseSolution cur = sol;
  for (int k = 0; k < n; ++k) cur = ellipse_axes_step(cur, s / n);
  return cur;
}

/// Interior velocity of the ellipse x^2/a^2 + y^2/b^2 < 1 in rescaled time.
inline Point ellipse_interior_velocity(const EllipseSolution& sol, const Point& x) {
  const double sum = sol.a + sol.b;
  return {-sol.b * x.x / sum, -sol.a * x.y / sum};
}

}  // namespace aggpatch::exact
