#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"
#include "vec2.hpp"

namespace aggpatch {

using Matrix2 = Eigen::Matrix2d;

/// Velocity and gradient at an off-boundary point. grad(j, k) = dv_j/dx_k.
struct FieldSample {
  Point x;
  Point v;
  Matrix2 grad = Matrix2::Zero();
  bool inside = false;
  double eps = 0;  // distance to the boundary
};

struct SideInfo {
  bool inside = false;
  double distance = 0;
};

/// Precomputed boundary data for evaluating v = -grad N * chi_D and grad v
/// anywhere off the boundary, including arbitrarily close to it.
///
/// With z = x + iy and w the boundary, v1 - i v2 = (G(z) - chi_D(z) conj(z)) / 2
/// where G is the Cauchy integral of conj(w). G and G' are evaluated with the
/// interior / exterior barycentric Cauchy formulas from their one-sided
/// boundary values, which stay accurate up to the boundary.
class BoundaryField {
 public:
  using Complex = std::complex<double>;

  explicit BoundaryField(const MarkerCurve<double>& curve) : curve_(curve) {
    const std::size_t n = curve.size();
    h_ = 2 * std::numbers::pi / static_cast<double>(n);
    const auto d = marker_derivatives(curve);
    w_.resize(n);
    dw_.resize(n);
    c_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      w_[j] = {curve[j].x, curve[j].y};
      dw_[j] = {d[j].x, d[j].y};
      c_[j] = h_ * dw_[j];
    }
    const Complex iu(0, 1);
    const double pi = std::numbers::pi;
    std::vector<Complex> pv(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex gi = std::conj(w_[i]);
      Complex acc = h_ * std::conj(dw_[i]);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        acc += (std::conj(w_[j]) - gi) * c_[j] / (w_[j] - w_[i]);
      }
      pv[i] = acc + gi * pi * iu;
    }
    g_in_.resize(n);
    g_out_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex base = pv[i] / (2 * pi * iu);
      const Complex half = std::conj(w_[i]) / 2.0;
      g_in_[i] = base + half;
      g_out_[i] = base - half;
    }
    dg_in_ = quadrature::periodic_derivative(g_in_);
    dg_out_ = quadrature::periodic_derivative(g_out_);
    for (std::size_t i = 0; i < n; ++i) {
      dg_in_[i] /= dw_[i];
      dg_out_[i] /= dw_[i];
    }
    const auto m = metrics(curve);
    diameter_ = m.diameter;
    max_spacing_ = m.max_spacing;
  }

  const MarkerCurve<double>& curve() const { return curve_; }
  double diameter() const { return diameter_; }

  /// Winding number, refined near the boundary by the nearest point on a
  /// cubic Hermite arc through the markers.
  SideInfo side(const Point& x) const {
    const auto near = nearest_on_polyline(curve_, x);
    if (near.distance > 2 * max_spacing_) {
      return {winding_number(curve_, x) != 0, near.distance};
    }
    return refine_side(x, near);
  }

  Point velocity(const Point& x) const { return velocity(x, side(x).inside); }

  Point velocity(const Point& x, bool inside) const {
    const Complex z(x.x, x.y);
    const Complex G = cauchy(z, inside ? g_in_ : g_out_, inside);
    const Complex f = 0.5 * (G - (inside ? std::conj(z) : Complex(0)));
    return {f.real(), -f.imag()};
  }

  Matrix2 grad(const Point& x) const { return grad(x, side(x).inside); }

  Matrix2 grad(const Point& x, bool inside) const {
    const Complex z(x.x, x.y);
    const Complex dG = cauchy(z, inside ? dg_in_ : dg_out_, inside);
    const double chi = inside ? 1.0 : 0.0;
    const double a = dG.real(), b = dG.imag();
    Matrix2 m;
    m << 0.5 * a - 0.5 * chi, -0.5 * b,
         -0.5 * b, -0.5 * a - 0.5 * chi;
    return m;
  }

  FieldSample sample(const Point& x) const {
    const auto s = side(x);
    return {x, velocity(x, s.inside), grad(x, s.inside), s.inside, s.distance};
  }

 private:
  Complex cauchy(const Complex& z, const std::vector<Complex>& vals, bool inside) const {
    double nr = 0, ni = 0, dr = 0, di = 0;
    const double zx = z.real(), zy = z.imag();
    for (std::size_t j = 0; j < w_.size(); ++j) {
      const double dx = w_[j].real() - zx;
      const double dy = w_[j].imag() - zy;
      const double r2 = dx * dx + dy * dy;
      if (r2 == 0) return vals[j];
      // q = c_j / (w_j - z)
      const double cr = c_[j].real(), ci = c_[j].imag();
      const double qr = (cr * dx + ci * dy) / r2;
      const double qi = (ci * dx - cr * dy) / r2;
      const double vr = vals[j].real(), vi = vals[j].imag();
      nr += vr * qr - vi * qi;
      ni += vr * qi + vi * qr;
      dr += qr;
      di += qi;
    }
    if (!inside) di -= 2 * std::numbers::pi;
    return Complex(nr, ni) / Complex(dr, di);
  }

  SideInfo refine_side(const Point& x, const PolylineProximity& near) const {
    const std::size_t n = curve_.size();
    std::size_t seg = near.segment;
    double tau = near.fraction;
    for (int it = 0; it < 30; ++it) {
      const auto [P, D1, D2] = hermite(seg, tau);
      const Point r = P - x;
      const double phi = dot(r, D1);
      const double dphi = norm2(D1) + dot(r, D2);
      double step = dphi > 0 ? phi / dphi : 0.0;
      step = std::clamp(step, -0.5, 0.5);
      tau -= step;
      if (tau < 0) {
        seg = (seg + n - 1) % n;
        tau += 1;
      } else if (tau > 1) {
        seg = (seg + 1) % n;
        tau -= 1;
      }
      if (std::abs(step) < 1e-14) break;
    }
    const auto hp = hermite(seg, tau);
    return {cross(hp.d1, x - hp.p) > 0, norm(x - hp.p)};
  }

  struct HermitePoint {
    Point p, d1, d2;
  };

  HermitePoint hermite(std::size_t seg, double t) const {
    const std::size_t n = curve_.size();
    const std::size_t nx = (seg + 1) % n;
    const Point p0 = curve_[seg], p1 = curve_[nx];
    const Point t0{dw_[seg].real() * h_, dw_[seg].imag() * h_};
    const Point t1{dw_[nx].real() * h_, dw_[nx].imag() * h_};
    const double t2 = t * t, t3 = t2 * t;
    HermitePoint r;
    r.p = p0 * (2 * t3 - 3 * t2 + 1) + t0 * (t3 - 2 * t2 + t) + p1 * (3 * t2 - 2 * t3) +
          t1 * (t3 - t2);
    r.d1 = p0 * (6 * t2 - 6 * t) + t0 * (3 * t2 - 4 * t + 1) + p1 * (6 * t - 6 * t2) +
           t1 * (3 * t2 - 2 * t);
    r.d2 = p0 * (12 * t - 6) + t0 * (6 * t - 4) + p1 * (6 - 12 * t) + t1 * (6 * t - 2);
    return r;
  }

  MarkerCurve<double> curve_;
  double h_ = 0;
  double diameter_ = 0;
  double max_spacing_ = 0;
  std::vector<Complex> w_, dw_, c_;
  std::vector<Complex> g_in_, g_out_, dg_in_, dg_out_;
};

namespace detail {
inline void require_off_boundary(const BoundaryField& f, const SideInfo& s, const char* what) {
  if (s.distance < 1e-3 * f.diameter()) {
    throw NearBoundaryError(std::string(what) + ": query within 1e-3*diameter of the boundary");
  }
}
}  // namespace detail

/// v(x) off the boundary. Throws NearBoundaryError inside the 1e-3*diameter
/// band, where callers should use BoundaryField directly.
inline Point velocity_at(const MarkerCurve<double>& curve, const Point& x) {
  const BoundaryField f(curve);
  const auto s = f.side(x);
  detail::require_off_boundary(f, s, "velocity_at");
  return f.velocity(x, s.inside);
}

inline Matrix2 grad_velocity_at(const MarkerCurve<double>& curve, const Point& x) {
  const BoundaryField f(curve);
  const auto s = f.side(x);
  detail::require_off_boundary(f, s, "grad_velocity_at");
  return f.grad(x, s.inside);
}

inline FieldSample sample_field(const MarkerCurve<double>& curve, const Point& x) {
  const BoundaryField f(curve);
  auto s = f.sample(x);
  if (s.eps < 1e-3 * f.diameter()) {
    throw NearBoundaryError("sample_field: query within 1e-3*diameter of the boundary");
  }
  return s;
}

/// Plain trapezoid single layer (1/2pi) sum log|x - X_j| J_j h and its
/// x-derivative. Accurate only several marker spacings away from the curve.
inline Point velocity_trapezoid(const MarkerCurve<double>& curve, const Point& x) {
  const auto d = marker_derivatives(curve);
  const double h = 2 * std::numbers::pi / static_cast<double>(curve.size());
  Point acc{0, 0};
  for (std::size_t j = 0; j < curve.size(); ++j) {
    acc += rotate_cw(d[j]) * (0.5 * std::log(norm2(x - curve[j])));
  }
  return acc * (h / (2 * std::numbers::pi));
}

inline Matrix2 grad_velocity_trapezoid(const MarkerCurve<double>& curve, const Point& x) {
  const auto d = marker_derivatives(curve);
  const double h = 2 * std::numbers::pi / static_cast<double>(curve.size());
  Matrix2 m = Matrix2::Zero();
  for (std::size_t j = 0; j < curve.size(); ++j) {
    const Point r = x - curve[j];
    const Point J = rotate_cw(d[j]);
    const double r2 = norm2(r);
    m(0, 0) += J.x * r.x / r2;
    m(0, 1) += J.x * r.y / r2;
    m(1, 0) += J.y * r.x / r2;
    m(1, 1) += J.y * r.y / r2;
  }
  return m * (h / (2 * std::numbers::pi));
}

/// Independent gradient from the principal-value area integrals
///
///   dv_j/dx_k = K_jk * chi,   dv_j/dx_j = -chi/2 - K_jj * chi,
///
/// over D minus the ball of radius eps = dist(x, boundary). In polar
/// coordinates about x the radial integral of Omega(e)/r^2 r dr is a
/// logarithm, so each of the `subgrid` midpoint angles needs only the ray
/// crossings of a spline-upsampled boundary.
inline Matrix2 grad_velocity_pv_oracle(const MarkerCurve<double>& curve, const Point& x,
                                       int subgrid) {
  if (subgrid < 500) throw ConfigurationError("grad_velocity_pv_oracle: subgrid must be >= 500");
  const auto spec = kernels::KernelSpec::make(2);
  const std::size_t n = curve.size();
  const std::size_t up = std::max<std::size_t>(4 * n, 4096);
  std::vector<Point> poly(up);
  {
    PeriodicCubicSpline<double> sp(chord_positions(curve), curve.markers());
    for (std::size_t k = 0; k < up; ++k) poly[k] = sp(sp.period() * k / up);
  }
  const bool inside = winding_number<double>(std::span<const Point>(poly), x) != 0;
  double eps = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < up; ++k) {
    const Point a = poly[k], e = poly[(k + 1) % up] - a;
    const double f = std::clamp(dot(x - a, e) / norm2(e), 0.0, 1.0);
    eps = std::min(eps, norm(x - (a + e * f)));
  }
  if (!(eps > 0)) throw NearBoundaryError("grad_velocity_pv_oracle: point on the boundary");

  Matrix2 acc = Matrix2::Zero();
  const double dth = 2 * std::numbers::pi / subgrid;
  std::vector<double> hits;
  kernels::Vector e(2);
  for (int m = 0; m < subgrid; ++m) {
    const double th = (m + 0.5) * dth;
    const Point dir{std::cos(th), std::sin(th)};
    hits.clear();
    for (std::size_t k = 0; k < up; ++k) {
      const Point a = poly[k];
      const Point ab = poly[(k + 1) % up] - a;
      const double den = cross(dir, ab);
      if (den == 0) continue;
      const Point ax = a - x;
      const double r = cross(ax, ab) / den;
      const double u = cross(ax, dir) / den;
      if (r > 0 && u >= 0 && u < 1) hits.push_back(r);
    }
    std::sort(hits.begin(), hits.end());
    // integral of dr / r over the part of the ray inside D and outside B(x, eps)
    double radial = 0, prev = 0;
    bool in = inside;
    for (double r : hits) {
      if (in) radial += std::log(r / std::max(prev, eps));
      prev = r;
      in = !in;
    }
    e << dir.x, dir.y;
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        acc(j, k) += kernels::pv_hessian_component(spec, j, k, e) * radial;
      }
    }
  }
  acc *= dth;
  Matrix2 out;
  const double chi = inside ? 1.0 : 0.0;
  out << -chi / 2 - acc(0, 0), acc(0, 1),
         acc(1, 0), -chi / 2 - acc(1, 1);
  return out;
}

/// Candidate bound (c_cal / gamma)(1 + log+(volume^{1/d} q)) for sup|grad v|.
inline double log_bound_rhs(double q, double volume, double gamma, double c_cal = 1.0, int d = 2) {
  if (!(q > 0) || !(volume > 0)) throw ConfigurationError("log_bound_rhs: q and volume must be > 0");
  if (!(gamma > 0 && gamma < 1)) throw ConfigurationError("log_bound_rhs: gamma must lie in (0,1)");
  if (!(c_cal > 0)) throw ConfigurationError("log_bound_rhs: c_cal must be > 0");
  const double arg = std::pow(volume, 1.0 / d) * q;
  return (c_cal / gamma) * (1 + std::max(0.0, std::log(arg)));
}

}  // namespace aggpatch
