#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "vec2.hpp"

namespace aggpatch {

/// Ordered, closed, counterclockwise polyline of boundary markers.
///
/// Invariants (checked on construction): at least 8 markers, finite
/// coordinates, positive signed area, and no two consecutive markers closer
/// than 1e-12 times the diameter.
template <class Real = double>
class MarkerCurve {
 public:
  using Scalar = Real;
  using Point = Vec2<Real>;

  static constexpr std::size_t kMinMarkers = 8;

  MarkerCurve() = default;

  explicit MarkerCurve(std::vector<Point> markers) : markers_(std::move(markers)) {
    validate();
  }

  /// Skips validation. Used for intermediate Runge-Kutta stage curves, which
  /// are never exposed to callers.
  static MarkerCurve unchecked(std::vector<Point> markers) {
    MarkerCurve c;
    c.markers_ = std::move(markers);
    return c;
  }

  std::size_t size() const { return markers_.size(); }
  const Point& operator[](std::size_t i) const { return markers_[i]; }
  const std::vector<Point>& markers() const { return markers_; }
  auto begin() const { return markers_.begin(); }
  auto end() const { return markers_.end(); }

  /// Index arithmetic modulo the marker count.
  std::size_t wrap(std::ptrdiff_t i) const {
    const auto n = static_cast<std::ptrdiff_t>(markers_.size());
    return static_cast<std::size_t>(((i % n) + n) % n);
  }

  template <class Other>
  MarkerCurve<Other> cast() const {
    std::vector<Vec2<Other>> out;
    out.reserve(markers_.size());
    for (const auto& p : markers_) out.emplace_back(p);
    return MarkerCurve<Other>(std::move(out));
  }

 private:
  void validate() const;

  std::vector<Point> markers_;
};

template <class Real>
Real signed_area(std::span<const Vec2<Real>> pts) {
  Real acc = 0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) acc += cross(pts[i], pts[(i + 1) % n]);
  return acc / 2;
}

template <class Real>
Real signed_area(const MarkerCurve<Real>& c) {
  return signed_area<Real>(std::span<const Vec2<Real>>(c.markers()));
}

/// Largest pairwise marker distance.
template <class Real>
Real diameter(std::span<const Vec2<Real>> pts) {
  Real best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      best = std::max(best, norm2(pts[i] - pts[j]));
    }
  }
  using std::sqrt;
  return sqrt(best);
}

template <class Real>
Real diameter(const MarkerCurve<Real>& c) {
  return diameter<Real>(std::span<const Vec2<Real>>(c.markers()));
}

template <class Real>
void MarkerCurve<Real>::validate() const {
  const std::size_t n = markers_.size();
  if (n < kMinMarkers) throw GeometryError("MarkerCurve: need n_markers >= 8");
  for (const auto& p : markers_) {
    if (!std::isfinite(static_cast<double>(p.x)) ||
        !std::isfinite(static_cast<double>(p.y))) {
      throw GeometryError("MarkerCurve: non-finite marker coordinate");
    }
  }
  if (!(signed_area(*this) > 0)) {
    throw GeometryError("MarkerCurve: markers must be counterclockwise (signed area > 0)");
  }
  const Real floor = Real(1e-12) * diameter(*this);
  for (std::size_t i = 0; i < n; ++i) {
    if (norm(markers_[(i + 1) % n] - markers_[i]) <= floor) {
      throw GeometryError("MarkerCurve: consecutive markers coincide");
    }
  }
}

struct CurveMetrics {
  double area = 0;
  Point centroid;
  double perimeter = 0;
  double min_spacing = 0;
  double max_spacing = 0;
  double diameter = 0;
};

/// Shoelace area, polygon centroid, polyline length, spacing extremes and
/// pairwise diameter.
template <class Real>
CurveMetrics metrics(const MarkerCurve<Real>& c) {
  const std::size_t n = c.size();
  Real area2 = 0, cx = 0, cy = 0, perim = 0;
  Real smin = std::numeric_limits<Real>::infinity(), smax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = c[i];
    const auto& q = c[(i + 1) % n];
    const Real w = cross(p, q);
    area2 += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
    const Real len = norm(q - p);
    perim += len;
    smin = std::min(smin, len);
    smax = std::max(smax, len);
  }
  CurveMetrics m;
  m.area = static_cast<double>(area2 / 2);
  m.centroid = {static_cast<double>(cx / (3 * area2)), static_cast<double>(cy / (3 * area2))};
  m.perimeter = static_cast<double>(perim);
  m.min_spacing = static_cast<double>(smin);
  m.max_spacing = static_cast<double>(smax);
  m.diameter = static_cast<double>(diameter(c));
  return m;
}

struct Moments {
  double area = 0;
  Point centroid;
};

template <class Real>
std::vector<Vec2<Real>> marker_derivatives(const MarkerCurve<Real>& c);

/// Area and centroid of the smooth curve through the markers: trapezoid rule
/// in the marker index with fourth-order tangents. The polygon formulas in
/// metrics() carry an O(h^2) bias that drifts as the shape deforms.
template <class Real>
Moments smooth_moments(const MarkerCurve<Real>& c) {
  const auto d = marker_derivatives(c);
  const Real h = 2 * std::numbers::pi_v<Real> / static_cast<Real>(c.size());
  // moments about the first marker limit cancellation for far-off curves
  const Vec2<Real> o = c[0];
  Real a2 = 0, mx = 0, my = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec2<Real> p = c[i] - o;
    a2 += cross(p, d[i]);
    mx += p.x * p.x * d[i].y;
    my -= p.y * p.y * d[i].x;
  }
  Moments m;
  m.area = static_cast<double>(a2 * h / 2);
  m.centroid = {static_cast<double>(o.x + mx / a2), static_cast<double>(o.y + my / a2)};
  return m;
}

/// Parametric derivative dX/dt at every marker, t_j = 2 pi j / N.
template <class Real>
std::vector<Vec2<Real>> marker_derivatives(const MarkerCurve<Real>& c) {
  return quadrature::periodic_derivative(c.markers());
}

/// Unit outward normal at marker i from the 4-point periodic stencil tangent.
template <class Real>
Vec2<Real> outward_normal(const MarkerCurve<Real>& c, std::size_t i) {
  const std::size_t n = c.size();
  const auto& fp1 = c[(i + 1) % n];
  const auto& fp2 = c[(i + 2) % n];
  const auto& fm1 = c[(i + n - 1) % n];
  const auto& fm2 = c[(i + n - 2) % n];
  const Vec2<Real> t = fm2 - fp2 + (fp1 - fm1) * Real(8);
  const Real len = norm(t);
  const Real scale = norm(fp2 - fm2) + norm(fp1 - fm1);
  if (!(len > Real(1e-12) * scale) || scale == 0) {
    throw GeometryError("outward_normal: degenerate local geometry");
  }
  return rotate_cw(t / len);
}

template <class Real>
std::vector<Vec2<Real>> outward_normals(const MarkerCurve<Real>& c) {
  std::vector<Vec2<Real>> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = outward_normal(c, i);
  return out;
}

/// Cumulative chord length at each marker; element N holds the perimeter.
template <class Real>
std::vector<Real> chord_positions(const MarkerCurve<Real>& c) {
  std::vector<Real> s(c.size() + 1, Real(0));
  for (std::size_t i = 0; i < c.size(); ++i) {
    s[i + 1] = s[i] + norm(c[(i + 1) % c.size()] - c[i]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Periodic cubic spline

/// Interpolating C^2 periodic cubic spline through closed data, with a
/// strictly increasing knot vector u_0 = 0 < ... < u_N (u_N closes the loop).
template <class Real, class Value = Vec2<Real>>
class PeriodicCubicSpline {
 public:
  PeriodicCubicSpline(std::vector<Real> knots, std::vector<Value> values)
      : u_(std::move(knots)), y_(std::move(values)) {
    const std::size_t n = y_.size();
    if (u_.size() != n + 1 || n < 3) {
      throw GeometryError("PeriodicCubicSpline: knots/values size mismatch");
    }
    h_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      h_[i] = u_[i + 1] - u_[i];
      if (!(h_[i] > 0)) throw GeometryError("PeriodicCubicSpline: knots not increasing");
    }
    solve_moments();
  }

  Real period() const { return u_.back(); }
  std::size_t segments() const { return y_.size(); }
  Real knot(std::size_t i) const { return u_[i]; }

  /// Segment containing u (u reduced modulo the period).
  std::size_t locate(Real u) const {
    u = reduce(u);
    auto it = std::upper_bound(u_.begin(), u_.end(), u);
    std::size_t i = static_cast<std::size_t>(std::distance(u_.begin(), it));
    i = i == 0 ? 0 : i - 1;
    return std::min(i, y_.size() - 1);
  }

  Value operator()(Real u) const {
    u = reduce(u);
    return eval(locate(u), u - u_[locate(u)]);
  }

  /// Value at local offset tau in [0, h_i] of segment i.
  Value eval(std::size_t i, Real tau) const {
    const std::size_t j = (i + 1) % y_.size();
    const Real h = h_[i];
    const Real a = h - tau;
    return m_[i] * (a * a * a / (6 * h)) + m_[j] * (tau * tau * tau / (6 * h)) +
           (y_[i] / h - m_[i] * (h / 6)) * a + (y_[j] / h - m_[j] * (h / 6)) * tau;
  }

  Value derivative(std::size_t i, Real tau) const {
    const std::size_t j = (i + 1) % y_.size();
    const Real h = h_[i];
    const Real a = h - tau;
    return m_[j] * (tau * tau / (2 * h)) - m_[i] * (a * a / (2 * h)) -
           (y_[i] / h - m_[i] * (h / 6)) + (y_[j] / h - m_[j] * (h / 6));
  }

  Real segment_length(std::size_t i) const { return h_[i]; }

 private:
  Real reduce(Real u) const {
    const Real p = period();
    using std::floor;
    u -= p * floor(u / p);
    return u;
  }

  // Cyclic tridiagonal system for the second derivatives (Sherman-Morrison).
  void solve_moments() {
    const std::size_t n = y_.size();
    std::vector<Real> lower(n), diag(n), upper(n);
    std::vector<Value> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im = (i + n - 1) % n;
      const std::size_t ip = (i + 1) % n;
      lower[i] = h_[im];
      diag[i] = 2 * (h_[im] + h_[i]);
      upper[i] = h_[i];
      rhs[i] = ((y_[ip] - y_[i]) / h_[i] - (y_[i] - y_[im]) / h_[im]) * Real(6);
    }
    const Real alpha = upper[n - 1];  // A[n-1][0]
    const Real beta = lower[0];       // A[0][n-1]
    const Real gamma = -diag[0];
    std::vector<Real> d = diag;
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    std::vector<Real> corr(n, Real(0));
    corr[0] = gamma;
    corr[n - 1] = alpha;
    auto thomas = [&](std::vector<Value> b) {
      std::vector<Real> c(n);
      c[0] = upper[0] / d[0];
      b[0] = b[0] / d[0];
      for (std::size_t i = 1; i < n; ++i) {
        const Real m = d[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        b[i] = (b[i] - b[i - 1] * lower[i]) / m;
      }
      for (std::size_t i = n - 1; i-- > 0;) b[i] = b[i] - b[i + 1] * c[i];
      return b;
    };
    auto thomas_scalar = [&](std::vector<Real> b) {
      std::vector<Real> c(n);
      c[0] = upper[0] / d[0];
      b[0] = b[0] / d[0];
      for (std::size_t i = 1; i < n; ++i) {
        const Real m = d[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        b[i] = (b[i] - b[i - 1] * lower[i]) / m;
      }
      for (std::size_t i = n - 1; i-- > 0;) b[i] -= c[i] * b[i + 1];
      return b;
    };
    const auto x = thomas(rhs);
    const auto z = thomas_scalar(corr);
    const Value vx = x[0] + x[n - 1] * (beta / gamma);
    const Real vz = 1 + z[0] + z[n - 1] * beta / gamma;
    m_.resize(n);
    for (std::size_t i = 0; i < n; ++i) m_[i] = x[i] - vx * (z[i] / vz);
  }

  std::vector<Real> u_;
  std::vector<Value> y_;
  std::vector<Real> h_;
  std::vector<Value> m_;
};

// ---------------------------------------------------------------------------
// Intersection tests

template <class Real>
bool segments_cross(const Vec2<Real>& p1, const Vec2<Real>& p2,
                    const Vec2<Real>& q1, const Vec2<Real>& q2) {
  const Real d1 = cross(q2 - q1, p1 - q1);
  const Real d2 = cross(q2 - q1, p2 - q1);
  const Real d3 = cross(p2 - p1, q1 - p1);
  const Real d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

/// O(N^2) test over all non-adjacent segment pairs of a closed polyline.
template <class Real>
bool self_intersects(std::span<const Vec2<Real>> pts) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(a, b, pts[j], pts[(j + 1) % n])) return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Redistribution

template <class Real>
struct Redistribution {
  MarkerCurve<Real> curve;
  std::vector<Real> parameters;  // spline parameter of every new marker
};

namespace detail {

template <class Real>
Real spline_arc(const PeriodicCubicSpline<Real>& sp, std::size_t seg, Real tau,
                const std::vector<Real>& gx, const std::vector<Real>& gw) {
  Real acc = 0;
  for (std::size_t q = 0; q < gx.size(); ++q) {
    const Real u = tau * (gx[q] + 1) / 2;
    acc += gw[q] * norm(sp.derivative(seg, u));
  }
  return acc * tau / 2;
}

// Uniform normal offset matching either the polygon area (same marker count)
// or the smooth area (count changes, where polygon areas differ by O(h^2)).
template <class Real>
void restore_area(std::vector<Vec2<Real>>& pts, Real target_area, bool smooth) {
  for (int sweep = 0; sweep < 2; ++sweep) {
    auto c = MarkerCurve<Real>::unchecked(pts);
    const Real area = smooth ? static_cast<Real>(smooth_moments(c).area) : signed_area(c);
    Real perim = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      perim += norm(pts[(i + 1) % pts.size()] - pts[i]);
    }
    const Real delta = (target_area - area) / perim;
    const auto normals = outward_normals(c);
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] += normals[i] * delta;
  }
}

}  // namespace detail

/// Resamples the curve at n_target markers equispaced in arc length along a
/// periodic cubic interpolant, starting at marker 0. A uniform normal offset
/// then restores the original area. Lagrangian labels can be carried along
/// with resample_along on the returned parameters.
template <class Real>
Redistribution<Real> redistribute_parameters(const MarkerCurve<Real>& curve,
                                             std::size_t n_target) {
  if (n_target < MarkerCurve<Real>::kMinMarkers) {
    throw ConfigurationError("redistribute: n_target must be >= 8");
  }
  const auto knots = chord_positions(curve);
  PeriodicCubicSpline<Real> sp(knots, curve.markers());
  const auto [gx, gw] = quadrature::gauss_legendre<Real>(8);

  const std::size_t n = curve.size();
  std::vector<Real> seg_len(n), cum(n + 1, Real(0));
  for (std::size_t i = 0; i < n; ++i) {
    seg_len[i] = detail::spline_arc(sp, i, sp.segment_length(i), gx, gw);
    cum[i + 1] = cum[i] + seg_len[i];
  }
  const Real total = cum[n];
  std::vector<Vec2<Real>> pts(n_target);
  std::vector<Real> params(n_target);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n_target; ++k) {
    const Real target = total * static_cast<Real>(k) / static_cast<Real>(n_target);
    while (seg + 1 < n && cum[seg + 1] <= target) ++seg;
    const Real want = target - cum[seg];
    const Real h = sp.segment_length(seg);
    // Newton on the arc function with a bisection bracket
    Real lo = 0, hi = h, tau = h * want / seg_len[seg];
    for (int it = 0; it < 60; ++it) {
      const Real f = detail::spline_arc(sp, seg, tau, gx, gw) - want;
      if (f > 0) hi = tau; else lo = tau;
      const Real df = norm(sp.derivative(seg, tau));
      Real next = df > 0 ? tau - f / df : (lo + hi) / 2;
      if (!(next > lo && next < hi)) next = (lo + hi) / 2;
      using std::abs;
      if (abs(next - tau) <= std::numeric_limits<Real>::epsilon() * h * 4) {
        tau = next;
        break;
      }
      tau = next;
    }
    params[k] = knots[seg] + tau;
    pts[k] = sp.eval(seg, tau);
  }
  if (n_target == n) {
    detail::restore_area(pts, signed_area(curve), false);
  } else {
    detail::restore_area(pts, static_cast<Real>(smooth_moments(curve).area), true);
  }

  if (self_intersects<Real>(std::span<const Vec2<Real>>(pts))) {
    throw TopologyError("redistribute: interpolant self-intersects");
  }
  if (!(signed_area<Real>(std::span<const Vec2<Real>>(pts)) > 0)) {
    throw TopologyError("redistribute: orientation lost");
  }
  return {MarkerCurve<Real>(std::move(pts)), std::move(params)};
}

template <class Real>
MarkerCurve<Real> redistribute(const MarkerCurve<Real>& curve, std::size_t n_target) {
  return redistribute_parameters(curve, n_target).curve;
}

/// Evaluates closed data (one value per marker of `curve`) at spline
/// parameters produced by redistribute_parameters on the same curve.
template <class Real>
std::vector<Vec2<Real>> resample_along(const MarkerCurve<Real>& curve,
                                       const std::vector<Vec2<Real>>& data,
                                       const std::vector<Real>& params) {
  PeriodicCubicSpline<Real> sp(chord_positions(curve), data);
  std::vector<Vec2<Real>> out(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) out[k] = sp(params[k]);
  return out;
}

// ---------------------------------------------------------------------------
// Regularity diagnostics

struct Bilipschitz {
  double mu = 1;
  bool blow_up = false;
};

/// Discrete inverse-Lipschitz constant of the marker map curve0 -> curve1:
/// max over pairs of |a_i - a_j| / |X_i - X_j|.
template <class Real>
Bilipschitz bilipschitz_lower(const MarkerCurve<Real>& curve0,
                              const MarkerCurve<Real>& curve1) {
  if (curve0.size() != curve1.size()) {
    throw ConfigurationError("bilipschitz_lower: marker counts differ");
  }
  Real best = 0;
  for (std::size_t i = 0; i < curve0.size(); ++i) {
    for (std::size_t j = i + 1; j < curve0.size(); ++j) {
      const Real image = norm(curve1[i] - curve1[j]);
      const Real pre = norm(curve0[i] - curve0[j]);
      if (image == 0) return {std::numeric_limits<double>::infinity(), true};
      best = std::max(best, pre / image);
    }
  }
  return {static_cast<double>(best), false};
}

/// Brute-force Hoelder seminorm sup |f_i - f_j| / dist(i, j)^gamma over all
/// index pairs. Pairs at zero distance are skipped.
template <class Distance, class Difference>
double holder_seminorm_pairs(std::size_t n, double gamma, Distance&& dist,
                             Difference&& diff) {
  if (!(gamma > 0 && gamma < 1)) {
    throw ConfigurationError("holder_seminorm: gamma must lie in (0,1)");
  }
  if (n < 2) throw ConfigurationError("holder_seminorm: need at least 2 samples");
  double best = 0;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = dist(i, j);
      if (!(d > 0)) continue;
      any = true;
      best = std::max(best, diff(i, j) / std::pow(d, gamma));
    }
  }
  if (!any) throw GeometryError("holder_seminorm: all sample points coincide");
  return best;
}

struct HolderSample {
  Eigen::VectorXd point;
  Eigen::VectorXd value;
};

inline double holder_seminorm(std::span<const HolderSample> samples, double gamma) {
  return holder_seminorm_pairs(
      samples.size(), gamma,
      [&](std::size_t i, std::size_t j) { return (samples[i].point - samples[j].point).norm(); },
      [&](std::size_t i, std::size_t j) { return (samples[i].value - samples[j].value).norm(); });
}

/// Hoelder seminorm of the unit tangent field against periodic arc-length
/// distance; a chart-free proxy for the C^{1+gamma} character of the curve.
template <class Real>
double tangent_holder_diagnostic(const MarkerCurve<Real>& curve, double gamma) {
  const auto d = marker_derivatives(curve);
  std::vector<Point> tangents(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const Real len = norm(d[i]);
    if (!(len > 0)) throw GeometryError("tangent_holder_diagnostic: degenerate tangent");
    tangents[i] = Point(d[i] / len);
  }
  const auto s = chord_positions(curve);
  const double perim = static_cast<double>(s.back());
  return holder_seminorm_pairs(
      curve.size(), gamma,
      [&](std::size_t i, std::size_t j) {
        const double a = std::abs(static_cast<double>(s[j] - s[i]));
        return std::min(a, perim - a);
      },
      [&](std::size_t i, std::size_t j) { return norm(tangents[i] - tangents[j]); });
}

// ---------------------------------------------------------------------------
// Point location

/// Winding number of the closed polyline around x (Sunday's crossing rule;
/// integer crossing counts, sign tests only).
template <class Real>
int winding_number(std::span<const Vec2<Real>> pts, const Vec2<Real>& x) {
  int wn = 0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % n];
    const Real side = cross(b - a, x - a);
    if (a.y <= x.y) {
      if (b.y > x.y && side > 0) ++wn;
    } else if (b.y <= x.y && side < 0) {
      --wn;
    }
  }
  return wn;
}

template <class Real>
int winding_number(const MarkerCurve<Real>& c, const Vec2<Real>& x) {
  return winding_number<Real>(std::span<const Vec2<Real>>(c.markers()), x);
}

struct PolylineProximity {
  double distance = 0;
  std::size_t segment = 0;  // segment i joins markers i and i+1
  double fraction = 0;      // position along the segment in [0,1]
};

template <class Real>
PolylineProximity nearest_on_polyline(const MarkerCurve<Real>& c, const Vec2<Real>& x) {
  PolylineProximity best{std::numeric_limits<double>::infinity(), 0, 0};
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = c[i];
    const auto e = c[(i + 1) % n] - a;
    const Real len2 = norm2(e);
    Real f = len2 > 0 ? dot(x - a, e) / len2 : Real(0);
    f = std::clamp(f, Real(0), Real(1));
    const double d = static_cast<double>(norm(x - (a + e * f)));
    if (d < best.distance) best = {d, i, static_cast<double>(f)};
  }
  return best;
}

template <class Real>
double distance_to_polyline(const MarkerCurve<Real>& c, const Vec2<Real>& x) {
  return nearest_on_polyline(c, x).distance;
}

// ---------------------------------------------------------------------------
// Ellipse fitting

struct EllipseFit {
  Point center;
  double a = 0;      // major semi-axis
  double b = 0;      // minor semi-axis
  double angle = 0;  // orientation of the major axis
};

/// Algebraic least-squares conic fit A x^2 + B xy + C y^2 + D x + E y = 1 on
/// centred data, converted to centre, semi-axes and orientation.
template <class Real>
EllipseFit fit_ellipse(const MarkerCurve<Real>& c) {
  const std::size_t n = c.size();
  double mx = 0, my = 0;
  for (const auto& p : c) {
    mx += static_cast<double>(p.x);
    my += static_cast<double>(p.y);
  }
  mx /= n;
  my /= n;
  Eigen::MatrixXd design(n, 5);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(c[i].x) - mx;
    const double y = static_cast<double>(c[i].y) - my;
    design.row(static_cast<Eigen::Index>(i)) << x * x, x * y, y * y, x, y;
  }
  const Eigen::VectorXd p = design.colPivHouseholderQr().solve(ones);
  const double A = p[0], B = p[1], C = p[2], D = p[3], E = p[4];
  Eigen::Matrix2d q;
  q << A, B / 2, B / 2, C;
  const Eigen::Vector2d centre = q.ldlt().solve(Eigen::Vector2d(-D / 2, -E / 2));
  const double f0 = A * centre.x() * centre.x() + B * centre.x() * centre.y() +
                    C * centre.y() * centre.y() + D * centre.x() + E * centre.y() - 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(q);
  const double l0 = eig.eigenvalues()[0];  // ascending: l0 <= l1
  const double l1 = eig.eigenvalues()[1];
  if (!(l0 > 0) || !(f0 < 0)) throw GeometryError("fit_ellipse: data are not elliptical");
  EllipseFit fit;
  fit.center = {centre.x() + mx, centre.y() + my};
  fit.a = std::sqrt(-f0 / l0);
  fit.b = std::sqrt(-f0 / l1);
  const Eigen::Vector2d major = eig.eigenvectors().col(0);
  fit.angle = std::atan2(major.y(), major.x());
  return fit;
}

}  // namespace aggpatch
