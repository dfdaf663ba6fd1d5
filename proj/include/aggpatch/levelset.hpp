#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "vec2.hpp"

namespace aggpatch {

/// Uniform Cartesian grid of defining-function values at time s. Node (i, j)
/// sits at origin + spacing * (i, j); values are stored row by row in j.
struct DefiningGrid {
  Point origin;
  double spacing = 0;
  std::size_t nx = 0, ny = 0;
  std::vector<double> values;
  double s = 0;

  static DefiningGrid sample(Point origin, double spacing, std::size_t nx, std::size_t ny,
                             const std::function<double(Point)>& fn, double s = 0) {
    DefiningGrid g{origin, spacing, nx, ny, std::vector<double>(nx * ny), s};
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) g.at(i, j) = fn(g.node(i, j));
    }
    g.validate();
    return g;
  }

  /// Square grid of n x n nodes covering [lo, hi]^2.
  static DefiningGrid square(double lo, double hi, std::size_t n,
                             const std::function<double(Point)>& fn, double s = 0) {
    return sample({lo, lo}, (hi - lo) / static_cast<double>(n - 1), n, n, fn, s);
  }

  void validate() const {
    if (!(spacing > 0) || nx < 4 || ny < 4 || values.size() != nx * ny) {
      throw ConfigurationError("DefiningGrid: need spacing > 0 and at least 4x4 nodes");
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw NumericalError("DefiningGrid: non-finite value");
    }
  }

  double& at(std::size_t i, std::size_t j) { return values[j * nx + i]; }
  double at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
  Point node(std::size_t i, std::size_t j) const {
    return {origin.x + spacing * static_cast<double>(i), origin.y + spacing * static_cast<double>(j)};
  }
  Point upper() const { return node(nx - 1, ny - 1); }

  /// True when the full 4x4 interpolation stencil around x lies in the grid.
  bool interior(const Point& x) const {
    const double fx = (x.x - origin.x) / spacing;
    const double fy = (x.y - origin.y) / spacing;
    return fx >= 1 && fy >= 1 && fx <= static_cast<double>(nx) - 2 &&
           fy <= static_cast<double>(ny) - 2;
  }

  /// Keys cubic convolution (a = -1/2): C^1 and exact on quadratics. Stencil
  /// indices are clamped at the grid edges.
  double operator()(const Point& x) const { return eval(x, false, false); }
  Point gradient(const Point& x) const { return {eval(x, true, false), eval(x, false, true)}; }

 private:
  static double keys(double t) {
    t = std::abs(t);
    if (t <= 1) return (1.5 * t - 2.5) * t * t + 1;
    if (t < 2) return ((-0.5 * t + 2.5) * t - 4) * t + 2;
    return 0;
  }
  static double keys_d(double t) {
    const double sg = t < 0 ? -1.0 : 1.0;
    t = std::abs(t);
    if (t <= 1) return sg * (4.5 * t - 5) * t;
    if (t < 2) return sg * ((-1.5 * t + 5) * t - 4);
    return 0;
  }

  double eval(const Point& x, bool dx, bool dy) const {
    const double fx = (x.x - origin.x) / spacing;
    const double fy = (x.y - origin.y) / spacing;
    if (!std::isfinite(fx) || !std::isfinite(fy)) throw DomainError("DefiningGrid: non-finite query");
    const auto ix = static_cast<std::ptrdiff_t>(std::floor(fx));
    const auto iy = static_cast<std::ptrdiff_t>(std::floor(fy));
    const auto cx = [&](std::ptrdiff_t i) {
      return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(nx) - 1));
    };
    const auto cy = [&](std::ptrdiff_t j) {
      return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(ny) - 1));
    };
    double acc = 0;
    for (std::ptrdiff_t b = -1; b <= 2; ++b) {
      const double ty = fy - static_cast<double>(iy + b);
      const double wy = dy ? keys_d(ty) / spacing : keys(ty);
      if (wy == 0) continue;
      double row = 0;
      for (std::ptrdiff_t a = -1; a <= 2; ++a) {
        const double tx = fx - static_cast<double>(ix + a);
        const double wx = dx ? keys_d(tx) / spacing : keys(tx);
        row += wx * at(cx(ix + a), cy(iy + b));
      }
      acc += wy * row;
    }
    return acc;
  }
};

/// Time-ordered boundary snapshots of a run with a velocity evaluator for
/// each. Between two snapshots whose markers are the same material points
/// the boundary is interpolated linearly in s marker by marker and the field
/// is evaluated on that curve; across a redistribution (or a change of
/// marker count) the two velocities are blended linearly instead. Interpolated
/// fields are cached, so a history is not safe to share across threads.
class FlowHistory {
 public:
  explicit FlowHistory(double nominal_ds) : ds_(nominal_ds) {
    if (!(nominal_ds > 0)) throw ConfigurationError("FlowHistory: nominal ds must be > 0");
  }

  /// continuous = false marks a snapshot whose markers were redistributed
  /// since the previous one.
  void push(double s, const MarkerCurve<double>& curve, bool continuous = true) {
    if (!s_.empty() && !(s > s_.back())) {
      throw ConfigurationError("FlowHistory: snapshot times must increase strictly");
    }
    s_.push_back(s);
    joined_.push_back(!curves_.empty() && continuous && curves_.back().size() == curve.size());
    curves_.push_back(curve);
    fields_.push_back(std::make_shared<const BoundaryField>(curve));
    const auto m = metrics(curve);
    lo_ = {std::min(lo_.x, m.centroid.x - m.diameter), std::min(lo_.y, m.centroid.y - m.diameter)};
    hi_ = {std::max(hi_.x, m.centroid.x + m.diameter), std::max(hi_.y, m.centroid.y + m.diameter)};
    diam_ = std::max(diam_, m.diameter);
  }

  std::size_t size() const { return s_.size(); }
  double nominal_ds() const { return ds_; }
  double s_front() const { return s_.front(); }
  double s_back() const { return s_.back(); }
  const std::vector<double>& times() const { return s_; }
  const BoundaryField& field(std::size_t k) const { return *fields_[k]; }
  double max_diameter() const { return diam_; }
  Point lower_corner() const { return lo_; }
  Point upper_corner() const { return hi_; }

  /// Throws CoverageError unless [a, b] is covered without gaps above 2 ds.
  void require_coverage(double a, double b) const {
    if (a > b) std::swap(a, b);
    const double tol = 1e-9 * std::max(1.0, std::abs(b));
    if (s_.empty() || a < s_.front() - tol || b > s_.back() + tol) {
      throw CoverageError("FlowHistory: requested times outside the recorded range");
    }
    for (std::size_t k = 1; k < s_.size(); ++k) {
      if (s_[k] > a && s_[k - 1] < b && s_[k] - s_[k - 1] > 2 * ds_ + tol) {
        throw CoverageError("FlowHistory: snapshot gap exceeds twice the step");
      }
    }
  }

  /// Index of a snapshot taken at s, if any (to relative 1e-9).
  std::ptrdiff_t exact_index(double s) const {
    auto it = std::lower_bound(s_.begin(), s_.end(), s - 1e-9 * std::max(1.0, std::abs(s)));
    if (it != s_.end() && std::abs(*it - s) <= 1e-9 * std::max(1.0, std::abs(s))) {
      return it - s_.begin();
    }
    return -1;
  }

  /// Snapshot whose time is closest to s.
  const BoundaryField& nearest(double s) const {
    auto it = std::lower_bound(s_.begin(), s_.end(), s);
    std::size_t k = static_cast<std::size_t>(it - s_.begin());
    if (k == s_.size()) return *fields_.back();
    if (k > 0 && s - s_[k - 1] < s_[k] - s) --k;
    return *fields_[k];
  }

  const MarkerCurve<double>& curve(std::size_t k) const { return curves_[k]; }

  Point velocity(const Point& x, double s) const {
    const auto k = exact_index(s);
    if (k >= 0) return fields_[static_cast<std::size_t>(k)]->velocity(x);
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    if (it == s_.begin() || it == s_.end()) {
      throw CoverageError("FlowHistory: time outside the recorded range");
    }
    const std::size_t hi = static_cast<std::size_t>(it - s_.begin());
    const std::size_t lo = hi - 1;
    const double lam = (s - s_[lo]) / (s_[hi] - s_[lo]);
    if (!joined_[hi]) {
      return fields_[lo]->velocity(x) * (1 - lam) + fields_[hi]->velocity(x) * lam;
    }
    return interpolated(lo, lam, s).velocity(x);
  }

 private:
  const BoundaryField& interpolated(std::size_t lo, double lam, double s) const {
    auto it = cache_.find(s);
    if (it != cache_.end()) return *it->second;
    if (cache_.size() >= 512) cache_.clear();
    const auto& a = curves_[lo].markers();
    const auto& b = curves_[lo + 1].markers();
    std::vector<Point> pts(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) pts[i] = a[i] * (1 - lam) + b[i] * lam;
    auto f = std::make_shared<const BoundaryField>(MarkerCurve<double>::unchecked(std::move(pts)));
    return *cache_.emplace(s, std::move(f)).first->second;
  }

  double ds_;
  std::vector<double> s_;
  std::vector<MarkerCurve<double>> curves_;
  std::vector<char> joined_;
  std::vector<std::shared_ptr<const BoundaryField>> fields_;
  mutable std::map<double, std::shared_ptr<const BoundaryField>> cache_;
  Point lo_{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point hi_{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  double diam_ = 0;
};

struct TraceOptions {
  double step = 0;         // 0: a multiple of the history spacing
  double box_factor = 10;  // escape box: snapshot hull padded by this many diameters
};

namespace detail {

inline double trace_step(const FlowHistory& h, double span, const TraceOptions& opt) {
  if (opt.step > 0) return opt.step;
  (void)span;
  return 2 * h.nominal_ds();
}

}  // namespace detail

/// Preimage X^{-1}(x) of x at time s, traced back to time s_to (default 0)
/// by RK4 on dY/dsigma = v(Y, sigma). The field is continuous across the
/// boundary, so trajectories may cross it.
inline Point inverse_flow_point(const FlowHistory& history, const Point& x, double s,
                                double s_to = 0.0, const TraceOptions& opt = {}) {
  if (!std::isfinite(x.x) || !std::isfinite(x.y)) throw DomainError("inverse_flow_point: non-finite x");
  if (s == s_to) return x;
  history.require_coverage(s_to, s);
  const double span = s - s_to;
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(span) / detail::trace_step(history, span, opt) - 1e-9));
  const double dt = -span / static_cast<double>(std::max<std::size_t>(n, 1));
  const double pad = opt.box_factor * history.max_diameter();
  const Point lo = history.lower_corner() - Point{pad, pad};
  const Point hi = history.upper_corner() + Point{pad, pad};
  Point y = x;
  double sig = s;
  for (std::size_t k = 0; k < std::max<std::size_t>(n, 1); ++k) {
    const double next = k + 1 == n ? s_to : sig + dt;
    const double d = next - sig;
    const Point k1 = history.velocity(y, sig);
    const Point k2 = history.velocity(y + k1 * (d / 2), sig + d / 2);
    const Point k3 = history.velocity(y + k2 * (d / 2), sig + d / 2);
    const Point k4 = history.velocity(y + k3 * d, next);
    y += (k1 + (k2 + k3) * 2.0 + k4) * (d / 6);
    sig = next;
    if (!(y.x >= lo.x && y.x <= hi.x && y.y >= lo.y && y.y <= hi.y)) {
      throw EscapeError("inverse_flow_point: trajectory left the bounding box");
    }
  }
  return y;
}

/// Preimages of every node of a grid layout, shared by the corrected and
/// uncorrected transports.
struct PreimageMap {
  DefiningGrid layout;  // geometry only; values unused
  double s = 0;
  double s_from = 0;
  std::vector<Point> points;
  std::vector<char> inside;  // node inside the patch at time s
};

inline PreimageMap inverse_flow_map(const FlowHistory& history, const DefiningGrid& layout,
                                    double s, double s_from = 0.0, const TraceOptions& opt = {}) {
  PreimageMap m{layout, s, s_from, {}, {}};
  m.layout.values.assign(layout.nx * layout.ny, 0.0);
  m.points.resize(layout.nx * layout.ny);
  m.inside.resize(layout.nx * layout.ny);
  const auto k = history.exact_index(s);
  const BoundaryField& now = k >= 0 ? history.field(static_cast<std::size_t>(k)) : history.nearest(s);
  for (std::size_t j = 0; j < layout.ny; ++j) {
    for (std::size_t i = 0; i < layout.nx; ++i) {
      const Point x = layout.node(i, j);
      m.points[j * layout.nx + i] = inverse_flow_point(history, x, s, s_from, opt);
      m.inside[j * layout.nx + i] = now.side(x).inside ? 1 : 0;
    }
  }
  return m;
}

/// Phi(x, s) = e^{-(s - s_from)} Phi0(X^{-1}(x)) inside D_s and Phi0(X^{-1}(x))
/// outside when corrected; the plain transport otherwise.
inline DefiningGrid transport_phi(const PreimageMap& map, const std::function<double(Point)>& phi0,
                                  bool corrected) {
  DefiningGrid out = map.layout;
  out.s = map.s;
  const double factor = std::exp(-(map.s - map.s_from));
  for (std::size_t n = 0; n < out.values.size(); ++n) {
    const double v = phi0(map.points[n]);
    out.values[n] = corrected && map.inside[n] ? factor * v : v;
  }
  out.validate();
  return out;
}

inline DefiningGrid transport_phi(const FlowHistory& history, const DefiningGrid& phi0, double s,
                                  bool corrected, const TraceOptions& opt = {}) {
  const auto map = inverse_flow_map(history, phi0, s, phi0.s, opt);
  return transport_phi(map, [&](Point p) { return phi0(p); }, corrected);
}

struct JumpReport {
  std::vector<double> inside_slope;
  std::vector<double> outside_slope;
  std::vector<double> jump;   // |outside - inside|
  std::vector<double> ratio;  // inside / outside
  double max_jump = 0;
  double mean_ratio = 0;
};

enum class JumpStencil {
  one_sided,  // least-squares quadratic over grid nodes on the same side of the curve
  bicubic,    // plain Keys interpolation across the curve
};

namespace detail {

// Value at y of the quadratic fitted to nodes within a few cells of y that lie
// on the requested side of the curve. Keys interpolation smears a kink over two
// cells, which biases one-sided differences taken right at the curve.
inline double one_sided_value(const DefiningGrid& grid, const MarkerCurve<double>& curve, const Point& y,
                              bool inside) {
  const double fx = (y.x - grid.origin.x) / grid.spacing;
  const double fy = (y.y - grid.origin.y) / grid.spacing;
  for (double radius : {3.0, 4.0, 5.0}) {
    const auto r = static_cast<std::ptrdiff_t>(std::ceil(radius));
    const auto i0 = static_cast<std::ptrdiff_t>(std::floor(fx)) - r;
    const auto j0 = static_cast<std::ptrdiff_t>(std::floor(fy)) - r;
    const auto i1 = i0 + 2 * r + 1, j1 = j0 + 2 * r + 1;
    if (i0 < 0 || j0 < 0 || i1 >= static_cast<std::ptrdiff_t>(grid.nx) ||
        j1 >= static_cast<std::ptrdiff_t>(grid.ny)) {
      throw DomainError("gradient_jump: offset stencil leaves the grid");
    }
    std::vector<std::array<double, 6>> rows;
    std::vector<double> rhs;
    for (auto j = j0; j <= j1; ++j) {
      for (auto i = i0; i <= i1; ++i) {
        const double u = static_cast<double>(i) - fx, v = static_cast<double>(j) - fy;
        if (u * u + v * v > radius * radius) continue;
        const Point node = grid.node(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        if ((winding_number(curve, node) != 0) != inside) continue;
        rows.push_back({1, u, v, u * u, u * v, v * v});
        rhs.push_back(grid.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      }
    }
    if (rows.size() < 12) continue;
    Eigen::MatrixXd A(rows.size(), 6);
    Eigen::VectorXd b(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      for (int c = 0; c < 6; ++c) A(static_cast<Eigen::Index>(k), c) = rows[k][static_cast<std::size_t>(c)];
      b(static_cast<Eigen::Index>(k)) = rhs[k];
    }
    return A.colPivHouseholderQr().solve(b)(0);
  }
  throw DomainError("gradient_jump: too few grid nodes on one side of the curve");
}

}  // namespace detail

/// One-sided normal derivatives of the grid function at every marker with
/// offset h along the outward normal.
inline JumpReport gradient_jump(const DefiningGrid& grid, const MarkerCurve<double>& curve, double h,
                                JumpStencil stencil = JumpStencil::one_sided) {
  const double diam = metrics(curve).diameter;
  if (!(h >= 2 * grid.spacing - 1e-15) || !(h <= 0.1 * diam)) {
    throw ConfigurationError("gradient_jump: need 2*spacing <= h <= 0.1*diameter");
  }
  JumpReport r;
  double ratio_sum = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const Point x = curve[i];
    const Point n = outward_normal(curve, i);
    const Point xo = x + n * h, xi = x - n * h;
    if (!grid.interior(xo) || !grid.interior(xi) || !grid.interior(x)) {
      throw DomainError("gradient_jump: offset stencil leaves the grid");
    }
    double out = 0, in = 0;
    if (stencil == JumpStencil::bicubic) {
      const double f0 = grid(x);
      out = (grid(xo) - f0) / h;
      in = (f0 - grid(xi)) / h;
    } else {
      out = (detail::one_sided_value(grid, curve, xo, false) - detail::one_sided_value(grid, curve, x, false)) / h;
      in = (detail::one_sided_value(grid, curve, x, true) - detail::one_sided_value(grid, curve, xi, true)) / h;
    }
    r.inside_slope.push_back(in);
    r.outside_slope.push_back(out);
    r.jump.push_back(std::abs(out - in));
    r.ratio.push_back(in / out);
    r.max_jump = std::max(r.max_jump, r.jump.back());
    ratio_sum += r.ratio.back();
  }
  r.mean_ratio = ratio_sum / static_cast<double>(curve.size());
  return r;
}

struct QEstimate {
  double q = 0;
  double seminorm = 0;  // Hoelder seminorm of grad Phi over the tube
  double grad_inf = 0;  // min |grad Phi| on the boundary
  std::size_t tube_nodes = 0;
};

/// q(D) = ||grad Phi||_gamma / |grad Phi|_inf, with the seminorm restricted to
/// grid nodes within tube_width of the boundary (central differences,
/// subsampled to at most max_nodes by a seeded shuffle).
inline QEstimate q_of_domain(const DefiningGrid& grid, const MarkerCurve<double>& curve, double gamma,
                             double tube_width, std::uint64_t seed = 0, std::size_t max_nodes = 10000) {
  if (!(gamma > 0 && gamma < 1)) throw ConfigurationError("q_of_domain: gamma must lie in (0,1)");
  if (!(tube_width >= 4 * grid.spacing - 1e-15)) {
    throw ConfigurationError("q_of_domain: tube_width must be >= 4*spacing");
  }
  if (max_nodes < 2) throw ConfigurationError("q_of_domain: max_nodes must be >= 2");
  QEstimate est;
  est.grad_inf = std::numeric_limits<double>::infinity();
  for (const auto& p : curve) est.grad_inf = std::min(est.grad_inf, norm(grid.gradient(p)));
  if (!(est.grad_inf >= 1e-10)) {
    throw DegenerateDefiningFunctionError("q_of_domain: |grad Phi| vanishes on the boundary");
  }

  Point lo = curve[0], hi = curve[0];
  for (const auto& p : curve) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  std::vector<Point> pos, val;
  const double inv2h = 1 / (2 * grid.spacing);
  for (std::size_t j = 1; j + 1 < grid.ny; ++j) {
    for (std::size_t i = 1; i + 1 < grid.nx; ++i) {
      const Point x = grid.node(i, j);
      if (x.x < lo.x - tube_width || x.x > hi.x + tube_width || x.y < lo.y - tube_width ||
          x.y > hi.y + tube_width) {
        continue;
      }
      if (distance_to_polyline(curve, x) >= tube_width) continue;
      pos.push_back(x);
      val.push_back({(grid.at(i + 1, j) - grid.at(i - 1, j)) * inv2h,
                     (grid.at(i, j + 1) - grid.at(i, j - 1)) * inv2h});
    }
  }
  est.tube_nodes = pos.size();
  if (pos.size() < 2) throw ConfigurationError("q_of_domain: tube contains fewer than 2 grid nodes");
  std::vector<std::size_t> idx(pos.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (idx.size() > max_nodes) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(max_nodes);
  }
  double best = 0;
  const double half_gamma = gamma / 2;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const Point pa = pos[idx[a]], va = val[idx[a]];
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const double d2 = norm2(pos[idx[b]] - pa);
      const double f2 = norm2(val[idx[b]] - va);
      // compare squared quantities; one pow per improvement
      if (f2 > best * best * std::pow(d2, gamma)) best = std::sqrt(f2) / std::pow(d2, half_gamma);
    }
  }
  est.seminorm = best;
  est.q = best / est.grad_inf;
  return est;
}

struct GraphRadius {
  double delta = 0;  // (1/(2q))^{1/gamma}
  double r0 = 0;     // delta / 6
};

inline GraphRadius graph_radius(double q, double gamma) {
  if (!(q > 0)) throw ConfigurationError("graph_radius: q must be > 0");
  if (!(gamma > 0 && gamma < 1)) throw ConfigurationError("graph_radius: gamma must lie in (0,1)");
  const double delta = std::pow(1 / (2 * q), 1 / gamma);
  return {delta, delta / 6};
}

/// Largest distance from a marker to the zero level set of the grid
/// function, searched along the marker normal within +-reach.
inline double zero_set_distance(const DefiningGrid& grid, const MarkerCurve<double>& curve,
                                double reach) {
  double worst = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const Point x = curve[i];
    const Point n = outward_normal(curve, i);
    const double f0 = grid(x);
    if (f0 == 0) continue;
    // walk outwards in both directions until the sign flips, then bisect
    const double dir = f0 > 0 ? -1.0 : 1.0;
    const int steps = 64;
    double a = 0, b = -1;
    for (int k = 1; k <= steps; ++k) {
      const double t = reach * k / steps;
      if ((grid(x + n * (dir * t)) > 0) != (f0 > 0)) {
        a = reach * (k - 1) / steps;
        b = t;
        break;
      }
    }
    if (b < 0) return std::numeric_limits<double>::infinity();
    for (int it = 0; it < 60; ++it) {
      const double m = (a + b) / 2;
      if ((grid(x + n * (dir * m)) > 0) == (f0 > 0)) a = m; else b = m;
    }
    worst = std::max(worst, (a + b) / 2);
  }
  return worst;
}

}  // namespace aggpatch
