#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "levelset.hpp"

namespace aggpatch {

struct DiagnosticsOptions {
  double gamma = 0.5;
  double c_cal = 1;
  double tube = 0;  // 0: 0.1 * diameter
  std::uint64_t seed = 0;
  double area0 = NAN;  // area at s0; NaN leaves area_ratio_error empty
  double s0 = 0;
};

/// Points where |grad v| is sampled: the centroid and, at up to 64 markers,
/// the points 0.02 diameters inside and outside along the normal.
inline std::vector<Point> gradv_probe_points(const MarkerCurve<double>& curve) {
  const auto m = metrics(curve);
  const double off = 0.02 * m.diameter;
  std::vector<Point> pts{smooth_moments(curve).centroid};
  const std::size_t stride = std::max<std::size_t>(1, curve.size() / 64);
  for (std::size_t i = 0; i < curve.size(); i += stride) {
    const Point n = outward_normal(curve, i);
    pts.push_back(curve[i] - n * off);
    pts.push_back(curve[i] + n * off);
  }
  return pts;
}

/// Largest operator norm of grad v over the probe points. Probes that land
/// too close to a strongly curved boundary are skipped.
inline double sup_grad_velocity(const MarkerCurve<double>& curve) {
  const BoundaryField f(curve);
  const double near = 1e-3 * f.diameter();
  double sup = 0;
  for (const Point& x : gradv_probe_points(curve)) {
    if (distance_to_polyline(curve, x) < near) continue;
    const Eigen::JacobiSVD<Matrix2> svd(f.grad(x));
    sup = std::max(sup, svd.singularValues()(0));
  }
  return sup;
}

/// One diagnostics row. labels (the initial positions of the current markers)
/// and grid are optional; missing inputs leave their columns NaN.
inline DiagnosticsRow diagnostics_row(const MarkerCurve<double>& curve, double s, const DiagnosticsOptions& opt,
                                      const std::vector<Point>* labels = nullptr,
                                      const DefiningGrid* grid = nullptr, std::string* note = nullptr) {
  DiagnosticsRow r;
  const auto m = metrics(curve);
  const auto mom = smooth_moments(curve);
  r.s = s;
  r.t = -std::expm1(-s);
  r.area = mom.area;
  r.cx = mom.centroid.x;
  r.cy = mom.centroid.y;
  r.min_spacing = m.min_spacing;
  r.max_spacing = m.max_spacing;
  if (std::isfinite(opt.area0)) r.area_ratio_error = std::abs(r.area / opt.area0 - std::exp(-(s - opt.s0)));
  if (labels && labels->size() == curve.size()) {
    r.mu = bilipschitz_lower(MarkerCurve<double>::unchecked(*labels), curve).mu;
  }
  r.tangent_holder = tangent_holder_diagnostic(curve, opt.gamma);
  r.sup_gradv = sup_grad_velocity(curve);
  if (grid) {
    const double tube = std::max(opt.tube > 0 ? opt.tube : 0.1 * m.diameter, 4 * grid->spacing);
    try {
      r.q = q_of_domain(*grid, curve, opt.gamma, tube, opt.seed).q;
      r.log_bound_ratio = r.sup_gradv / log_bound_rhs(r.q, r.area, opt.gamma, opt.c_cal);
    } catch (const Error& e) {
      if (note) *note = std::string("q unavailable: ") + e.what();
    }
  } else if (note) {
    *note = "q unavailable: no defining grid";
  }
  return r;
}

}  // namespace aggpatch
