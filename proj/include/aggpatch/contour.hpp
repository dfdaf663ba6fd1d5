#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "vec2.hpp"

namespace aggpatch {

/// Marker curve at rescaled time s. Labels hold the initial position of
/// every marker and are resampled together with the curve.
template <class Real = double>
struct PatchState {
  MarkerCurve<Real> curve;
  Real s = 0;
  Real area0 = 0;
  std::vector<Vec2<Real>> labels;
  std::size_t steps = 0;
  std::size_t redistributions = 0;

  static PatchState initial(MarkerCurve<Real> c, Real s0 = 0) {
    PatchState st;
    st.area0 = signed_area(c);
    st.labels = c.markers();
    st.curve = std::move(c);
    st.s = s0;
    return st;
  }

  /// Original time t = 1 - e^{-s}.
  Real t() const {
    using std::expm1;
    return -expm1(-s);
  }
  Real density() const {
    using std::exp;
    return exp(s);
  }
};

struct StepperConfig {
  double ds = 1e-3;
  std::size_t redistribute_every = 0;  // 0 disables the periodic trigger
  std::size_t n_markers = 0;           // 0 keeps the current count
  double spacing_ratio_trigger = 2.0;

  void validate() const {
    if (!std::isfinite(ds) || ds < 0) throw ConfigurationError("ds must be finite and >= 0");
    if (ds > 0.1) throw ConfigurationError("ds must be <= 0.1");
    if (n_markers != 0 && n_markers < 8) throw ConfigurationError("n_markers >= 8");
    if (!(spacing_ratio_trigger > 1)) {
      throw ConfigurationError("spacing_ratio_trigger must exceed 1");
    }
  }
};

namespace detail {

/// Smooth part of the log kernel after removing log|2 sin|: coefficients
/// W_m - h L_m, shared by every marker pair at index offset m.
template <class Real>
const std::vector<Real>& log_pair_coefficients(std::size_t n) {
  thread_local std::map<std::size_t, std::vector<Real>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const auto w = quadrature::periodic_log_weights<Real>(n);
  const Real h = 2 * std::numbers::pi_v<Real> / static_cast<Real>(n);
  std::vector<Real> c(n);
  c[0] = w[0];
  for (std::size_t m = 1; m < n; ++m) {
    using std::abs;
    using std::log;
    using std::sin;
    const Real lm = log(abs(2 * sin(static_cast<Real>(m) * h / 2)));
    c[m] = w[m] - h * lm;
  }
  return cache.emplace(n, std::move(c)).first->second;
}

template <class Real>
std::vector<Vec2<Real>> normal_speeds(const std::vector<Vec2<Real>>& pts) {
  auto d = quadrature::periodic_derivative(pts);
  for (auto& v : d) v = rotate_cw(v);
  return d;
}

}  // namespace detail

/// Rescaled velocity at every marker,
///
///   v(X_i) = (1/2pi) int log|X_i - y| n(y) dsigma(y),
///
/// with the log singularity integrated against the trigonometric interpolant
/// of the (uniformly parametrized) markers. Spectral in the weights, fourth
/// order through the finite-difference tangents.
template <class Real>
std::vector<Vec2<Real>> velocity_field_on_markers(const MarkerCurve<Real>& curve) {
  const std::size_t n = curve.size();
  const auto& x = curve.markers();
  const auto J = detail::normal_speeds(x);
  const auto& c = detail::log_pair_coefficients<Real>(n);
  const Real h = 2 * std::numbers::pi_v<Real> / static_cast<Real>(n);
  std::vector<Vec2<Real>> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    using std::log;
    v[i] += J[i] * (c[0] + h * log(norm(J[i])));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      using std::log;
      const Real d2 = norm2(x[i] - x[j]);
      if (!(d2 > 0)) throw GeometryError("velocity: coincident markers");
      const Real coeff = c[j - i] + h * log(d2) / 2;
      v[i] += J[j] * coeff;
      v[j] += J[i] * coeff;
    }
  }
  const Real scale = 1 / (2 * std::numbers::pi_v<Real>);
  for (auto& vi : v) {
    vi *= scale;
    if (!std::isfinite(static_cast<double>(vi.x)) || !std::isfinite(static_cast<double>(vi.y))) {
      throw NumericalError("velocity: non-finite value");
    }
  }
  return v;
}

/// Velocity at a single marker; O(N).
template <class Real>
Vec2<Real> boundary_velocity(const MarkerCurve<Real>& curve, std::size_t i) {
  const std::size_t n = curve.size();
  if (i >= n) throw ConfigurationError("boundary_velocity: marker index out of range");
  const auto& x = curve.markers();
  const auto J = detail::normal_speeds(x);
  const auto& c = detail::log_pair_coefficients<Real>(n);
  const Real h = 2 * std::numbers::pi_v<Real> / static_cast<Real>(n);
  using std::log;
  Vec2<Real> v = J[i] * (c[0] + h * log(norm(J[i])));
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const Real d2 = norm2(x[i] - x[j]);
    if (!(d2 > 0)) throw GeometryError("boundary_velocity: coincident markers");
    v += J[j] * (c[(j + n - i) % n] + h * log(d2) / 2);
  }
  return v / (2 * std::numbers::pi_v<Real>);
}

namespace detail {

template <class Real>
std::vector<Vec2<Real>> axpy(const std::vector<Vec2<Real>>& x,
                             const std::vector<Vec2<Real>>& k, Real a) {
  std::vector<Vec2<Real>> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + k[i] * a;
  return out;
}

template <class Real>
bool needs_redistribution(const PatchState<Real>& st, const StepperConfig& cfg) {
  if (cfg.n_markers != 0 && cfg.n_markers != st.curve.size()) return true;
  if (cfg.redistribute_every > 0 && st.steps % cfg.redistribute_every == 0) return true;
  const auto m = metrics(st.curve);
  return m.max_spacing > cfg.spacing_ratio_trigger * m.min_spacing;
}

}  // namespace detail

/// One classical RK4 step of signed size ds in s. Stage curves are used as
/// is; redistribution (if triggered) happens only after the full step.
template <class Real>
PatchState<Real> rk4_advance(const PatchState<Real>& st, Real ds, const StepperConfig& cfg) {
  if (ds == 0) return st;
  const auto& x = st.curve.markers();
  const auto k1 = velocity_field_on_markers(st.curve);
  const auto k2 = velocity_field_on_markers(
      MarkerCurve<Real>::unchecked(detail::axpy(x, k1, ds / 2)));
  const auto k3 = velocity_field_on_markers(
      MarkerCurve<Real>::unchecked(detail::axpy(x, k2, ds / 2)));
  const auto k4 = velocity_field_on_markers(
      MarkerCurve<Real>::unchecked(detail::axpy(x, k3, ds)));
  std::vector<Vec2<Real>> next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    next[i] = x[i] + (k1[i] + (k2[i] + k3[i]) * Real(2) + k4[i]) * (ds / 6);
    if (!std::isfinite(static_cast<double>(next[i].x)) ||
        !std::isfinite(static_cast<double>(next[i].y))) {
      throw NumericalError("rk4_step: non-finite marker position");
    }
  }
  PatchState<Real> out;
  out.s = st.s + ds;
  out.area0 = st.area0;
  out.labels = st.labels;
  out.steps = st.steps + 1;
  out.redistributions = st.redistributions;
  try {
    out.curve = MarkerCurve<Real>(std::move(next));
  } catch (const GeometryError& e) {
    throw TopologyError(std::string("rk4_step: ") + e.what());
  }
  if (detail::needs_redistribution(out, cfg)) {
    const std::size_t target = cfg.n_markers != 0 ? cfg.n_markers : out.curve.size();
    auto r = redistribute_parameters(out.curve, target);
    out.labels = resample_along(out.curve, out.labels, r.parameters);
    out.curve = std::move(r.curve);
    ++out.redistributions;
  }
  return out;
}

template <class Real>
PatchState<Real> rk4_step(const PatchState<Real>& st, const StepperConfig& cfg) {
  cfg.validate();
  return rk4_advance(st, static_cast<Real>(cfg.ds), cfg);
}

template <class Real>
struct RunResult {
  PatchState<Real> state;
  bool blow_up = false;
  std::string reason;
};

template <class Real>
using StepObserver = std::function<void(const PatchState<Real>&)>;

/// Steps from state0.s to s_end (either direction); the last step is
/// shortened to land exactly on s_end. A topology error stops the run and
/// returns the last valid state with the blow-up flag set.
template <class Real>
RunResult<Real> run(const PatchState<Real>& state0, const StepperConfig& cfg, Real s_end,
                    const StepObserver<Real>& observer = {}) {
  cfg.validate();
  if (!(cfg.ds > 0)) throw ConfigurationError("run: ds must be > 0");
  RunResult<Real> res{state0, false, {}};
  const Real dir = s_end >= state0.s ? Real(1) : Real(-1);
  const Real step = static_cast<Real>(cfg.ds);
  const Real total = (s_end - state0.s) * dir;
  const auto n_steps = static_cast<std::size_t>(std::ceil(static_cast<double>(total / step) - 1e-9));
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const Real target = k == n_steps ? s_end : state0.s + dir * step * static_cast<Real>(k);
    try {
      res.state = rk4_advance(res.state, target - res.state.s, cfg);
    } catch (const TopologyError& e) {
      res.blow_up = true;
      res.reason = e.what();
      return res;
    }
    res.state.s = target;
    if (observer) observer(res.state);
  }
  return res;
}

}  // namespace aggpatch
