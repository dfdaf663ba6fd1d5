#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "geometry.hpp"
#include "shapes.hpp"
#include "vec2.hpp"

namespace aggpatch {

struct ShapeSpec {
  enum class Kind { disc, ellipse, fourier_circle, polygon_file };
  Kind kind = Kind::disc;
  double r0 = 1;
  Point center{0, 0};
  double a = 2, b = 1;
  std::vector<FourierMode> modes;
  std::string path;
};

/// Levelset grid for q(D) diagnostics and defining-function dumps. Without an
/// explicit box the grid covers the initial curve with a margin.
struct GridSpec {
  std::size_t n = 121;
  std::optional<Point> lo, hi;
  double tube = 0;  // 0: 0.1 * diameter of the current curve
  bool dump = true;
};

struct RunConfig {
  ShapeSpec initial_shape;
  std::size_t n_markers = 256;
  double ds = 1e-3;
  double s_end = 1;
  std::size_t redistribute_every = 0;
  double spacing_ratio_trigger = 2;
  std::size_t snapshot_every = 1;
  double gamma = 0.5;
  double c_cal = 1;
  std::string output_dir = "out";
  std::optional<GridSpec> grid;
  std::uint64_t seed = 0;
  bool svg = false;
};

namespace detail {

using nlohmann::json;

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigurationError(where + ": expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigurationError((where.empty() ? k : where + "." + k) + ": unknown field");
  }
}

template <class T>
T field(const json& j, const std::string& where, const char* key, std::optional<T> fallback = {}) {
  const std::string name = where.empty() ? key : where + "." + key;
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigurationError(name + ": required field missing");
  }
  const json& v = j.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigurationError(name + ": expected true or false");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigurationError(name + ": expected a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigurationError(name + ": expected an integer");
    if (std::is_unsigned_v<T> && v.get<long long>() < 0) throw ConfigurationError(name + ": must be >= 0");
  } else {
    if (!v.is_number()) throw ConfigurationError(name + ": expected a number");
    if (!std::isfinite(v.get<double>())) throw ConfigurationError(name + ": must be finite");
  }
  return v.get<T>();
}

inline Point point_field(const json& j, const std::string& where, const char* key, Point fallback) {
  const std::string name = where + "." + key;
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigurationError(name + ": expected [x, y]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

inline ShapeSpec parse_shape(const json& j) {
  const std::string w = "initial_shape";
  if (!j.is_object()) throw ConfigurationError(w + ": expected an object");
  ShapeSpec sh;
  const auto type = field<std::string>(j, w, "type");
  if (type == "disc") {
    only_keys(j, w, {"type", "r0", "center"});
    sh.kind = ShapeSpec::Kind::disc;
    sh.r0 = field<double>(j, w, "r0", 1.0);
    if (!(sh.r0 > 0)) throw ConfigurationError(w + ".r0: must be > 0");
  } else if (type == "ellipse") {
    only_keys(j, w, {"type", "a", "b", "center"});
    sh.kind = ShapeSpec::Kind::ellipse;
    sh.a = field<double>(j, w, "a");
    sh.b = field<double>(j, w, "b");
    if (!(sh.a > 0 && sh.b > 0)) throw ConfigurationError(w + ".a, " + w + ".b: must be > 0");
  } else if (type == "fourier_circle") {
    only_keys(j, w, {"type", "r0", "center", "modes"});
    sh.kind = ShapeSpec::Kind::fourier_circle;
    sh.r0 = field<double>(j, w, "r0", 1.0);
    if (!(sh.r0 > 0)) throw ConfigurationError(w + ".r0: must be > 0");
    const json& m = j.contains("modes") ? j.at("modes") : json::array();
    if (!m.is_array()) throw ConfigurationError(w + ".modes: expected an array");
    double total = 0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      const std::string mw = w + ".modes[" + std::to_string(k) + "]";
      only_keys(m[k], mw, {"k", "amplitude", "phase"});
      FourierMode fm{field<int>(m[k], mw, "k"), field<double>(m[k], mw, "amplitude"),
                     field<double>(m[k], mw, "phase", 0.0)};
      if (fm.k < 1) throw ConfigurationError(mw + ".k: must be >= 1");
      total += std::abs(fm.amplitude);
      sh.modes.push_back(fm);
    }
    if (!(total < 1)) throw ConfigurationError(w + ".modes: sum of |amplitude| must be < 1");
  } else if (type == "polygon_file") {
    only_keys(j, w, {"type", "path"});
    sh.kind = ShapeSpec::Kind::polygon_file;
    sh.path = field<std::string>(j, w, "path");
  } else {
    throw ConfigurationError(w + ".type: expected disc, ellipse, fourier_circle or polygon_file");
  }
  sh.center = point_field(j, w, "center", {0, 0});
  return sh;
}

inline GridSpec parse_grid(const json& j) {
  const std::string w = "grid";
  only_keys(j, w, {"n", "lo", "hi", "tube", "dump"});
  GridSpec g;
  g.n = field<std::size_t>(j, w, "n", g.n);
  if (g.n < 16) throw ConfigurationError("grid.n: must be >= 16");
  if (j.contains("lo") != j.contains("hi")) throw ConfigurationError("grid.lo, grid.hi: give both or neither");
  if (j.contains("lo")) {
    g.lo = point_field(j, w, "lo", {});
    g.hi = point_field(j, w, "hi", {});
    if (!(g.hi->x > g.lo->x && g.hi->y > g.lo->y)) throw ConfigurationError("grid.hi: must exceed grid.lo");
  }
  g.tube = field<double>(j, w, "tube", 0.0);
  if (g.tube < 0) throw ConfigurationError("grid.tube: must be >= 0");
  g.dump = field<bool>(j, w, "dump", true);
  return g;
}

}  // namespace detail

/// Parses and validates a JSON run configuration. Every error message starts
/// with the offending field.
inline RunConfig parse_run_config(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(std::string("config: not valid JSON: ") + e.what());
  }
  detail::only_keys(j, "", {"initial_shape", "n_markers", "ds", "s_end", "redistribute_every",
                            "spacing_ratio_trigger", "snapshot_every", "gamma", "c_cal", "output_dir", "grid",
                            "seed", "svg"});
  RunConfig c;
  if (!j.contains("initial_shape")) throw ConfigurationError("initial_shape: required field missing");
  c.initial_shape = detail::parse_shape(j.at("initial_shape"));
  const auto n = detail::field<long long>(j, "", "n_markers");
  if (n < 8) throw ConfigurationError("n_markers: n_markers ≥ 8 required, got " + std::to_string(n));
  c.n_markers = static_cast<std::size_t>(n);
  c.ds = detail::field<double>(j, "", "ds");
  if (!(c.ds > 0 && c.ds <= 0.1)) throw ConfigurationError("ds: must satisfy 0 < ds ≤ 0.1");
  c.s_end = detail::field<double>(j, "", "s_end");
  c.redistribute_every = detail::field<std::size_t>(j, "", "redistribute_every", 0);
  c.spacing_ratio_trigger = detail::field<double>(j, "", "spacing_ratio_trigger", 2.0);
  if (!(c.spacing_ratio_trigger > 1)) throw ConfigurationError("spacing_ratio_trigger: must be > 1");
  c.snapshot_every = detail::field<std::size_t>(j, "", "snapshot_every", 1);
  if (c.snapshot_every < 1) throw ConfigurationError("snapshot_every: must be ≥ 1");
  c.gamma = detail::field<double>(j, "", "gamma", 0.5);
  if (!(c.gamma > 0 && c.gamma < 1)) throw ConfigurationError("gamma: must lie in (0,1)");
  c.c_cal = detail::field<double>(j, "", "c_cal", 1.0);
  if (!(c.c_cal > 0)) throw ConfigurationError("c_cal: must be > 0");
  c.output_dir = detail::field<std::string>(j, "", "output_dir", std::string("out"));
  if (c.output_dir.empty()) throw ConfigurationError("output_dir: must not be empty");
  if (j.contains("grid") && !j.at("grid").is_null()) c.grid = detail::parse_grid(j.at("grid"));
  c.seed = detail::field<std::uint64_t>(j, "", "seed", 0);
  c.svg = detail::field<bool>(j, "", "svg", false);
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

/// Initial marker curve with n markers. Polygon files are densified along
/// their edges and redistributed to equal arc length.
inline MarkerCurve<double> initial_curve(const ShapeSpec& sh, std::size_t n) {
  switch (sh.kind) {
    case ShapeSpec::Kind::disc:
      return MarkerCurve<double>(disc_points(n, sh.r0, sh.center));
    case ShapeSpec::Kind::ellipse:
      return MarkerCurve<double>(ellipse_points(n, sh.a, sh.b, sh.center));
    case ShapeSpec::Kind::fourier_circle:
      return MarkerCurve<double>(fourier_circle_points(n, sh.r0, sh.modes, sh.center));
    case ShapeSpec::Kind::polygon_file: {
      auto pts = read_polygon_file(sh.path);
      if (pts.size() < 3) throw ConfigurationError("initial_shape.path: need at least 3 vertices");
      if (signed_area(std::span<const Point>(pts)) < 0) std::reverse(pts.begin(), pts.end());
      // split edges so the spline of the redistribution hugs the polygon
      const std::size_t per_edge = (4 * n + pts.size() - 1) / pts.size();
      std::vector<Point> dense;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const Point a = pts[i], b = pts[(i + 1) % pts.size()];
        for (std::size_t k = 0; k < per_edge; ++k) {
          dense.push_back(a + (b - a) * (static_cast<double>(k) / static_cast<double>(per_edge)));
        }
      }
      MarkerCurve<double> c;
      try {
        c = MarkerCurve<double>(std::move(dense));
      } catch (const GeometryError& e) {
        throw ConfigurationError("initial_shape.path: " + std::string(e.what()));
      }
      return redistribute(c, n);
    }
  }
  throw ConfigurationError("initial_shape: unknown type");
}

/// Defining function of the initial shape, negative inside.
inline std::function<double(Point)> initial_defining_function(const ShapeSpec& sh, const MarkerCurve<double>& c0) {
  switch (sh.kind) {
    case ShapeSpec::Kind::disc:
      return [r2 = sh.r0 * sh.r0, c = sh.center](Point x) { return norm2(x - c) - r2; };
    case ShapeSpec::Kind::ellipse:
      return [sh](Point x) {
        const Point y = x - sh.center;
        return y.x * y.x / (sh.a * sh.a) + y.y * y.y / (sh.b * sh.b) - 1;
      };
    case ShapeSpec::Kind::fourier_circle:
      return [sh](Point x) {
        const Point y = x - sh.center;
        const double r = fourier_radius(sh.r0, sh.modes, std::atan2(y.y, y.x));
        return norm2(y) - r * r;
      };
    case ShapeSpec::Kind::polygon_file:
      return [c0](Point x) {
        const double d = distance_to_polyline(c0, x);
        return winding_number(c0, x) != 0 ? -d : d;
      };
  }
  throw ConfigurationError("initial_shape: unknown type");
}

}  // namespace aggpatch
