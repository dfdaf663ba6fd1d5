#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "vec2.hpp"

namespace aggpatch {

struct FourierMode {
  int k = 0;
  double amplitude = 0;
  double phase = 0;
};

/// Counter-clockwise samples at equal angles, marker 0 at angle 0.
inline std::vector<Point> disc_points(std::size_t n, double r0, Point center = {0, 0}) {
  if (!(r0 > 0)) throw ConfigurationError("disc: r0 must be > 0");
  std::vector<Point> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    p[i] = center + Point{r0 * std::cos(th), r0 * std::sin(th)};
  }
  return p;
}

inline std::vector<Point> ellipse_points(std::size_t n, double a, double b, Point center = {0, 0}) {
  if (!(a > 0 && b > 0)) throw ConfigurationError("ellipse: axes must be > 0");
  std::vector<Point> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    p[i] = center + Point{a * std::cos(th), b * std::sin(th)};
  }
  return p;
}

/// r(theta) = r0 (1 + sum a_k cos(k theta + phase_k)).
inline double fourier_radius(double r0, const std::vector<FourierMode>& modes, double th) {
  double r = 1;
  for (const auto& m : modes) r += m.amplitude * std::cos(m.k * th + m.phase);
  return r0 * r;
}

inline std::vector<Point> fourier_circle_points(std::size_t n, double r0, const std::vector<FourierMode>& modes,
                                                Point center = {0, 0}) {
  if (!(r0 > 0)) throw ConfigurationError("fourier_circle: r0 must be > 0");
  std::vector<Point> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    const double r = fourier_radius(r0, modes, th);
    if (!(r > 0)) throw ConfigurationError("fourier_circle: radius must stay positive");
    p[i] = center + Point{r * std::cos(th), r * std::sin(th)};
  }
  return p;
}

/// Whitespace-separated "x y" lines; blank lines and lines starting with '#'
/// are skipped.
inline std::vector<Point> read_points(std::istream& in, const std::string& what) {
  std::vector<Point> p;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Point q;
    std::string rest;
    if (!(ls >> q.x >> q.y) || (ls >> rest)) {
      throw ConfigurationError(what + ": line " + std::to_string(lineno) + " is not \"x y\"");
    }
    p.push_back(q);
  }
  return p;
}

inline std::vector<Point> read_polygon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("polygon_file: cannot open " + path);
  return read_points(in, path);
}

}  // namespace aggpatch
