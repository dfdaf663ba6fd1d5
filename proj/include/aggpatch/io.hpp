#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "geometry.hpp"
#include "levelset.hpp"
#include "shapes.hpp"
#include "vec2.hpp"

namespace aggpatch {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Snapshot {
  double s = 0;
  double t = 0;
  double area = 0;
  Point centroid;
  std::vector<Point> points;
};

/// Header values come from the fourth-order smooth moments.
inline Snapshot make_snapshot(const MarkerCurve<double>& curve, double s) {
  const auto m = smooth_moments(curve);
  return {s, -std::expm1(-s), m.area, m.centroid, curve.markers()};
}

inline void write_snapshot(std::ostream& out, const Snapshot& snap) {
  out << "# s=" << fmt17(snap.s) << " t=" << fmt17(snap.t) << " area=" << fmt17(snap.area)
      << " cx=" << fmt17(snap.centroid.x) << " cy=" << fmt17(snap.centroid.y) << " n=" << snap.points.size()
      << '\n';
  for (const auto& p : snap.points) out << fmt17(p.x) << ' ' << fmt17(p.y) << '\n';
}

inline void write_snapshot(const std::string& path, const Snapshot& snap) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path);
  write_snapshot(out, snap);
}

inline Snapshot read_snapshot(std::istream& in, const std::string& what = "snapshot") {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ", 0) != 0) {
    throw ConfigurationError(what + ": missing '# s=... n=...' header");
  }
  Snapshot snap;
  std::size_t n = 0;
  bool seen[6] = {};
  std::istringstream hs(header.substr(2));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ConfigurationError(what + ": bad header token '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    try {
      if (key == "s") snap.s = std::stod(val), seen[0] = true;
      else if (key == "t") snap.t = std::stod(val), seen[1] = true;
      else if (key == "area") snap.area = std::stod(val), seen[2] = true;
      else if (key == "cx") snap.centroid.x = std::stod(val), seen[3] = true;
      else if (key == "cy") snap.centroid.y = std::stod(val), seen[4] = true;
      else if (key == "n") n = std::stoul(val), seen[5] = true;
      else throw ConfigurationError(what + ": unknown header key '" + key + "'");
    } catch (const std::logic_error&) {
      throw ConfigurationError(what + ": bad value for '" + key + "'");
    }
  }
  for (bool b : seen) {
    if (!b) throw ConfigurationError(what + ": header needs s, t, area, cx, cy and n");
  }
  snap.points = read_points(in, what);
  if (snap.points.size() != n) {
    throw ConfigurationError(what + ": header says n=" + std::to_string(n) + " but found " +
                             std::to_string(snap.points.size()) + " points");
  }
  return snap;
}

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open snapshot " + path);
  return read_snapshot(in, path);
}

/// Grid dump: one JSON header line, then ny rows of nx comma-separated values
/// (row j holds y = origin.y + j*spacing).
inline void write_grid(std::ostream& out, const DefiningGrid& g) {
  nlohmann::json h = {{"origin", {g.origin.x, g.origin.y}}, {"spacing", g.spacing},
                      {"nx", g.nx},                         {"ny", g.ny},
                      {"s", g.s}};
  out << h.dump() << '\n';
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) out << (i ? "," : "") << fmt17(g.at(i, j));
    out << '\n';
  }
}

inline void write_grid(const std::string& path, const DefiningGrid& g) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path);
  write_grid(out, g);
}

inline DefiningGrid read_grid(std::istream& in, const std::string& what = "grid") {
  std::string line;
  if (!std::getline(in, line)) throw ConfigurationError(what + ": empty file");
  DefiningGrid g;
  try {
    const auto h = nlohmann::json::parse(line);
    g.origin = {h.at("origin").at(0).get<double>(), h.at("origin").at(1).get<double>()};
    g.spacing = h.at("spacing").get<double>();
    g.nx = h.at("nx").get<std::size_t>();
    g.ny = h.at("ny").get<std::size_t>();
    g.s = h.value("s", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(what + ": bad header: " + e.what());
  }
  g.values.reserve(g.nx * g.ny);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ls, cell, ',')) {
      try {
        g.values.push_back(std::stod(cell));
      } catch (const std::logic_error&) {
        throw ConfigurationError(what + ": bad value in row " + std::to_string(rows));
      }
      ++cols;
    }
    if (cols != g.nx) throw ConfigurationError(what + ": row " + std::to_string(rows) + " has wrong length");
    ++rows;
  }
  if (rows != g.ny) throw ConfigurationError(what + ": expected " + std::to_string(g.ny) + " rows");
  g.validate();
  return g;
}

inline DefiningGrid read_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open grid " + path);
  return read_grid(in, path);
}

struct DiagnosticsRow {
  double s = 0, t = 0, area = 0, area_ratio_error = NAN, cx = 0, cy = 0, mu = NAN, q = NAN, sup_gradv = NAN,
         log_bound_ratio = NAN, tangent_holder = NAN, min_spacing = 0, max_spacing = 0;
};

inline const char* diagnostics_header() {
  return "s,t,area,area_ratio_error,cx,cy,mu,q,sup_gradv,log_bound_ratio,tangent_holder,min_spacing,max_spacing";
}

inline void write_row(std::ostream& out, const DiagnosticsRow& r) {
  const double v[] = {r.s,  r.t,         r.area,      r.area_ratio_error, r.cx,
                      r.cy, r.mu,        r.q,         r.sup_gradv,        r.log_bound_ratio,
                      r.tangent_holder, r.min_spacing, r.max_spacing};
  for (std::size_t k = 0; k < std::size(v); ++k) out << (k ? "," : "") << fmt17(v[k]);
  out << '\n';
}

/// Static SVG of one or more closed polylines in a fixed view box (y up).
inline void write_svg(const std::string& path, const std::vector<std::vector<Point>>& components, Point lo,
                      Point hi, const std::string& title = "") {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path);
  const double pad = 0.05 * std::max(hi.x - lo.x, hi.y - lo.y);
  const double w = hi.x - lo.x + 2 * pad, h = hi.y - lo.y + 2 * pad;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"" << fmt17(600 * h / w)
      << "\" viewBox=\"" << fmt17(lo.x - pad) << ' ' << fmt17(-hi.y - pad) << ' ' << fmt17(w) << ' ' << fmt17(h)
      << "\">\n";
  if (!title.empty()) out << "<title>" << title << "</title>\n";
  for (const auto& c : components) {
    out << "<polygon fill=\"#9ecae1\" stroke=\"#08519c\" stroke-width=\"" << fmt17(0.003 * w) << "\" points=\"";
    for (std::size_t i = 0; i < c.size(); ++i) out << (i ? " " : "") << fmt17(c[i].x) << ',' << fmt17(-c[i].y);
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace aggpatch
