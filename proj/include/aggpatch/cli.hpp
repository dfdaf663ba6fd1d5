#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "config.hpp"
#include "contour.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "exact.hpp"
#include "io.hpp"
#include "levelset.hpp"
#include "shapes.hpp"

namespace aggpatch::cli {

enum ExitCode : int { ok = 0, user_error = 1, blow_up = 2, numerical_failure = 3 };

/// LOGLEVEL in {error, warn, info, debug}; anything else keeps info.
inline void configure_logging() {
  const char* env = std::getenv("LOGLEVEL");
  const std::string v = env ? env : "info";
  if (v == "error") spdlog::set_level(spdlog::level::err);
  else if (v == "warn") spdlog::set_level(spdlog::level::warn);
  else if (v == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::set_level(spdlog::level::info);
  if (env && v != "error" && v != "warn" && v != "info" && v != "debug") {
    spdlog::warn("LOGLEVEL={} not recognised, using info", v);
  }
}

inline std::string numbered(const std::filesystem::path& dir, const char* stem, std::size_t k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%06zu.%s", stem, k, ext);
  return (dir / buf).string();
}

struct RunOutcome {
  int exit_code = ok;
  PatchState<double> state;
  bool blow_up = false;
  std::string reason;
  std::size_t snapshots = 0;
};

namespace detail {

inline DefiningGrid initial_grid(const RunConfig& cfg, const MarkerCurve<double>& c0) {
  const GridSpec& gs = *cfg.grid;
  Point lo, hi;
  if (gs.lo) {
    lo = *gs.lo;
    hi = *gs.hi;
  } else {
    Point a = c0[0], b = c0[0];
    for (const auto& p : c0) {
      a = {std::min(a.x, p.x), std::min(a.y, p.y)};
      b = {std::max(b.x, p.x), std::max(b.y, p.y)};
    }
    // backward runs spread the patch by about e^{-s/2}
    const double grow = std::max(1.0, std::exp(-cfg.s_end / 2));
    const double half = 0.5 * std::max(b.x - a.x, b.y - a.y) * grow + 0.25 * metrics(c0).diameter;
    const Point mid = (a + b) * 0.5;
    lo = mid - Point{half, half};
    hi = mid + Point{half, half};
  }
  const double h = std::max(hi.x - lo.x, hi.y - lo.y) / static_cast<double>(gs.n - 1);
  const auto nx = static_cast<std::size_t>(std::ceil((hi.x - lo.x) / h - 1e-9)) + 1;
  const auto ny = static_cast<std::size_t>(std::ceil((hi.y - lo.y) / h - 1e-9)) + 1;
  return DefiningGrid::sample(lo, h, nx, ny, initial_defining_function(cfg.initial_shape, c0), 0);
}

}  // namespace detail

/// Contour run driven by a validated config: snapshots, diagnostics CSV,
/// optional grid dumps and SVG frames under output_dir. Library errors
/// propagate to the caller.
inline RunOutcome execute_run(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  const auto c0 = initial_curve(cfg.initial_shape, cfg.n_markers);
  StepperConfig sc;
  sc.ds = cfg.ds;
  sc.redistribute_every = cfg.redistribute_every;
  sc.n_markers = cfg.n_markers;
  sc.spacing_ratio_trigger = cfg.spacing_ratio_trigger;
  sc.validate();

  std::optional<DefiningGrid> grid;
  if (cfg.grid) grid = detail::initial_grid(cfg, c0);
  TraceOptions trace;
  trace.step = std::max(2 * cfg.ds, 0.01);
  FlowHistory segment(cfg.ds);
  std::size_t last_redistributions = 0;

  std::ofstream csv(dir / "diagnostics.csv");
  if (!csv) throw ConfigurationError("output_dir: cannot write diagnostics.csv");
  csv << diagnostics_header() << '\n';

  DiagnosticsOptions dopt;
  dopt.gamma = cfg.gamma;
  dopt.c_cal = cfg.c_cal;
  dopt.seed = cfg.seed;
  dopt.area0 = smooth_moments(c0).area;
  if (cfg.grid) dopt.tube = cfg.grid->tube;

  RunOutcome outcome;
  std::vector<std::vector<Point>> frames;
  std::optional<double> last_emitted;

  auto emit = [&](const PatchState<double>& st) {
    const std::size_t k = outcome.snapshots++;
    write_snapshot(numbered(dir, "snap", k, "txt"), make_snapshot(st.curve, st.s));
    if (grid) {
      if (st.s != grid->s) {
        grid = transport_phi(segment, *grid, st.s, true, trace);
        segment = FlowHistory(cfg.ds);
        segment.push(st.s, st.curve);
      }
      if (cfg.grid->dump) write_grid(numbered(dir, "grid", k, "txt"), *grid);
    }
    std::string note;
    const auto row = diagnostics_row(st.curve, st.s, dopt, &st.labels, grid ? &*grid : nullptr, &note);
    if (!note.empty() && grid) spdlog::warn("s={}: {}", st.s, note);
    write_row(csv, row);
    csv.flush();
    if (cfg.svg) frames.push_back(st.curve.markers());
    last_emitted = st.s;
    spdlog::debug("snapshot {} at s={} area={}", k, st.s, row.area);
  };

  auto st0 = PatchState<double>::initial(c0);
  segment.push(st0.s, st0.curve);
  emit(st0);
  const auto res = run<double>(st0, sc, cfg.s_end, [&](const PatchState<double>& st) {
    segment.push(st.s, st.curve, st.redistributions == last_redistributions);
    last_redistributions = st.redistributions;
    if (st.steps % cfg.snapshot_every == 0) emit(st);
  });
  if (!last_emitted || *last_emitted != res.state.s) emit(res.state);

  if (cfg.svg && !frames.empty()) {
    Point lo = frames[0][0], hi = frames[0][0];
    for (const auto& f : frames) {
      for (const auto& p : f) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
      }
    }
    for (std::size_t k = 0; k < frames.size(); ++k) {
      write_svg(numbered(dir, "frame", k, "svg"), {frames[k]}, lo, hi);
    }
  }

  outcome.state = res.state;
  outcome.blow_up = res.blow_up;
  outcome.reason = res.reason;
  if (res.blow_up) {
    spdlog::warn("blow-up at s={}: {}", res.state.s, res.reason);
    outcome.exit_code = blow_up;
  } else {
    spdlog::info("run finished at s={} after {} steps", res.state.s, res.state.steps);
  }
  return outcome;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigurationError& e) {
    spdlog::error("{}", e.what());
    return user_error;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return user_error;
  } catch (const Error& e) {
    spdlog::error("numerical failure: {}", e.what());
    return numerical_failure;
  }
}

inline int cmd_run(const std::string& config_path) {
  return guarded([&] { return execute_run(load_run_config(config_path)).exit_code; });
}

/// Analytic reference named by a JSON document, given inline or as a file:
/// {"solution": "disc", "r0", "center", "s", "n", "tolerance"} or
/// {"solution": "ellipse", "a", "b", "center", "s", "n", "tolerance"}.
struct ExactSpec {
  std::string solution = "disc";
  double r0 = 1;
  double a = 2, b = 1;
  Point center{0, 0};
  std::optional<double> s;
  std::size_t n = 256;
  double tolerance = 1e-4;
};

inline ExactSpec parse_exact_spec(const std::string& text_or_path) {
  std::string text = text_or_path;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text[first] != '{') {
    std::ifstream in(text_or_path);
    if (!in) throw ConfigurationError("exact spec: cannot read " + text_or_path);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigurationError(std::string("exact spec: not valid JSON: ") + e.what());
  }
  using aggpatch::detail::field;
  aggpatch::detail::only_keys(j, "", {"solution", "r0", "a", "b", "center", "s", "n", "tolerance"});
  ExactSpec e;
  e.solution = field<std::string>(j, "", "solution");
  if (e.solution == "disc") {
    e.r0 = field<double>(j, "", "r0", 1.0);
    if (!(e.r0 > 0)) throw ConfigurationError("r0: must be > 0");
    e.tolerance = 1e-4;
  } else if (e.solution == "ellipse") {
    e.a = field<double>(j, "", "a");
    e.b = field<double>(j, "", "b");
    if (!(e.a >= e.b && e.b > 0)) throw ConfigurationError("a, b: need a ≥ b > 0");
    e.tolerance = 1e-3;
  } else {
    throw ConfigurationError("solution: expected disc or ellipse");
  }
  e.center = aggpatch::detail::point_field(j, "", "center", {0, 0});
  if (j.contains("s")) e.s = field<double>(j, "", "s");
  e.n = field<std::size_t>(j, "", "n", e.n);
  if (e.n < 8) throw ConfigurationError("n: n ≥ 8 required");
  e.tolerance = field<double>(j, "", "tolerance", e.tolerance);
  return e;
}

/// Semi-axes (or radius twice) of the reference boundary at s.
inline std::pair<double, double> exact_axes(const ExactSpec& e, double s) {
  if (e.solution == "disc") {
    const double r = exact::disc_radius({e.r0, e.center}, s);
    return {r, r};
  }
  const auto ax = exact::ellipse_axes({e.a, e.b}, s);
  return {ax.a, ax.b};
}

inline Snapshot exact_snapshot(const ExactSpec& e) {
  const double s = e.s.value_or(0.0);
  const auto [a, b] = exact_axes(e, s);
  const MarkerCurve<double> c(ellipse_points(e.n, a, b, e.center));
  return make_snapshot(c, s);
}

struct CompareReport {
  double s = 0;
  double max_deviation = 0;
  double mean_deviation = 0;
  double axis_deviation = NAN;  // ellipse only: fitted against exact semi-axes
  double tolerance = 0;
  bool pass = false;
};

inline CompareReport compare_snapshot(const Snapshot& snap, const ExactSpec& e) {
  if (e.s && std::abs(*e.s - snap.s) > 1e-9 * std::max(1.0, std::abs(snap.s))) {
    throw ConfigurationError("s: snapshot is at s=" + fmt17(snap.s) + " but the exact spec asks for s=" +
                             fmt17(*e.s));
  }
  CompareReport r;
  r.s = snap.s;
  r.tolerance = e.tolerance;
  const auto [a, b] = exact_axes(e, snap.s);
  for (const Point& p : snap.points) {
    const Point y = p - e.center;
    double d;
    if (e.solution == "disc") {
      d = std::abs(norm(y) - a);
    } else {
      // first-order distance |F| / |grad F| to F = (x/a)^2 + (y/b)^2 - 1
      const double f = y.x * y.x / (a * a) + y.y * y.y / (b * b) - 1;
      d = std::abs(f) / norm(Point{2 * y.x / (a * a), 2 * y.y / (b * b)});
    }
    r.max_deviation = std::max(r.max_deviation, d);
    r.mean_deviation += d;
  }
  r.mean_deviation /= static_cast<double>(snap.points.size());
  if (e.solution == "ellipse") {
    const auto fit = fit_ellipse(MarkerCurve<double>(snap.points));
    const double fa = std::max(fit.a, fit.b), fb = std::min(fit.a, fit.b);
    r.axis_deviation = std::max(std::abs(fa - a), std::abs(fb - b));
    r.pass = r.axis_deviation <= e.tolerance;
  } else {
    r.pass = r.max_deviation <= e.tolerance;
  }
  return r;
}

/// Exit 0 within tolerance, 3 outside it, 1 on unreadable input or mismatched s.
inline int cmd_compare(const std::string& snapshot_path, const std::string& spec, std::ostream& out) {
  return guarded([&] {
    const auto r = compare_snapshot(read_snapshot(snapshot_path), parse_exact_spec(spec));
    out << "s=" << fmt17(r.s) << " max_deviation=" << fmt17(r.max_deviation)
        << " mean_deviation=" << fmt17(r.mean_deviation);
    if (std::isfinite(r.axis_deviation)) out << " axis_deviation=" << fmt17(r.axis_deviation);
    out << " tolerance=" << fmt17(r.tolerance) << (r.pass ? " PASS" : " FAIL") << '\n';
    return r.pass ? ok : numerical_failure;
  });
}

struct DiagOptions {
  double gamma = 0.5;
  double c_cal = 1;
  double tube = 0;
  std::uint64_t seed = 0;
  std::string reference;  // initial snapshot: area0 and mu
};

/// Header and one diagnostics row for an offline snapshot.
inline int cmd_diag(const std::string& snapshot_path, const std::optional<std::string>& grid_path,
                    const DiagOptions& o, std::ostream& out) {
  return guarded([&] {
    const auto snap = read_snapshot(snapshot_path);
    const MarkerCurve<double> curve(snap.points);
    DiagnosticsOptions dopt;
    dopt.gamma = o.gamma;
    dopt.c_cal = o.c_cal;
    dopt.tube = o.tube;
    dopt.seed = o.seed;
    std::optional<Snapshot> ref;
    if (!o.reference.empty()) {
      ref = read_snapshot(o.reference);
      dopt.area0 = ref->area;
      dopt.s0 = ref->s;
    }
    std::optional<DefiningGrid> grid;
    if (grid_path) grid = read_grid(*grid_path);
    std::string note;
    const auto row = diagnostics_row(curve, snap.s, dopt, ref ? &ref->points : nullptr, grid ? &*grid : nullptr,
                                     &note);
    if (!note.empty()) spdlog::warn("{}", note);
    out << diagnostics_header() << '\n';
    write_row(out, row);
    return ok;
  });
}

/// Writes the analytic boundary as a snapshot; "-" or empty means stdout.
inline int cmd_exact(const std::string& spec, const std::string& out_path, std::ostream& out) {
  return guarded([&] {
    const auto snap = exact_snapshot(parse_exact_spec(spec));
    if (out_path.empty() || out_path == "-") {
      write_snapshot(out, snap);
    } else {
      write_snapshot(out_path, snap);
    }
    return ok;
  });
}

}  // namespace aggpatch::cli
