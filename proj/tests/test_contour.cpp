#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "aggpatch/contour.hpp"
#include "oracles.hpp"

using namespace aggpatch;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
MarkerCurve<double> circle(std::size_t n, double r = 1, Point c = {0, 0}) {
  return MarkerCurve<double>(oracle::circle_points(n, r, c));
}

double max_radial_error(const MarkerCurve<double>& c, Point centre, double r) {
  double e = 0;
  for (const auto& p : c) e = std::max(e, std::abs(norm(p - centre) - r));
  return e;
}
}  // namespace

TEST_CASE("disc boundary velocity") {
  const auto c = circle(256);
  const auto v0 = boundary_velocity(c, 0);
  CHECK_THAT(v0.x, WithinAbs(-0.5, 1e-6));
  CHECK_THAT(v0.y, WithinAbs(0, 1e-6));
  const auto v = velocity_field_on_markers(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(norm(v[i] + c[i] * 0.5) < 1e-6);
    CHECK(norm(v[i] - boundary_velocity(c, i)) < 1e-13);
  }
  CHECK_THROWS_AS(boundary_velocity(c, 256), ConfigurationError);
}

TEST_CASE("translation and scaling of the disc") {
  const Point ctr{3, -2};
  const auto c = circle(256, 1, ctr);
  const auto v = velocity_field_on_markers(c);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(norm(v[i] + (c[i] - ctr) * 0.5) < 1e-6);
  const auto big = circle(256, 2);
  const auto vb = boundary_velocity(big, 0);
  CHECK_THAT(vb.x, WithinAbs(-1, 1e-6));
  CHECK_THAT(vb.y, WithinAbs(0, 1e-6));
}

TEST_CASE("ellipse boundary velocity against the area oracle") {
  const MarkerCurve<double> e(oracle::ellipse_points(512, 2, 1));
  const auto v = boundary_velocity(e, 0);
  // interior field (-b x/(a+b), -a y/(a+b)) at (2,0); polar ray oracle agrees
  const auto ref = oracle::ellipse_velocity(2, 1, {2, 0});
  CHECK_THAT(ref.x, WithinAbs(-2.0 / 3, 1e-6));
  CHECK_THAT(v.x, WithinAbs(-2.0 / 3, 2e-3));
  CHECK_THAT(v.y, WithinAbs(0, 2e-3));
}

TEST_CASE("quadrature order on the disc") {
  std::vector<double> hs, errs;
  for (std::size_t n : {64, 128, 256}) {
    // slightly irrational phase so no marker sits on an axis
    const MarkerCurve<double> c(oracle::circle_points(n, 1, {0, 0}, 0.1234));
    const auto v = velocity_field_on_markers(c);
    double err = 0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, norm(v[i] + c[i] * 0.5));
    hs.push_back(1.0 / n);
    errs.push_back(err);
  }
  CHECK(oracle::observed_order(hs, errs) >= 2);
}

TEST_CASE("single rk4 step") {
  const auto st = PatchState<double>::initial(circle(128));
  StepperConfig cfg;
  cfg.ds = 0;
  const auto same = rk4_step(st, cfg);
  for (std::size_t i = 0; i < 128; ++i) CHECK(same.curve[i] == st.curve[i]);
  cfg.ds = 1e-3;
  const auto next = rk4_step(st, cfg);
  CHECK(next.s == 1e-3);
  CHECK(max_radial_error(next.curve, {0, 0}, std::exp(-0.0005)) < 1e-9);
  cfg.ds = 0.2;
  CHECK_THROWS_AS(rk4_step(st, cfg), ConfigurationError);
}

TEST_CASE("runs land on s_end") {
  StepperConfig cfg;
  cfg.ds = 1e-2;
  SECTION("forward") {
    auto st = PatchState<double>::initial(circle(128));
    std::size_t calls = 0;
    const auto res = run<double>(st, cfg, 0.253, [&](const PatchState<double>&) { ++calls; });
    CHECK(res.state.s == 0.253);
    CHECK(calls == 26);
    CHECK_FALSE(res.blow_up);
  }
  SECTION("backward spreading") {
    cfg.ds = 2e-3;
    const auto res = run<double>(PatchState<double>::initial(circle(256)), cfg, -1.0);
    CHECK(res.state.s == -1.0);
    CHECK(max_radial_error(res.state.curve, {0, 0}, std::exp(0.5)) < 1e-5);
  }
}

TEST_CASE("centroid and area along a perturbed run") {
  const Point ctr{3, -2};
  const MarkerCurve<double> c(oracle::fourier_points(256, 1, {{3, 0.1, 0.0}, {4, 0.1, 0.0}}, ctr));
  StepperConfig cfg;
  cfg.ds = 1e-2;
  const auto m0 = metrics(c);
  const auto c0 = smooth_moments(c).centroid;
  double worst_area = 0, worst_drift = 0;
  run<double>(PatchState<double>::initial(c), cfg, 1.0, [&](const PatchState<double>& st) {
    const auto m = metrics(st.curve);
    worst_drift = std::max(worst_drift, norm(smooth_moments(st.curve).centroid - c0));
    worst_area = std::max(worst_area, std::abs(std::log(m.area / m0.area) + static_cast<double>(st.s)));
  });
  CHECK(worst_area <= 5 * 1e-4 + 10.0 / (256.0 * 256.0));
  CHECK(worst_drift <= 1e-7 * m0.diameter);
}

TEST_CASE("velocity sup bound") {
  for (const auto& pts : {oracle::circle_points(128), oracle::ellipse_points(256, 2, 1),
                          oracle::fourier_points(256, 1, {{3, 0.2, 0.0}, {5, 0.1, 1.0}})}) {
    const MarkerCurve<double> c(pts);
    const double bound = 2 * std::sqrt(metrics(c).area);
    for (const auto& v : velocity_field_on_markers(c)) CHECK(norm(v) <= bound);
  }
}

TEST_CASE("redistribution inside the stepper keeps labels aligned") {
  const MarkerCurve<double> c(oracle::ellipse_points(128, 2, 1));
  StepperConfig cfg;
  cfg.ds = 1e-2;
  cfg.redistribute_every = 5;
  cfg.n_markers = 160;
  const auto res = run<double>(PatchState<double>::initial(c), cfg, 0.1);
  CHECK(res.state.curve.size() == 160);
  CHECK(res.state.labels.size() == 160);
  // labels are initial positions, so they lie on the initial ellipse
  for (const auto& a : res.state.labels) {
    CHECK_THAT(a.x * a.x / 4 + a.y * a.y, WithinAbs(1, 1e-4));
  }
}
