#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "aggpatch/contour.hpp"
#include "aggpatch/exact.hpp"
#include "aggpatch/levelset.hpp"
#include "oracles.hpp"

using namespace aggpatch;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
MarkerCurve<double> disc(std::size_t n, double r = 1) {
  return MarkerCurve<double>(oracle::circle_points(n, r));
}

// contour run of the unit disc with every step recorded
FlowHistory disc_history(double s_end, double ds, std::size_t n = 128) {
  FlowHistory h(ds);
  auto st = PatchState<double>::initial(disc(n));
  h.push(0, st.curve);
  StepperConfig cfg;
  cfg.ds = ds;
  run<double>(st, cfg, s_end, [&](const PatchState<double>& s) { h.push(s.s, s.curve); });
  return h;
}

double sq(Point p) { return norm2(p) - 1; }
}  // namespace

TEST_CASE("bicubic grid interpolation") {
  auto quad = [](Point p) { return 0.3 * p.x * p.x - 1.1 * p.x * p.y + 0.7 * p.y * p.y + p.x - 2; };
  const auto g = DefiningGrid::square(-2, 2, 41, quad);
  for (Point x : {Point{0.013, -0.41}, Point{1.234, 0.987}, Point{-1.5, 1.61}}) {
    CHECK_THAT(g(x), WithinAbs(quad(x), 1e-12));
    const Point grad = g.gradient(x);
    CHECK_THAT(grad.x, WithinAbs(0.6 * x.x - 1.1 * x.y + 1, 1e-11));
    CHECK_THAT(grad.y, WithinAbs(-1.1 * x.x + 1.4 * x.y, 1e-11));
  }
  CHECK(g.interior({0, 0}));
  CHECK_FALSE(g.interior({1.95, 0}));
  CHECK_THROWS_AS(DefiningGrid::square(0, 1, 3, quad), ConfigurationError);
}

TEST_CASE("graph radius") {
  auto r = graph_radius(2, 0.5);
  CHECK_THAT(r.delta, WithinAbs(0.0625, 1e-15));
  CHECK_THAT(r.r0, WithinAbs(0.0625 / 6, 1e-15));
  CHECK_THAT(graph_radius(0.5, 0.3).delta, WithinAbs(1, 1e-15));
  for (double q : {0.7, 3.0, 41.0}) {
    for (double g : {0.2, 0.5, 0.9}) {
      CHECK_THAT(std::pow(graph_radius(q, g).delta, g) * q, WithinRel(0.5, 1e-13));
    }
  }
}

TEST_CASE("q of a disc") {
  const auto c = disc(256);
  const auto g = DefiningGrid::square(-1.5, 1.5, 301, sq);
  const auto e = q_of_domain(g, c, 0.5, 0.25, 1);
  CHECK_THAT(e.grad_inf, WithinRel(2, 1e-2));
  // brute force: sup 2|x-y|^{1/2} over the annulus 0.75 < |x| < 1.25
  CHECK_THAT(e.seminorm, WithinRel(2 * std::sqrt(2.5), 5e-2));
  const auto scaled = DefiningGrid::square(-1.5, 1.5, 301, [](Point p) { return 3.5 * sq(p); });
  CHECK_THAT(q_of_domain(scaled, c, 0.5, 0.25, 1).q, WithinRel(e.q, 1e-12));

  const auto small = disc(256, 0.5);
  const auto gs = DefiningGrid::square(-1.5, 1.5, 301, [](Point p) { return norm2(p) - 0.25; });
  const auto es = q_of_domain(gs, small, 0.5, 0.25, 1);
  CHECK_THAT(es.grad_inf, WithinRel(1, 1e-2));
  CHECK(es.q > e.q);

  CHECK_THROWS_AS(q_of_domain(g, c, 0.5, 0.01), ConfigurationError);
  const auto flat = DefiningGrid::square(-1.5, 1.5, 61, [](Point) { return 1.0; });
  CHECK_THROWS_AS(q_of_domain(flat, c, 0.5, 0.25), DegenerateDefiningFunctionError);
}

TEST_CASE("log bound exceeds the disc gradient") {
  const auto c = disc(256);
  const auto g = DefiningGrid::square(-1.5, 1.5, 301, sq);
  const auto e = q_of_domain(g, c, 0.5, 0.2, 2);
  const double rhs = log_bound_rhs(e.q, metrics(c).area, 0.5, 1.0);
  const auto f = BoundaryField(c);
  double sup = 0;
  for (double r : {0.0, 0.5, 0.9, 1.1, 2.0}) {
    for (double th : {0.1, 1.0, 2.5}) {
      sup = std::max(sup, f.grad({r * std::cos(th), r * std::sin(th)}).norm() / std::sqrt(2.0));
    }
  }
  CHECK_THAT(sup, WithinAbs(0.5, 1e-6));
  CHECK(rhs > sup);
}

TEST_CASE("boundary is a unit-slope graph inside the graph radius") {
  const auto c = disc(512);
  const auto g = DefiningGrid::square(-1.5, 1.5, 301, sq);
  const auto r = graph_radius(q_of_domain(g, c, 0.5, 0.25, 3).q, 0.5);
  REQUIRE(r.delta > 0);
  for (std::size_t i = 0; i < c.size(); i += 7) {
    const Point t = rotate_cw(outward_normal(c, i)) * -1.0;  // unit tangent
    const Point n = outward_normal(c, i);
    for (std::size_t j = 0; j < c.size(); ++j) {
      const Point d = c[j] - c[i];
      if (j == i || norm(d) > r.delta) continue;
      CHECK(std::abs(dot(d, n)) <= std::abs(dot(d, t)));
    }
  }
}

TEST_CASE("flow history coverage") {
  FlowHistory h(0.01);
  h.push(0, disc(32));
  h.push(0.01, disc(32, std::exp(-0.005)));
  h.push(0.05, disc(32, std::exp(-0.025)));
  CHECK_THROWS_AS(h.push(0.05, disc(32)), ConfigurationError);
  CHECK_THROWS_AS(inverse_flow_point(h, {0.2, 0}, 0.05), CoverageError);
  CHECK_THROWS_AS(inverse_flow_point(h, {0.2, 0}, 0.5), CoverageError);
  CHECK(inverse_flow_point(h, {0.2, 0.1}, 0) == Point{0.2, 0.1});
}

TEST_CASE("inverse flow of the disc") {
  const double s = std::log(4.0);
  const auto h = disc_history(s, 1e-2);
  auto p = inverse_flow_point(h, {0.3, 0}, s);
  CHECK(norm(p - Point{0.6, 0}) < 1e-4);
  p = inverse_flow_point(h, {2, 0}, s);
  CHECK(norm(p - Point{std::sqrt(4.75), 0}) < 1e-4);
  const exact::DiscSolution sol{1, {0, 0}};
  for (Point x : {Point{0.45, 0.1}, Point{-0.2, 0.55}, Point{1.1, -0.7}}) {
    CHECK(norm(inverse_flow_point(h, x, s) - exact::disc_inverse_flow(sol, x, 0.75)) < 1e-4);
  }
  TraceOptions tight;
  tight.box_factor = 0;
  CHECK_THROWS_AS(inverse_flow_point(h, {5, 5}, s, 0.0, tight), EscapeError);
}

TEST_CASE("jacobian determinant of the inverse flow") {
  const auto h = disc_history(1.0, 1e-2);
  const double fd = 1e-4;
  for (Point x : {Point{0.1, 0.2}, Point{-0.3, 0.1}, Point{0.0, -0.4}}) {
    const Point ex = (inverse_flow_point(h, x + Point{fd, 0}, 1.0) -
                      inverse_flow_point(h, x - Point{fd, 0}, 1.0)) / (2 * fd);
    const Point ey = (inverse_flow_point(h, x + Point{0, fd}, 1.0) -
                      inverse_flow_point(h, x - Point{0, fd}, 1.0)) / (2 * fd);
    CHECK_THAT(cross(ex, ey), WithinRel(std::exp(1.0), 2e-2));
  }
}

TEST_CASE("transported defining function of the disc") {
  const double s = std::log(2.0);  // t = 1/2
  const auto h = disc_history(s, 1e-2);
  const auto layout = DefiningGrid::square(-2.5, 2.5, 21, [](Point) { return 0.0; });
  const auto map = inverse_flow_map(h, layout, s);
  const auto plain = transport_phi(map, sq, false);
  const auto corr = transport_phi(map, sq, true);
  // node (10,10) is the origin, node (18,10) is (2,0)
  CHECK_THAT(plain.at(10, 10), WithinAbs(-1, 1e-4));
  CHECK_THAT(corr.at(10, 10), WithinAbs(-0.5, 1e-4));
  CHECK_THAT(plain.at(18, 10), WithinAbs(3.5, 1e-4));
  CHECK_THAT(corr.at(18, 10), WithinAbs(3.5, 1e-4));
  CHECK(corr.s == s);
  // corrected field is |x|^2 - (1-t) everywhere, including nodes on the boundary
  for (std::size_t n = 0; n < corr.values.size(); ++n) {
    const Point x = corr.node(n % 21, n / 21);
    CHECK_THAT(corr.values[n], WithinAbs(norm2(x) - 0.5, 1e-4));
  }
  const auto g0 = DefiningGrid::square(-2.5, 2.5, 21, sq);
  const auto via_grid = transport_phi(h, g0, s, true);
  CHECK_THAT(via_grid.at(10, 10), WithinAbs(-0.5, 1e-3));
}

TEST_CASE("gradient jump of sampled defining functions") {
  const double t = 0.5, R = std::sqrt(1 - t);
  const auto c = MarkerCurve<double>(oracle::circle_points(256, R));
  auto plain = [&](Point p) {
    const double v = norm2(p) - (1 - t);
    return norm2(p) < 1 - t ? v / (1 - t) : v;
  };
  auto corr = [&](Point p) { return norm2(p) - (1 - t); };
  const auto gp = DefiningGrid::square(-1.25, 1.25, 401, plain);
  const auto gc = DefiningGrid::square(-1.25, 1.25, 401, corr);
  const auto jp = gradient_jump(gp, c, 0.025);
  // first-order one-sided slopes of the piecewise quadratic: 2(2R-h)/(2R+h)
  CHECK_THAT(jp.mean_ratio, WithinRel(2 * (2 * R - 0.025) / (2 * R + 0.025), 1e-3));
  CHECK_THAT(jp.mean_ratio, WithinRel(2.0, 5e-2));
  // interpolating straight across the kink smears it and biases the ratio low
  const auto jb = gradient_jump(gp, c, 0.025, JumpStencil::bicubic);
  CHECK(jb.mean_ratio < jp.mean_ratio - 0.03);
  double prev = 1;
  for (double hh : {0.05, 0.025}) {
    const auto jc = gradient_jump(gc, c, hh);
    CHECK(jc.max_jump <= 3 * hh);
    CHECK(jc.max_jump < prev);
    prev = jc.max_jump;
  }
  CHECK_THROWS_AS(gradient_jump(gc, c, 0.001), ConfigurationError);
  const auto tiny = DefiningGrid::square(-0.76, 0.76, 161, corr);
  CHECK_THROWS_AS(gradient_jump(tiny, c, 0.05), DomainError);
}

TEST_CASE("zero level set follows the markers") {
  const auto c = disc(256, 0.8);
  const auto g = DefiningGrid::square(-1.25, 1.25, 201, [](Point p) { return norm2(p) - 0.64; });
  CHECK(zero_set_distance(g, c, 0.1) <= 2 * g.spacing);
}
