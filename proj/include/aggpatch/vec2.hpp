#pragma once

#include <cmath>
#include <ostream>

namespace aggpatch {

/// Plain 2-vector used for marker coordinates. Templated on the scalar so the
/// stepping code can run in extended precision.
template <class Real>
struct Vec2 {
  Real x{0};
  Real y{0};

  constexpr Vec2() = default;
  constexpr Vec2(Real x_, Real y_) : x(x_), y(y_) {}

  template <class Other>
  constexpr explicit Vec2(const Vec2<Other>& o)
      : x(static_cast<Real>(o.x)), y(static_cast<Real>(o.y)) {}

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(Real a) {
    x *= a;
    y *= a;
    return *this;
  }
  constexpr Vec2& operator/=(Real a) {
    x /= a;
    y /= a;
    return *this;
  }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, Real s) { return a *= s; }
  friend constexpr Vec2 operator*(Real s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator/(Vec2 a, Real s) { return a /= s; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Vec2& v) {
    return os << '(' << v.x << ", " << v.y << ')';
  }
};

template <class Real>
constexpr Real dot(const Vec2<Real>& a, const Vec2<Real>& b) {
  return a.x * b.x + a.y * b.y;
}

/// z-component of the 3-D cross product.
template <class Real>
constexpr Real cross(const Vec2<Real>& a, const Vec2<Real>& b) {
  return a.x * b.y - a.y * b.x;
}

template <class Real>
constexpr Real norm2(const Vec2<Real>& a) {
  return dot(a, a);
}

template <class Real>
Real norm(const Vec2<Real>& a) {
  using std::hypot;
  return hypot(a.x, a.y);
}

/// Rotation by -pi/2: maps the tangent of a counterclockwise curve to the
/// outward normal.
template <class Real>
constexpr Vec2<Real> rotate_cw(const Vec2<Real>& a) {
  return {a.y, -a.x};
}

using Point = Vec2<double>;

}  // namespace aggpatch
