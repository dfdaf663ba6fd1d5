#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "quadrature.hpp"

namespace aggpatch::kernels {

/// Dimension and unit-sphere measure for the Newtonian kernels.
/// Only d = 2 (logarithmic branch) and d = 3 (power branch) are supported.
struct KernelSpec {
  int d = 2;
  double omega = 2 * std::numbers::pi;  // surface measure of S^{d-1}

  static KernelSpec make(int d) {
    if (d < 2) throw ConfigurationError("KernelSpec: dimension must be >= 2");
    if (d > 3) {
      throw ConfigurationError("KernelSpec: dimension " + std::to_string(d) +
                               " unsupported (only d = 2, 3)");
    }
    const double half = 0.5 * d;
    return {d, 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half)};
  }
};

using Vector = Eigen::VectorXd;

namespace detail {
inline double checked_norm(const KernelSpec& spec, const Vector& y,
                           const char* what) {
  if (y.size() != spec.d) {
    throw ConfigurationError(std::string(what) + ": point has wrong dimension");
  }
  const double r = y.norm();
  if (r == 0.0) throw SingularEvaluationError(std::string(what) + " at 0");
  return r;
}
}  // namespace detail

/// Fundamental solution of the Laplacian.
inline double newtonian_potential(const KernelSpec& spec, const Vector& y) {
  const double r = detail::checked_norm(spec, y, "newtonian_potential");
  if (spec.d == 2) return std::log(r) / (2 * std::numbers::pi);
  return -1.0 / ((spec.d - 2) * spec.omega * std::pow(r, spec.d - 2));
}

/// grad N(y) = y / (omega |y|^d).
inline Vector grad_newtonian(const KernelSpec& spec, const Vector& y) {
  const double r = detail::checked_norm(spec, y, "grad_newtonian");
  return y / (spec.omega * std::pow(r, spec.d));
}

/// Pointwise value of the even, zero-mean principal-value kernels giving the
/// velocity gradient:
///
///   j != k :  d x_j x_k / (omega |x|^{d+2})
///   j == k :  (|x|^2 - d x_j^2) / (omega |x|^{d+2})
///
/// so that dv^j/dx_k = K_jk * chi  (j != k) and
/// dv^j/dx_j = -chi/d - K_jj * chi. The -chi/d delta contribution is not part
/// of the kernel. Indices are zero-based.
inline double pv_hessian_component(const KernelSpec& spec, int j, int k,
                                   const Vector& x) {
  const double r = detail::checked_norm(spec, x, "pv_hessian_component");
  if (j < 0 || k < 0 || j >= spec.d || k >= spec.d) {
    throw ConfigurationError("pv_hessian_component: index out of range");
  }
  const double r2 = r * r;
  const double denom = spec.omega * std::pow(r, spec.d + 2);
  if (j != k) return spec.d * x[std::min(j, k)] * x[std::max(j, k)] / denom;
  return (r2 - spec.d * x[j] * x[j]) / denom;
}

/// Integral of an angular function over the hemisphere {x_axis < 0} of
/// S^{d-1}. Equispaced midpoint nodes on the half circle for d = 2; a product
/// rule (Gauss-Legendre in the polar cosine, periodic trapezoid in azimuth)
/// for d = 3.
inline double hemisphere_integral(const KernelSpec& spec,
                                  const std::function<double(const Vector&)>& omega_fn,
                                  int normal_axis, int resolution) {
  if (resolution < 16) {
    throw ConfigurationError("hemisphere_integral: resolution must be >= 16");
  }
  if (normal_axis < 0 || normal_axis >= spec.d) {
    throw ConfigurationError("hemisphere_integral: normal axis out of range");
  }
  const double pi = std::numbers::pi;
  if (spec.d == 2) {
    // {x_axis < 0} is the half circle centred on -e_axis
    const double centre = normal_axis == 0 ? pi : 1.5 * pi;
    const double start = centre - 0.5 * pi;
    const double step = pi / resolution;
    double acc = 0;
    Vector w(2);
    for (int m = 0; m < resolution; ++m) {
      const double th = start + (m + 0.5) * step;
      w << std::cos(th), std::sin(th);
      acc += omega_fn(w);
    }
    return acc * step;
  }
  const int a = normal_axis;
  const int b = (a + 1) % 3;
  const int c = (a + 2) % 3;
  const auto [nodes, weights] = quadrature::gauss_legendre<double>(resolution);
  const int n_phi = 2 * resolution;
  const double dphi = 2 * pi / n_phi;
  double acc = 0;
  Vector w(3);
  for (int i = 0; i < resolution; ++i) {
    const double u = 0.5 * (nodes[i] - 1.0);  // maps [-1,1] onto (-1,0)
    const double s = std::sqrt(1.0 - u * u);
    double ring = 0;
    for (int m = 0; m < n_phi; ++m) {
      const double phi = m * dphi;
      w[a] = u;
      w[b] = s * std::cos(phi);
      w[c] = s * std::sin(phi);
      ring += omega_fn(w);
    }
    acc += 0.5 * weights[i] * ring * dphi;
  }
  return acc;
}

}  // namespace aggpatch::kernels
