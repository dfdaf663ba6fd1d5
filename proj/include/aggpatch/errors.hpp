#pragma once

#include <stdexcept>
#include <string>

namespace aggpatch {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A kernel was evaluated at its singular point.
class SingularEvaluationError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters (resolution too small, unsupported dimension, ...).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Degenerate or invalid marker geometry.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// The curve self-intersects; the simulation cannot continue.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during time stepping.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Query point too close to the boundary for plain trapezoid accuracy.
class NearBoundaryError : public Error {
 public:
  using Error::Error;
};

/// Flow history does not cover the requested time interval.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// A traced trajectory left the allowed bounding box.
class EscapeError : public Error {
 public:
  using Error::Error;
};

/// A stencil left the grid.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// |grad Phi| vanishes on the boundary.
class DegenerateDefiningFunctionError : public Error {
 public:
  using Error::Error;
};

/// The minor semi-axis of the ellipse reached zero.
class CollapseError : public Error {
 public:
  using Error::Error;
};

}  // namespace aggpatch
