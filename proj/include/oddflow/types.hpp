#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace oddflow {

/// A point or vector in the plane, (x1, x2).
using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grid too coarse for the requested spectral cutoff.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Nodal data that cannot come from an odd-odd field.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

/// Point or box outside the admissible region.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid model parameter (alpha, delta, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Time step exceeds the CFL limit.
class CflError : public Error {
 public:
  using Error::Error;
};

/// Least-squares growth fit on unusable data.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace oddflow
