#pragma once

// Odd-odd periodic scalar fields on the torus [-1,1)^2, stored as
// double-sine (or, for derivatives, mixed sine/cosine) coefficient arrays.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "oddflow/transforms.hpp"
#include "oddflow/types.hpp"

namespace oddflow {

/// Symmetry class of a field: first word refers to x1, second to x2.
/// Odd along an axis means a sine expansion, even means cosine.
enum class Parity { OddOdd, EvenOdd, OddEven, EvenEven };

Basis basis_x1(Parity p);
Basis basis_x2(Parity p);
Parity make_parity(Basis b1, Basis b2);
std::string_view to_string(Parity p);
Parity parity_from_string(std::string_view s);

/// Wavenumber pair of the sine basis sin(pi k1 x1) sin(pi k2 x2).
struct Wavenumber {
  int k1 = 1;
  int k2 = 1;
};

/// Axis-aligned rectangle [lo1,hi1] x [lo2,hi2] inside the quadrant [0,1]^2.
class SubdomainBox {
 public:
  SubdomainBox(double lo1, double hi1, double lo2, double hi2);
  static SubdomainBox unit() { return {0.0, 1.0, 0.0, 1.0}; }
  /// Corner square [0, side]^2.
  static SubdomainBox corner(double side) { return {0.0, side, 0.0, side}; }

  double lo1() const { return lo1_; }
  double hi1() const { return hi1_; }
  double lo2() const { return lo2_; }
  double hi2() const { return hi2_; }
  bool contains(const Point& x) const;

 private:
  double lo1_, hi1_, lo2_, hi2_;
};

/// Spectral representation: f(x) = sum_k c(k1,k2) b1(pi k1 x1) b2(pi k2 x2),
/// wavenumbers 0..cutoff per axis. Coefficients along a sine axis at
/// wavenumber 0 are held at zero.
class SpectralField {
 public:
  explicit SpectralField(int cutoff = 1, Parity parity = Parity::OddOdd);
  SpectralField(Eigen::ArrayXXd coeffs, Parity parity);

  /// Single basis function with unit amplitude.
  static SpectralField mode(Wavenumber k, int cutoff);

  int cutoff() const { return static_cast<int>(coeffs_.rows()) - 1; }
  Parity parity() const { return parity_; }
  const Eigen::ArrayXXd& coeffs() const { return coeffs_; }
  double coeff(int k1, int k2) const { return coeffs_(k1, k2); }

  double operator()(double x1, double x2) const;
  double operator()(const Point& x) const { return (*this)(x[0], x[1]); }

  /// Values on the tensor grid x1[i] x x2[j].
  Eigen::ArrayXXd tensor(const Eigen::ArrayXd& x1, const Eigen::ArrayXd& x2) const;

  /// Copy with cutoff changed (zero-padded or truncated).
  SpectralField resized(int cutoff) const;

  /// L2 norm over the quadrant [0,1]^2 (exact, from coefficients).
  double l2_norm() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator*=(double s);

 private:
  void clear_sine_zero_modes();
  Eigen::ArrayXXd coeffs_;
  Parity parity_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField f);

/// Nodal samples at (i/N, j/N), i,j = 0..N-1, of a field on the quadrant.
struct GridField {
  Eigen::ArrayXXd values;  // values(i, j) at (i/N, j/N)
  Parity parity = Parity::OddOdd;
  double time = 0.0;

  int n() const { return static_cast<int>(values.rows()); }
  double spacing() const { return 1.0 / n(); }
  /// Discrete L2 norm over the quadrant (trapezoid weights).
  double l2_norm() const;
};

/// Samples f on the N x N grid. Requires N >= 2 * cutoff.
GridField to_grid(const SpectralField& f, int n);

/// Result of projecting nodal data onto the sine-sine basis.
struct Projection {
  SpectralField field;
  /// L2 norm (over the quadrant) of the discarded wavenumbers above cutoff.
  double discarded_l2 = 0.0;
};

/// Projects odd-odd nodal data onto wavenumbers 1..cutoff (default N/2).
/// Throws SymmetryError if the boundary rows x1 = 0 or x2 = 0 are nonzero.
Projection project(const GridField& g, int cutoff = -1);
SpectralField to_spectral(const GridField& g, int cutoff = -1);

/// Spectral derivative of the given order (1 or 2) along axis (1 or 2).
SpectralField derivative(const SpectralField& f, int axis, int order = 1);

/// Location and value of a supremum.
struct SupResult {
  double value = 0.0;
  Point location = Point::Zero();
};

/// sup |f| over the box: nodal maximum on a grid of size n (default
/// max(2*cutoff, 64)), refined by golden-section search in a one-cell
/// neighbourhood of the best nodes.
SupResult sup_norm_on(const SpectralField& f, const SubdomainBox& box, int n = 0);

/// Pointwise combination of several fields: Euclidean length of the vector
/// of values, or the largest absolute entry.
enum class ComponentNorm { Euclidean, MaxAbs };

/// sup over the box of the combined pointwise norm of the components, by
/// the same nodal search and refinement as the scalar version.
SupResult sup_norm_on(const std::vector<SpectralField>& components, ComponentNorm norm,
                      const SubdomainBox& box, int n = 0);

/// Pointwise access to a scalar field on the quadrant. Tensor evaluation is
/// the fast path used by the quadrature routines.
class FieldSampler {
 public:
  virtual ~FieldSampler() = default;
  virtual double value(double x1, double x2) const = 0;
  virtual Eigen::ArrayXXd tensor(const Eigen::ArrayXd& x1, const Eigen::ArrayXd& x2) const;
};

class SpectralSampler final : public FieldSampler {
 public:
  explicit SpectralSampler(const SpectralField& f) : f_(f) {}
  double value(double x1, double x2) const override { return f_(x1, x2); }
  Eigen::ArrayXXd tensor(const Eigen::ArrayXd& x1, const Eigen::ArrayXd& x2) const override {
    return f_.tensor(x1, x2);
  }

 private:
  const SpectralField& f_;
};

class FunctionSampler final : public FieldSampler {
 public:
  explicit FunctionSampler(std::function<double(double, double)> fn) : fn_(std::move(fn)) {}
  double value(double x1, double x2) const override { return fn_(x1, x2); }

 private:
  std::function<double(double, double)> fn_;
};

}  // namespace oddflow
