#pragma once

// Velocity from vorticity on the torus [-1,1)^2 with kernel
// K(z) = (1/2pi) (z2, -z1) / |z|^2, for odd-odd vorticity.
//
// Two independent routes:
//   velocity_spectral  stream function psi with lap(psi) = omega, u = (d2 psi, -d1 psi)
//   velocity_direct    lattice sum over periodic images, folded onto [0,1]^2

#include <optional>

#include "oddflow/field.hpp"

namespace oddflow {

/// u1 is odd in x1 and even in x2 (sine-cosine); u2 is even-odd.
struct VelocityField {
  SpectralField u1{1, Parity::OddEven};
  SpectralField u2{1, Parity::EvenOdd};

  Vec2 operator()(const Point& x) const { return {u1(x), u2(x)}; }
  int cutoff() const { return u1.cutoff(); }
};

/// Stream-function inversion: each sine mode of omega is scaled by
/// -1/(pi^2 |k|^2) to give psi.
SpectralField stream_function(const SpectralField& omega);
VelocityField velocity_spectral(const SpectralField& omega);

/// Pointwise divergence d1 u1 + d2 u2 as a spectral field.
SpectralField divergence(const VelocityField& u);

struct LatticeSumParams {
  int radius = 64;              // sum over lattice vectors with |n|_inf <= radius
  bool tail_estimate = true;    // also sum to radius/2 and report the difference
  int panels = 0;               // tensor panels per axis (0: from bandwidth)
  int order = 12;               // Gauss points per panel
  int far_chebyshev = 32;       // Chebyshev points per axis for the image sum
  int singular_order = 16;      // Duffy rule order near the target point
  double patch_half_width = 0;  // half width of the Duffy patch (0: one panel)
};

struct DirectVelocity {
  Vec2 u = Vec2::Zero();
  /// |u(radius) - u(radius/2)| componentwise; an upper estimate of the
  /// truncation error for image sums decaying at least like radius^-1.
  Vec2 tail = Vec2::Zero();
};

/// Lattice-sum velocity at x in [0, 1/2]^2. `bandwidth` is the highest
/// wavenumber present in omega (sizes the quadrature panels).
DirectVelocity velocity_direct(const FieldSampler& omega, int bandwidth, const Point& x,
                               const LatticeSumParams& params = {});
DirectVelocity velocity_direct(const SpectralField& omega, const Point& x,
                               const LatticeSumParams& params = {});
/// Grid input is first projected onto the sine basis (exact for N >= 2K data).
DirectVelocity velocity_direct(const GridField& omega, const Point& x,
                               const LatticeSumParams& params = {});

/// Off-grid evaluation. Exact mode sums the trigonometric series; the
/// bicubic mode interpolates nodal values on a grid of size n and reports
/// its measured maximum deviation from the exact sum.
class VelocityEvaluator {
 public:
  enum class Mode { Exact, Bicubic };

  explicit VelocityEvaluator(const VelocityField& u, Mode mode = Mode::Exact, int n = 0);

  Vec2 operator()(const Point& x) const;
  Mode mode() const { return mode_; }
  /// Maximum deviation from exact evaluation measured at cell centres
  /// (0 in exact mode).
  double error_estimate() const { return error_estimate_; }

 private:
  double bicubic(const Eigen::ArrayXXd& nodes, const Point& x) const;

  const VelocityField& u_;
  Mode mode_;
  int n_ = 0;
  Eigen::ArrayXXd nodes1_, nodes2_;  // values at j/n, j = -1..n+1 (with reflections)
  double error_estimate_ = 0.0;
};

inline Vec2 evaluate_velocity_at(const VelocityField& u, const Point& x) { return u(x); }

}  // namespace oddflow
