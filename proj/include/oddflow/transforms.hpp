#pragma once

// Fast sine/cosine synthesis and analysis on the uniform grid x = j/N.
//
// Coefficient arrays are indexed directly by wavenumber: c(k1, k2) multiplies
// b1(pi k1 x1) b2(pi k2 x2), with b = sin or cos per axis. Row 0 / column 0
// is ignored along a sine axis.

#include <Eigen/Dense>

namespace oddflow {

enum class Basis { Sine, Cosine };

namespace transforms {

/// Number of nodes produced along an axis: sine gives j = 1..N-1,
/// cosine gives j = 0..N.
int node_count(Basis b, int n);

/// First node index along an axis (1 for sine, 0 for cosine).
int first_node(Basis b);

/// Evaluates the series at the grid nodes (see node_count). Requires the
/// coefficient extent along each axis to be at most N-1 (sine) or N (cosine);
/// higher wavenumbers must be absent.
Eigen::ArrayXXd synthesize(const Eigen::ArrayXXd& coeffs, Basis b1, Basis b2, int n);

/// Inverse of synthesize for the sine-sine basis: takes the (N-1)x(N-1)
/// interior node values and returns coefficients for k = 0..N-1 per axis
/// (index 0 zero).
Eigen::ArrayXXd analyze_sine_sine(const Eigen::ArrayXXd& interior, int n);

}  // namespace transforms
}  // namespace oddflow
