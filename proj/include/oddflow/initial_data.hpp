#pragma once

// Initial vorticities: odd in x1 and x2, in [0,1] on the quadrant, equal to
// 1 on all of the quadrant except a set of measure at most delta.
//
// Part (i):  C^{1,alpha} with the polar profile (r/sqrt2)^{1+alpha} sin(2 phi)
//            near the origin, smooth elsewhere.
// Part (ii): smooth, equal to sin^3(pi x1) sin(pi x2) on the strips
//            min(|x1|, |x2|) <= delta/4.

#include <string>

#include "oddflow/field.hpp"

namespace oddflow {

enum class DataKind { PartI, PartII, Custom };

std::string_view to_string(DataKind k);
DataKind data_kind_from_string(std::string_view s);

struct InitialDataSpec {
  DataKind kind = DataKind::PartI;
  double alpha = 0.5;      // Hoelder exponent, part (i)
  double delta = 0.05;     // plateau deficit
  double amplitude = 1.0;  // custom kind only: epsilon * (part (i) profile)

  /// Throws ParameterError unless alpha in (0,1) and delta in (0, 1/10].
  void validate() const;
};

/// Smooth step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t); all
/// derivatives vanish at both ends.
double smooth_step(double t);

/// Closed-form initial datum with its blend geometry.
class InitialData {
 public:
  explicit InitialData(const InitialDataSpec& spec);

  const InitialDataSpec& spec() const { return spec_; }

  /// Value at any point of the torus (odd reflections and 2-periodicity).
  double operator()(double x1, double x2) const;
  double operator()(const Point& x) const { return (*this)(x[0], x[1]); }

  /// Values on the quadrant grid (i/N, j/N).
  GridField grid(int n) const;

  /// Spectral projection used to start an evolution on an N grid with the
  /// given cutoff. For part (ii) the projection is constrained so that the
  /// x1-derivative on the axis x1 = 0 vanishes identically.
  Projection spectral(int n, int cutoff) const;

  // Blend geometry (quadrant coordinates).
  double profile_radius() const { return r_in_; }   // pure corner profile for r <= this
  double blend_radius() const { return r_out_; }    // profile fully blended out by this
  double edge_width() const { return edge_; }       // part (i): edge transition width
  double strip_width() const { return strip_; }     // part (ii): sin^3 strip width (delta/4)
  double strip_blend() const { return strip_blend_; }

 private:
  double quadrant(double x1, double x2) const;  // 0 <= x1, x2 <= 1
  double part_i(double x1, double x2) const;
  double part_ii(double x1, double x2) const;

  InitialDataSpec spec_;
  double r_in_ = 0, r_out_ = 0, edge_ = 0, strip_ = 0, strip_blend_ = 0;
};

GridField build_part_i(const InitialDataSpec& spec, int n);
GridField build_part_ii(const InitialDataSpec& spec, int n);

struct AuditReport {
  DataKind kind = DataKind::PartI;
  double oddness_residual = 0.0;    // max |w(x) + w(-x1,x2)| + |w(x) + w(x1,-x2)|
  double plateau_measure = 0.0;     // area of {w = 1} in the quadrant (cell-centre count)
  double plateau_monte_carlo = 0.0; // same area from uniform random samples
  double plateau_required = 0.0;    // 1 - delta
  double sup_norm = 0.0;            // max over the quadrant
  double min_value = 0.0;           // min over the quadrant (>= 0)
  double profile_deviation = 0.0;   // corner/strip formula vs evaluator
  double seam_jump = 0.0;           // max one-sided gradient mismatch across blend seams
  double diagonal_slope = 0.0;      // part (i): log-log slope of second differences on the diagonal
  bool passed = false;

  std::string to_json() const;
};

/// Audits a datum: oddness, plateau measure (at resolution n), range,
/// corner/strip profile, smoothness across blend seams.
AuditReport audit(const InitialData& data, int n = 2048, unsigned seed = 1);

}  // namespace oddflow
