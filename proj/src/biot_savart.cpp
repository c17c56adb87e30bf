#include "oddflow/biot_savart.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "oddflow/quadrature.hpp"

namespace oddflow {
namespace {

constexpr double kInv2Pi = 1.0 / (2.0 * kPi);

// Image copies of y under the odd-odd reflections with the sign omega
// picks up: y (+), (-y1, y2) (-), (y1, -y2) (-), -y (+).
constexpr double kImageSign1[4] = {1.0, -1.0, 1.0, -1.0};
constexpr double kImageSign2[4] = {1.0, 1.0, -1.0, -1.0};
constexpr double kImageWeight[4] = {1.0, -1.0, -1.0, 1.0};

// Adds the folded kernel for lattice vector (n1, n2) at target x over the
// point set (y1, y2) into (k1, k2).
void add_folded_kernel(const Point& x, double n1, double n2, const Eigen::ArrayXd& y1,
                       const Eigen::ArrayXd& y2, Eigen::ArrayXd& k1, Eigen::ArrayXd& k2) {
  for (int s = 0; s < 4; ++s) {
    const Eigen::ArrayXd z1 = (x[0] - 2.0 * n1) - kImageSign1[s] * y1;
    const Eigen::ArrayXd z2 = (x[1] - 2.0 * n2) - kImageSign2[s] * y2;
    const Eigen::ArrayXd inv = (kImageWeight[s] * kInv2Pi) / (z1.square() + z2.square());
    k1 += z2 * inv;
    k2 -= z1 * inv;
  }
}

std::vector<double> breakpoints(double xi, double rho, int panels) {
  std::vector<double> b;
  for (int p = 0; p <= panels; ++p) b.push_back(static_cast<double>(p) / panels);
  for (double v : {xi - rho, xi + rho}) {
    if (v > 0.0 && v < 1.0) b.push_back(v);
  }
  // Grade towards y = 0, where reflected images of x sit at distance xi.
  const double first = 1.0 / panels;
  for (double v = xi / 2.0; v > 1e-6 && v < first; v /= 2.0) b.push_back(v);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end(), [](double a, double c) { return std::abs(a - c) < 1e-14; }),
          b.end());
  return b;
}

}  // namespace

SpectralField stream_function(const SpectralField& omega) {
  if (omega.parity() != Parity::OddOdd) throw SymmetryError("stream_function: vorticity must be odd-odd");
  const int k = omega.cutoff();
  Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(k + 1, k + 1);
  for (int k2 = 1; k2 <= k; ++k2) {
    for (int k1 = 1; k1 <= k; ++k1) {
      c(k1, k2) = -omega.coeff(k1, k2) / (kPi * kPi * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2));
    }
  }
  return SpectralField(std::move(c), Parity::OddOdd);
}

VelocityField velocity_spectral(const SpectralField& omega) {
  const SpectralField psi = stream_function(omega);
  VelocityField u;
  u.u1 = derivative(psi, 2);
  u.u2 = -1.0 * derivative(psi, 1);
  return u;
}

SpectralField divergence(const VelocityField& u) {
  SpectralField d1 = derivative(u.u1, 1);
  const SpectralField d2 = derivative(u.u2, 2);
  if (d1.parity() != d2.parity()) throw SymmetryError("divergence: inconsistent velocity parities");
  return d1 += d2;
}

DirectVelocity velocity_direct(const FieldSampler& omega, int bandwidth, const Point& x,
                               const LatticeSumParams& params) {
  if (!(x[0] >= 0.0 && x[0] <= 0.5 && x[1] >= 0.0 && x[1] <= 0.5)) {
    throw DomainError("velocity_direct: target must lie in [0, 1/2]^2 (fold by symmetry first)");
  }
  if (params.radius < 1) throw ParameterError("velocity_direct: lattice radius must be >= 1");

  const int panels = params.panels > 0 ? params.panels : std::max(16, (bandwidth + 1) / 2);
  const double rho = params.patch_half_width > 0 ? params.patch_half_width : 1.0 / panels;

  // Image sum over n != 0: smooth in y, so sampled on a Chebyshev grid and
  // interpolated onto the quadrature nodes.
  const int m = params.far_chebyshev;
  const Eigen::ArrayXd cheb = quad::chebyshev_points(m, 0.0, 1.0);
  Eigen::ArrayXd cy1(m * m), cy2(m * m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      cy1(i + m * j) = cheb(i);
      cy2(i + m * j) = cheb(j);
    }
  }
  Eigen::ArrayXd g1 = Eigen::ArrayXd::Zero(m * m), g2 = Eigen::ArrayXd::Zero(m * m);
  Eigen::ArrayXd h1 = g1, h2 = g2;  // partial sum at radius / 2
  const int half = params.radius / 2;
  for (int r = 1; r <= params.radius; ++r) {
    for (int a = -r; a <= r; ++a) {
      // Shell |n|_inf = r: top/bottom rows and left/right columns.
      add_folded_kernel(x, a, r, cy1, cy2, g1, g2);
      add_folded_kernel(x, a, -r, cy1, cy2, g1, g2);
      if (a != r && a != -r) {
        add_folded_kernel(x, r, a, cy1, cy2, g1, g2);
        add_folded_kernel(x, -r, a, cy1, cy2, g1, g2);
      }
    }
    if (r == half) {
      h1 = g1;
      h2 = g2;
    }
  }

  const quad::Rule r1 = quad::composite(breakpoints(x[0], rho, panels), params.order);
  const quad::Rule r2 = quad::composite(breakpoints(x[1], rho, panels), params.order);
  const Eigen::MatrixXd l1 = quad::chebyshev_interpolation_matrix(m, 0.0, 1.0, r1.nodes);
  const Eigen::MatrixXd l2 = quad::chebyshev_interpolation_matrix(m, 0.0, 1.0, r2.nodes);
  auto interp = [&](const Eigen::ArrayXd& g) -> Eigen::ArrayXXd {
    const Eigen::Map<const Eigen::MatrixXd> gm(g.data(), m, m);
    return (l1 * gm * l2.transpose()).array();
  };

  const Eigen::ArrayXXd w = r1.weights.matrix() * r2.weights.matrix().transpose();
  const Eigen::ArrayXXd om = omega.tensor(r1.nodes, r2.nodes) * w;

  // n = 0 term on the tensor grid, outside the patch around x.
  const Eigen::Index n1 = r1.nodes.size(), n2 = r2.nodes.size();
  double near1 = 0.0, near2 = 0.0;
  {
    Eigen::ArrayXd y1(n1), k1(n1), k2(n1);
    for (Eigen::Index j = 0; j < n2; ++j) {
      const double yy2 = r2.nodes(j);
      const bool in_strip = std::abs(yy2 - x[1]) < rho;
      y1 = r1.nodes;
      k1.setZero();
      k2.setZero();
      add_folded_kernel(x, 0.0, 0.0, y1, Eigen::ArrayXd::Constant(n1, yy2), k1, k2);
      for (Eigen::Index i = 0; i < n1; ++i) {
        if (in_strip && std::abs(r1.nodes(i) - x[0]) < rho) continue;
        near1 += k1(i) * om(i, j);
        near2 += k2(i) * om(i, j);
      }
    }
  }
  // Duffy rules on the four rectangles meeting at x.
  const double lo1 = std::max(0.0, x[0] - rho), hi1 = std::min(1.0, x[0] + rho);
  const double lo2 = std::max(0.0, x[1] - rho), hi2 = std::min(1.0, x[1] + rho);
  for (double o1 : {lo1, hi1}) {
    for (double o2 : {lo2, hi2}) {
      if (o1 == x[0] || o2 == x[1]) continue;
      const quad::PointRule pr = quad::duffy_rectangle(x[0], x[1], o1, o2, params.singular_order);
      Eigen::ArrayXd k1 = Eigen::ArrayXd::Zero(pr.y1.size()), k2 = k1;
      add_folded_kernel(x, 0.0, 0.0, pr.y1, pr.y2, k1, k2);
      for (Eigen::Index q = 0; q < pr.y1.size(); ++q) {
        const double wv = pr.w(q) * omega.value(pr.y1(q), pr.y2(q));
        near1 += k1(q) * wv;
        near2 += k2(q) * wv;
      }
    }
  }

  DirectVelocity out;
  out.u = Vec2(near1 + (interp(g1) * om).sum(), near2 + (interp(g2) * om).sum());
  if (params.tail_estimate && half >= 1) {
    out.tail = Vec2(std::abs((interp(g1 - h1) * om).sum()), std::abs((interp(g2 - h2) * om).sum()));
  }
  return out;
}

DirectVelocity velocity_direct(const SpectralField& omega, const Point& x, const LatticeSumParams& params) {
  const SpectralSampler s(omega);
  return velocity_direct(s, omega.cutoff(), x, params);
}

DirectVelocity velocity_direct(const GridField& omega, const Point& x, const LatticeSumParams& params) {
  const SpectralField f = to_spectral(omega);
  return velocity_direct(f, x, params);
}

// ---------------------------------------------------------------------------

namespace {

// Catmull-Rom weights for offsets -1, 0, 1, 2 at fraction t.
std::array<double, 4> cubic_weights(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t),
          0.5 * (t3 - t2)};
}

// Nodal values at j/n for j = -1..n+1, extended by the axis parities.
Eigen::ArrayXXd padded_nodes(const SpectralField& f, int n) {
  const Basis b1 = basis_x1(f.parity()), b2 = basis_x2(f.parity());
  const Eigen::ArrayXXd inner = transforms::synthesize(f.coeffs(), b1, b2, n);
  Eigen::ArrayXXd all = Eigen::ArrayXXd::Zero(n + 3, n + 3);
  all.block(1 + transforms::first_node(b1), 1 + transforms::first_node(b2), inner.rows(), inner.cols()) = inner;
  const double s1 = b1 == Basis::Sine ? -1.0 : 1.0;
  const double s2 = b2 == Basis::Sine ? -1.0 : 1.0;
  all.row(0) = s1 * all.row(2);
  all.row(n + 2) = s1 * all.row(n);
  all.col(0) = s2 * all.col(2);
  all.col(n + 2) = s2 * all.col(n);
  return all;
}

}  // namespace

VelocityEvaluator::VelocityEvaluator(const VelocityField& u, Mode mode, int n) : u_(u), mode_(mode) {
  if (mode_ == Mode::Exact) return;
  n_ = n > 0 ? n : std::max(2 * u.cutoff(), 64);
  nodes1_ = padded_nodes(u.u1, n_);
  nodes2_ = padded_nodes(u.u2, n_);
  // Deviation at cell centres of a coarse sampling of the quadrant.
  const int probes = 24;
  for (int i = 0; i < probes; ++i) {
    for (int j = 0; j < probes; ++j) {
      const Point p((i + 0.5) / probes, (j + 0.5) / probes);
      error_estimate_ = std::max(error_estimate_, ((*this)(p) - u(p)).cwiseAbs().maxCoeff());
    }
  }
}

double VelocityEvaluator::bicubic(const Eigen::ArrayXXd& nodes, const Point& x) const {
  const double s1 = std::clamp(x[0], 0.0, 1.0) * n_;
  const double s2 = std::clamp(x[1], 0.0, 1.0) * n_;
  const int i = std::min(static_cast<int>(s1), n_ - 1);
  const int j = std::min(static_cast<int>(s2), n_ - 1);
  const auto w1 = cubic_weights(s1 - i);
  const auto w2 = cubic_weights(s2 - j);
  double v = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) v += w1[a] * w2[b] * nodes(i + a, j + b);
  }
  return v;
}

Vec2 VelocityEvaluator::operator()(const Point& x) const {
  if (mode_ == Mode::Exact) return u_(x);
  return {bicubic(nodes1_, x), bicubic(nodes2_, x)};
}

}  // namespace oddflow
