#include "oddflow/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace oddflow {
namespace {

// b(pi k x) for k = 0..cutoff.
Eigen::VectorXd basis_row(Basis b, int cutoff, double x) {
  Eigen::VectorXd v(cutoff + 1);
  for (int k = 0; k <= cutoff; ++k) {
    const double arg = kPi * k * x;
    v(k) = b == Basis::Sine ? std::sin(arg) : std::cos(arg);
  }
  return v;
}

Eigen::MatrixXd basis_matrix(Basis b, int cutoff, const Eigen::ArrayXd& x) {
  Eigen::MatrixXd m(x.size(), cutoff + 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) m.row(i) = basis_row(b, cutoff, x(i)).transpose();
  return m;
}

// argmax of g on [a, b] by golden-section search (endpoints included).
double golden_argmax(const std::function<double(double)>& g, double a, double b) {
  if (b - a <= 0.0) return a;
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = a, hi = b;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 40; ++it) {
    if (gc >= gd) {
      hi = d;
      d = c;
      gd = gc;
      c = hi - kInvPhi * (hi - lo);
      gc = g(c);
    } else {
      lo = c;
      c = d;
      gc = gd;
      d = lo + kInvPhi * (hi - lo);
      gd = g(d);
    }
  }
  double best = 0.5 * (lo + hi);
  double gbest = g(best);
  for (double e : {a, b}) {
    const double ge = g(e);
    if (ge > gbest) {
      gbest = ge;
      best = e;
    }
  }
  return best;
}

// Nodal values at j/n, j = 0..n, on both axes.
Eigen::ArrayXXd full_nodes(const SpectralField& f, int n) {
  const Basis b1 = basis_x1(f.parity());
  const Basis b2 = basis_x2(f.parity());
  const Eigen::ArrayXXd inner = transforms::synthesize(f.coeffs(), b1, b2, n);
  Eigen::ArrayXXd all = Eigen::ArrayXXd::Zero(n + 1, n + 1);
  all.block(transforms::first_node(b1), transforms::first_node(b2), inner.rows(), inner.cols()) = inner;
  return all;
}

}  // namespace

Basis basis_x1(Parity p) {
  return (p == Parity::OddOdd || p == Parity::OddEven) ? Basis::Sine : Basis::Cosine;
}

Basis basis_x2(Parity p) {
  return (p == Parity::OddOdd || p == Parity::EvenOdd) ? Basis::Sine : Basis::Cosine;
}

Parity make_parity(Basis b1, Basis b2) {
  if (b1 == Basis::Sine) return b2 == Basis::Sine ? Parity::OddOdd : Parity::OddEven;
  return b2 == Basis::Sine ? Parity::EvenOdd : Parity::EvenEven;
}

std::string_view to_string(Parity p) {
  switch (p) {
    case Parity::OddOdd: return "odd-odd";
    case Parity::EvenOdd: return "even-odd";
    case Parity::OddEven: return "odd-even";
    case Parity::EvenEven: return "even-even";
  }
  return "odd-odd";
}

Parity parity_from_string(std::string_view s) {
  for (Parity p : {Parity::OddOdd, Parity::EvenOdd, Parity::OddEven, Parity::EvenEven}) {
    if (to_string(p) == s) return p;
  }
  throw Error("unknown parity '" + std::string(s) + "'");
}

SubdomainBox::SubdomainBox(double lo1, double hi1, double lo2, double hi2)
    : lo1_(lo1), hi1_(hi1), lo2_(lo2), hi2_(hi2) {
  const bool ok = 0.0 <= lo1 && lo1 <= hi1 && hi1 <= 1.0 && 0.0 <= lo2 && lo2 <= hi2 && hi2 <= 1.0;
  if (!ok) throw DomainError("SubdomainBox must satisfy 0 <= lo <= hi <= 1 on both axes");
}

bool SubdomainBox::contains(const Point& x) const {
  return x[0] >= lo1_ && x[0] <= hi1_ && x[1] >= lo2_ && x[1] <= hi2_;
}

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(int cutoff, Parity parity)
    : coeffs_(Eigen::ArrayXXd::Zero(cutoff + 1, cutoff + 1)), parity_(parity) {
  if (cutoff < 1) throw ParameterError("SpectralField cutoff must be >= 1");
}

SpectralField::SpectralField(Eigen::ArrayXXd coeffs, Parity parity)
    : coeffs_(std::move(coeffs)), parity_(parity) {
  if (coeffs_.rows() != coeffs_.cols() || coeffs_.rows() < 2) {
    throw ParameterError("SpectralField coefficients must be square with cutoff >= 1");
  }
  clear_sine_zero_modes();
}

SpectralField SpectralField::mode(Wavenumber k, int cutoff) {
  if (k.k1 < 1 || k.k2 < 1) throw ParameterError("sine wavenumbers must be >= 1");
  SpectralField f(std::max({cutoff, k.k1, k.k2}));
  f.coeffs_(k.k1, k.k2) = 1.0;
  return f;
}

void SpectralField::clear_sine_zero_modes() {
  if (basis_x1(parity_) == Basis::Sine) coeffs_.row(0).setZero();
  if (basis_x2(parity_) == Basis::Sine) coeffs_.col(0).setZero();
}

double SpectralField::operator()(double x1, double x2) const {
  const int k = cutoff();
  const Eigen::VectorXd v1 = basis_row(basis_x1(parity_), k, x1);
  const Eigen::VectorXd v2 = basis_row(basis_x2(parity_), k, x2);
  return v1.dot(coeffs_.matrix() * v2);
}

Eigen::ArrayXXd SpectralField::tensor(const Eigen::ArrayXd& x1, const Eigen::ArrayXd& x2) const {
  const int k = cutoff();
  const Eigen::MatrixXd b1 = basis_matrix(basis_x1(parity_), k, x1);
  const Eigen::MatrixXd b2 = basis_matrix(basis_x2(parity_), k, x2);
  return (b1 * coeffs_.matrix() * b2.transpose()).array();
}

SpectralField SpectralField::resized(int cutoff) const {
  Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(cutoff + 1, cutoff + 1);
  const int m = std::min(cutoff, this->cutoff()) + 1;
  c.topLeftCorner(m, m) = coeffs_.topLeftCorner(m, m);
  return SpectralField(std::move(c), parity_);
}

double SpectralField::l2_norm() const {
  // int_0^1 sin^2 = int_0^1 cos^2 = 1/2 for k >= 1; int_0^1 cos^2(0) = 1.
  Eigen::ArrayXd w = Eigen::ArrayXd::Constant(coeffs_.rows(), 0.5);
  Eigen::ArrayXd w1 = w, w2 = w;
  if (basis_x1(parity_) == Basis::Cosine) w1(0) = 1.0;
  if (basis_x2(parity_) == Basis::Cosine) w2(0) = 1.0;
  Eigen::ArrayXXd sq = coeffs_.square();
  sq.colwise() *= w1;
  sq.rowwise() *= w2.transpose();
  return std::sqrt(sq.sum());
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (other.parity_ != parity_) throw Error("cannot add fields of different parity");
  if (other.cutoff() > cutoff()) *this = resized(other.cutoff());
  const int m = other.cutoff() + 1;
  coeffs_.topLeftCorner(m, m) += other.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator*(double s, SpectralField f) { return f *= s; }

// ---------------------------------------------------------------------------
// GridField and transforms

double GridField::l2_norm() const {
  const int m = n();
  Eigen::ArrayXd w = Eigen::ArrayXd::Ones(m);
  w(0) = 0.5;
  Eigen::ArrayXXd sq = values.square();
  sq.colwise() *= w;
  sq.rowwise() *= w.transpose();
  return std::sqrt(sq.sum()) * spacing();
}

GridField to_grid(const SpectralField& f, int n) {
  if (n < 2 * f.cutoff()) {
    throw ResolutionError("to_grid: N = " + std::to_string(n) + " is below 2 * cutoff = " +
                          std::to_string(2 * f.cutoff()));
  }
  GridField g;
  g.parity = f.parity();
  g.values = full_nodes(f, n).topLeftCorner(n, n);
  return g;
}

Projection project(const GridField& g, int cutoff) {
  const int n = g.n();
  if (n < 2) throw ResolutionError("project: grid must have N >= 2");
  if (g.parity != Parity::OddOdd) throw SymmetryError("project: only odd-odd grids can be projected");
  const double scale = std::max(1.0, g.values.abs().maxCoeff());
  const double edge = std::max(g.values.row(0).abs().maxCoeff(), g.values.col(0).abs().maxCoeff());
  if (edge > 1e-14 * scale) {
    throw SymmetryError("project: boundary rows x1 = 0 / x2 = 0 must vanish (found " +
                        std::to_string(edge) + ")");
  }
  if (cutoff < 0) cutoff = n / 2;
  cutoff = std::max(1, std::min(cutoff, n - 1));

  const Eigen::ArrayXXd all =
      transforms::analyze_sine_sine(g.values.bottomRightCorner(n - 1, n - 1), n);
  Projection p;
  p.field = SpectralField(all.topLeftCorner(cutoff + 1, cutoff + 1), Parity::OddOdd);
  const double total = all.square().sum();
  const double kept = p.field.coeffs().square().sum();
  p.discarded_l2 = 0.5 * std::sqrt(std::max(0.0, total - kept));
  return p;
}

SpectralField to_spectral(const GridField& g, int cutoff) { return project(g, cutoff).field; }

SpectralField derivative(const SpectralField& f, int axis, int order) {
  if (axis != 1 && axis != 2) throw ParameterError("derivative: axis must be 1 or 2");
  if (order != 1 && order != 2) throw ParameterError("derivative: order must be 1 or 2");
  const int k = f.cutoff();
  const Basis b = axis == 1 ? basis_x1(f.parity()) : basis_x2(f.parity());
  Eigen::ArrayXd factor(k + 1);
  Basis nb = b;
  for (int m = 0; m <= k; ++m) {
    const double w = kPi * m;
    if (order == 2) {
      factor(m) = -w * w;
    } else {
      factor(m) = b == Basis::Sine ? w : -w;
    }
  }
  if (order == 1) nb = b == Basis::Sine ? Basis::Cosine : Basis::Sine;

  Eigen::ArrayXXd c = f.coeffs();
  if (axis == 1) {
    c.colwise() *= factor;
  } else {
    c.rowwise() *= factor.transpose();
  }
  const Parity p = axis == 1 ? make_parity(nb, basis_x2(f.parity()))
                             : make_parity(basis_x1(f.parity()), nb);
  return SpectralField(std::move(c), p);
}

SupResult sup_norm_on(const SpectralField& f, const SubdomainBox& box, int n) {
  return sup_norm_on(std::vector<SpectralField>{f}, ComponentNorm::Euclidean, box, n);
}

SupResult sup_norm_on(const std::vector<SpectralField>& fs, ComponentNorm norm, const SubdomainBox& box, int n) {
  if (fs.empty()) throw ParameterError("sup_norm_on: no components");
  int cutoff = 0;
  for (const auto& f : fs) cutoff = std::max(cutoff, f.cutoff());
  if (n <= 0) n = std::max(2 * cutoff, 64);
  if (n < cutoff + 1) throw ResolutionError("sup_norm_on: sampling grid too coarse");
  const double h = 1.0 / n;

  auto combine = [norm](double acc, double v) {
    return norm == ComponentNorm::Euclidean ? acc + v * v : std::max(acc, std::abs(v));
  };
  auto finish = [norm](double acc) { return norm == ComponentNorm::Euclidean ? std::sqrt(acc) : acc; };
  auto g = [&](double x1, double x2) {
    double acc = 0.0;
    for (const auto& f : fs) acc = combine(acc, f(x1, x2));
    return finish(acc);
  };

  struct Candidate {
    double value;
    Point x;
  };
  std::vector<Candidate> cands;

  const int i0 = static_cast<int>(std::ceil(box.lo1() * n - 1e-9));
  const int i1 = static_cast<int>(std::floor(box.hi1() * n + 1e-9));
  const int j0 = static_cast<int>(std::ceil(box.lo2() * n - 1e-9));
  const int j1 = static_cast<int>(std::floor(box.hi2() * n + 1e-9));
  if (i0 <= i1 && j0 <= j1) {
    Eigen::ArrayXXd nodes = Eigen::ArrayXXd::Zero(i1 - i0 + 1, j1 - j0 + 1);
    for (const auto& f : fs) {
      const Eigen::ArrayXXd part = full_nodes(f, n).block(i0, j0, nodes.rows(), nodes.cols());
      nodes = norm == ComponentNorm::Euclidean ? (nodes + part.square()).eval() : nodes.max(part.abs()).eval();
    }
    if (norm == ComponentNorm::Euclidean) nodes = nodes.sqrt();
    // Keep the four largest nodes.
    for (Eigen::Index j = 0; j < nodes.cols(); ++j) {
      for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
        const double v = nodes(i, j);
        if (cands.size() < 4 || v > cands.back().value) {
          Candidate c{v, Point(std::clamp((i0 + i) * h, box.lo1(), box.hi1()),
                               std::clamp((j0 + j) * h, box.lo2(), box.hi2()))};
          cands.insert(std::upper_bound(cands.begin(), cands.end(), c,
                                        [](const Candidate& a, const Candidate& b) {
                                          return a.value > b.value;
                                        }),
                       c);
          if (cands.size() > 4) cands.pop_back();
        }
      }
    }
  } else {
    for (const Point& p : {Point(box.lo1(), box.lo2()), Point(box.hi1(), box.lo2()),
                           Point(box.lo1(), box.hi2()), Point(box.hi1(), box.hi2()),
                           Point(0.5 * (box.lo1() + box.hi1()), 0.5 * (box.lo2() + box.hi2()))}) {
      cands.push_back({g(p[0], p[1]), p});
    }
  }

  SupResult best{0.0, Point(box.lo1(), box.lo2())};
  for (const Candidate& c : cands) {
    if (c.value > best.value) best = {c.value, c.x};
  }
  if (best.value == 0.0) return best;

  for (const Candidate& c : cands) {
    Point x = c.x;
    const double a1 = std::max(box.lo1(), x[0] - h), b1 = std::min(box.hi1(), x[0] + h);
    const double a2 = std::max(box.lo2(), x[1] - h), b2 = std::min(box.hi2(), x[1] + h);
    for (int sweep = 0; sweep < 3; ++sweep) {
      x[0] = golden_argmax([&](double s) { return g(s, x[1]); }, a1, b1);
      x[1] = golden_argmax([&](double s) { return g(x[0], s); }, a2, b2);
    }
    const double v = g(x[0], x[1]);
    if (v > best.value) best = {v, x};
  }
  return best;
}

Eigen::ArrayXXd FieldSampler::tensor(const Eigen::ArrayXd& x1, const Eigen::ArrayXd& x2) const {
  Eigen::ArrayXXd out(x1.size(), x2.size());
  for (Eigen::Index j = 0; j < x2.size(); ++j) {
    for (Eigen::Index i = 0; i < x1.size(); ++i) out(i, j) = value(x1(i), x2(j));
  }
  return out;
}

}  // namespace oddflow
