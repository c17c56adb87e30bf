#include "oddflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "oddflow/types.hpp"

namespace oddflow::quad {
namespace {

Rule compute_gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  if (n == 1) {
    r.nodes(0) = 0.0;
    r.weights(0) = 2.0;
    return r;
  }
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes(i) = -x;
    r.nodes(n - 1 - i) = x;
    r.weights(i) = w;
    r.weights(n - 1 - i) = w;
  }
  return r;
}

// Maps a rule on [-1,1] to [a,b].
void mapped(const Rule& r, double a, double b, double* x, double* w) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (Eigen::Index i = 0; i < r.nodes.size(); ++i) {
    x[i] = mid + half * r.nodes(i);
    w[i] = half * r.weights(i);
  }
}

std::uint64_t key_of(double v) {
  std::uint64_t k;
  std::memcpy(&k, &v, sizeof k);
  return k;
}

// Integrates f over each cell with the order x order Gauss rule, batching
// cells that share the same x1 panel into one tensor evaluation.
std::vector<double> integrate_cells(const TensorFn& f, const std::vector<Rect>& cells, int order) {
  const Rule& g = gauss_legendre(order);
  std::vector<double> out(cells.size(), 0.0);

  std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<size_t>> bands;
  for (size_t c = 0; c < cells.size(); ++c) {
    bands[{key_of(cells[c].lo1), key_of(cells[c].hi1)}].push_back(c);
  }

  Eigen::ArrayXd y1(order), w1(order);
  for (const auto& [key, members] : bands) {
    const Rect& first = cells[members.front()];
    mapped(g, first.lo1, first.hi1, y1.data(), w1.data());

    // Unique x2 panels within the band.
    std::map<std::pair<std::uint64_t, std::uint64_t>, int> panel_offset;
    std::vector<std::pair<double, double>> panels;
    for (size_t c : members) {
      auto k2 = std::make_pair(key_of(cells[c].lo2), key_of(cells[c].hi2));
      if (panel_offset.emplace(k2, static_cast<int>(panels.size()) * order).second) {
        panels.emplace_back(cells[c].lo2, cells[c].hi2);
      }
    }
    Eigen::ArrayXd y2(static_cast<Eigen::Index>(panels.size()) * order);
    Eigen::ArrayXd w2(y2.size());
    for (size_t p = 0; p < panels.size(); ++p) {
      mapped(g, panels[p].first, panels[p].second, y2.data() + p * order, w2.data() + p * order);
    }
    const Eigen::ArrayXXd vals = f(y1, y2);
    const Eigen::ArrayXd col = (vals.colwise() * w1).colwise().sum().transpose() * w2;
    for (size_t c : members) {
      const int off = panel_offset.at({key_of(cells[c].lo2), key_of(cells[c].hi2)});
      out[c] = col.segment(off, order).sum();
    }
  }
  return out;
}

}  // namespace

const Rule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  static std::mutex m;
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Rule>(compute_gauss_legendre(n));
  return *slot;
}

Rule composite(const std::vector<double>& breaks, int order) {
  const Rule& g = gauss_legendre(order);
  Rule r;
  const Eigen::Index panels = static_cast<Eigen::Index>(breaks.size()) - 1;
  r.nodes.resize(std::max<Eigen::Index>(0, panels) * order);
  r.weights.resize(r.nodes.size());
  for (Eigen::Index p = 0; p < panels; ++p) {
    mapped(g, breaks[p], breaks[p + 1], r.nodes.data() + p * order, r.weights.data() + p * order);
  }
  return r;
}

Eigen::ArrayXd chebyshev_points(int m, double a, double b) {
  Eigen::ArrayXd x(m);
  for (int j = 0; j < m; ++j) {
    const double t = std::cos(kPi * j / (m - 1));
    x(j) = 0.5 * (a + b) + 0.5 * (b - a) * t;
  }
  return x;
}

Eigen::MatrixXd chebyshev_interpolation_matrix(int m, double a, double b, const Eigen::ArrayXd& x) {
  const Eigen::ArrayXd nodes = chebyshev_points(m, a, b);
  Eigen::ArrayXd bw(m);
  for (int j = 0; j < m; ++j) bw(j) = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == m - 1) ? 0.5 : 1.0);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(x.size(), m);
  for (Eigen::Index q = 0; q < x.size(); ++q) {
    int exact = -1;
    double denom = 0.0;
    for (int j = 0; j < m; ++j) {
      const double d = x(q) - nodes(j);
      if (d == 0.0) {
        exact = j;
        break;
      }
      L(q, j) = bw(j) / d;
      denom += L(q, j);
    }
    if (exact >= 0) {
      L.row(q).setZero();
      L(q, exact) = 1.0;
    } else {
      L.row(q) /= denom;
    }
  }
  return L;
}

PointRule duffy_rectangle(double apex1, double apex2, double opposite1, double opposite2, int order) {
  const Rule& g = gauss_legendre(order);
  const double d1 = opposite1 - apex1;
  const double d2 = opposite2 - apex2;
  const double jac = std::abs(d1 * d2);
  PointRule r;
  const Eigen::Index n = 2 * order * order;
  r.y1.resize(n);
  r.y2.resize(n);
  r.w.resize(n);
  Eigen::Index q = 0;
  for (int tri = 0; tri < 2; ++tri) {
    for (int i = 0; i < order; ++i) {
      const double u = 0.5 * (1.0 + g.nodes(i));
      const double wu = 0.5 * g.weights(i);
      for (int j = 0; j < order; ++j) {
        const double v = 0.5 * (1.0 + g.nodes(j));
        const double wv = 0.5 * g.weights(j);
        if (tri == 0) {
          r.y1(q) = apex1 + u * d1;
          r.y2(q) = apex2 + u * v * d2;
        } else {
          r.y1(q) = apex1 + u * v * d1;
          r.y2(q) = apex2 + u * d2;
        }
        r.w(q) = jac * u * wu * wv;
        ++q;
      }
    }
  }
  return r;
}

QuadtreeResult integrate_quadtree(const TensorFn& f, const Rect& region, const QuadtreeOptions& opts) {
  QuadtreeResult res;
  if (region.area() <= 0.0) return res;

  const int s1 = std::max(1, static_cast<int>(std::ceil((region.hi1 - region.lo1) / opts.max_initial_cell - 1e-12)));
  const int s2 = std::max(1, static_cast<int>(std::ceil((region.hi2 - region.lo2) / opts.max_initial_cell - 1e-12)));
  std::vector<Rect> cells;
  cells.reserve(static_cast<size_t>(s1) * s2);
  for (int i = 0; i < s1; ++i) {
    const double a1 = region.lo1 + (region.hi1 - region.lo1) * i / s1;
    const double b1 = i + 1 == s1 ? region.hi1 : region.lo1 + (region.hi1 - region.lo1) * (i + 1) / s1;
    for (int j = 0; j < s2; ++j) {
      const double a2 = region.lo2 + (region.hi2 - region.lo2) * j / s2;
      const double b2 = j + 1 == s2 ? region.hi2 : region.lo2 + (region.hi2 - region.lo2) * (j + 1) / s2;
      cells.push_back({a1, b1, a2, b2});
    }
  }
  std::vector<double> coarse = integrate_cells(f, cells, opts.order);
  long evaluated = static_cast<long>(cells.size());

  double estimate = 0.0;
  for (double c : coarse) estimate += c;
  const double total_area = region.area();

  for (int depth = 0; !cells.empty(); ++depth) {
    std::vector<Rect> children;
    children.reserve(cells.size() * 4);
    for (const Rect& c : cells) {
      const double m1 = 0.5 * (c.lo1 + c.hi1);
      const double m2 = 0.5 * (c.lo2 + c.hi2);
      children.push_back({c.lo1, m1, c.lo2, m2});
      children.push_back({c.lo1, m1, m2, c.hi2});
      children.push_back({m1, c.hi1, c.lo2, m2});
      children.push_back({m1, c.hi1, m2, c.hi2});
    }
    const std::vector<double> fine = integrate_cells(f, children, opts.order);
    evaluated += static_cast<long>(children.size());

    if (depth == 0) {
      estimate = 0.0;
      for (double v : fine) estimate += v;
    }
    const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(estimate));
    const bool out_of_budget = depth + 1 >= opts.max_depth || evaluated >= opts.max_evaluated_cells;

    std::vector<Rect> next;
    std::vector<double> next_coarse;
    for (size_t c = 0; c < cells.size(); ++c) {
      const double sum = fine[4 * c] + fine[4 * c + 1] + fine[4 * c + 2] + fine[4 * c + 3];
      const double err = std::abs(sum - coarse[c]);
      const double share = tol * cells[c].area() / total_area;
      if (err <= share || out_of_budget) {
        res.value += sum;
        res.error += err;
        ++res.leaves;
        if (err > share) res.converged = false;
      } else {
        for (int k = 0; k < 4; ++k) {
          next.push_back(children[4 * c + k]);
          next_coarse.push_back(fine[4 * c + k]);
        }
      }
    }
    res.depth = depth + 1;
    cells = std::move(next);
    coarse = std::move(next_coarse);
  }
  return res;
}

}  // namespace oddflow::quad
