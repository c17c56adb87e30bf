#include "oddflow/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "json.hpp"

namespace oddflow {
namespace {

double flat_exp(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// Reduces x to [-1,1) by 2-periodicity.
double wrap(double x) {
  if (x >= -1.0 && x < 1.0) return x;
  double y = std::fmod(x + 1.0, 2.0);
  if (y < 0.0) y += 2.0;
  return y - 1.0;
}

// Fourth-order one-sided first derivative of g at 0, stepping towards +dir.
double one_sided(const std::function<double(double)>& g, double h) {
  return (-25.0 * g(0) + 48.0 * g(h) - 36.0 * g(2 * h) + 16.0 * g(3 * h) - 3.0 * g(4 * h)) / (12.0 * h);
}

}  // namespace

std::string_view to_string(DataKind k) {
  switch (k) {
    case DataKind::PartI: return "part_i";
    case DataKind::PartII: return "part_ii";
    case DataKind::Custom: return "custom";
  }
  return "part_i";
}

DataKind data_kind_from_string(std::string_view s) {
  if (s == "part_i") return DataKind::PartI;
  if (s == "part_ii") return DataKind::PartII;
  if (s == "custom") return DataKind::Custom;
  throw ParameterError("unknown initial data kind '" + std::string(s) + "'");
}

void InitialDataSpec::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0,1)");
  if (!(delta > 0.0 && delta <= 0.1)) throw ParameterError("delta must lie in (0, 0.1]");
  if (!(amplitude > 0.0 && std::isfinite(amplitude))) throw ParameterError("amplitude must be positive");
}

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = flat_exp(t);
  return a / (a + flat_exp(1.0 - t));
}

InitialData::InitialData(const InitialDataSpec& spec) : spec_(spec) {
  spec_.validate();
  const double d = spec_.delta;
  // A tenth of the deficit is held back so that grid counting of the
  // plateau at audit resolution still sees area >= 1 - delta.
  const double budget = 0.9 * d;
  if (spec_.kind == DataKind::PartII) {
    // Plateau [d/4 + b, 1 - b]^2.
    strip_ = 0.25 * d;
    strip_blend_ = 0.5 * ((1.0 - std::sqrt(1.0 - budget)) - strip_);
    edge_ = strip_blend_;
  } else {
    // Corner profile on r <= sqrt2 d (so the diagonal formula holds for
    // s <= d), gone by r = 2 sqrt2 d. The quarter disc costs 2 pi d^2 of
    // plateau; the edge strips take the rest of the budget.
    r_in_ = std::sqrt(2.0) * d;
    r_out_ = 2.0 * std::sqrt(2.0) * d;
    edge_ = 0.5 * (1.0 - std::sqrt(1.0 - budget + 2.0 * kPi * d * d));
  }
}

double InitialData::part_i(double x1, double x2) const {
  const double e1 = smooth_step(x1 / edge_) * smooth_step((1.0 - x1) / edge_);
  const double e2 = smooth_step(x2 / edge_) * smooth_step((1.0 - x2) / edge_);
  const double g = e1 * e2;
  const double r2 = x1 * x1 + x2 * x2;
  if (r2 >= r_out_ * r_out_) return g;
  if (r2 == 0.0) return 0.0;
  const double r = std::sqrt(r2);
  const double profile = std::pow(r / std::sqrt(2.0), 1.0 + spec_.alpha) * 2.0 * x1 * x2 / r2;
  const double chi = 1.0 - smooth_step((r - r_in_) / (r_out_ - r_in_));
  return chi * profile + (1.0 - chi) * g;
}

double InitialData::part_ii(double x1, double x2) const {
  const double s1 = std::sin(kPi * x1);
  const double p = s1 * s1 * s1 * std::sin(kPi * x2);
  const double w = smooth_step((x1 - strip_) / strip_blend_) * smooth_step((x2 - strip_) / strip_blend_);
  if (w == 0.0) return p;
  const double e = smooth_step((1.0 - x1) / edge_) * smooth_step((1.0 - x2) / edge_);
  return (1.0 - w) * p + w * e;
}

double InitialData::quadrant(double x1, double x2) const {
  switch (spec_.kind) {
    case DataKind::PartI: return part_i(x1, x2);
    case DataKind::PartII: return part_ii(x1, x2);
    case DataKind::Custom: return spec_.amplitude * part_i(x1, x2);
  }
  return 0.0;
}

double InitialData::operator()(double x1, double x2) const {
  x1 = wrap(x1);
  x2 = wrap(x2);
  const double sign = (x1 < 0.0 ? -1.0 : 1.0) * (x2 < 0.0 ? -1.0 : 1.0);
  return sign * quadrant(std::abs(x1), std::abs(x2));
}

GridField InitialData::grid(int n) const {
  if (n < 2) throw ResolutionError("grid size must be >= 2");
  GridField g;
  g.values.resize(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) g.values(i, j) = quadrant(double(i) / n, double(j) / n);
  }
  return g;
}

Projection InitialData::spectral(int n, int cutoff) const {
  Projection p = project(grid(n), cutoff);
  if (spec_.kind != DataKind::PartII) return p;

  // Enforce sum_k1 k1 c(k1,k2) = 0 for every k2, the spectral form of
  // d1 omega(0, x2) = 0, with the least-squares smallest change.
  Eigen::ArrayXXd c = p.field.coeffs();
  const int k = p.field.cutoff();
  Eigen::ArrayXd k1 = Eigen::ArrayXd::LinSpaced(k + 1, 0, k);
  const double norm = k1.square().sum();
  for (int k2 = 1; k2 <= k; ++k2) {
    const double lambda = (k1 * c.col(k2)).sum() / norm;
    c.col(k2) -= lambda * k1;
  }
  p.field = SpectralField(std::move(c), Parity::OddOdd);
  return p;
}

GridField build_part_i(const InitialDataSpec& spec, int n) {
  InitialDataSpec s = spec;
  s.kind = DataKind::PartI;
  return InitialData(s).grid(n);
}

GridField build_part_ii(const InitialDataSpec& spec, int n) {
  InitialDataSpec s = spec;
  s.kind = DataKind::PartII;
  return InitialData(s).grid(n);
}

std::string AuditReport::to_json() const {
  nlohmann::json j;
  j["kind"] = std::string(to_string(kind));
  j["oddness_residual"] = oddness_residual;
  j["plateau_measure"] = plateau_measure;
  j["plateau_monte_carlo"] = plateau_monte_carlo;
  j["plateau_required"] = plateau_required;
  j["sup_norm"] = sup_norm;
  j["min_value"] = min_value;
  j["profile_deviation"] = profile_deviation;
  j["seam_jump"] = seam_jump;
  if (kind != DataKind::PartII) j["diagonal_slope"] = diagonal_slope;
  j["passed"] = passed;
  return j.dump(2);
}

AuditReport audit(const InitialData& data, int n, unsigned seed) {
  const InitialDataSpec& spec = data.spec();
  const double amp = spec.kind == DataKind::Custom ? spec.amplitude : 1.0;
  AuditReport rep;
  rep.kind = spec.kind;
  rep.plateau_required = 1.0 - spec.delta;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0), unit(0.0, 1.0);

  for (int q = 0; q < 100; ++q) {
    const double a = sym(rng), b = sym(rng);
    const double v = data(a, b);
    rep.oddness_residual = std::max({rep.oddness_residual, std::abs(v + data(-a, b)),
                                     std::abs(v + data(a, -b))});
  }

  // Cell-centre counting, range and Monte-Carlo plateau.
  long plateau = 0;
  rep.min_value = amp;
  for (int j = 0; j < n; ++j) {
    const double x2 = (j + 0.5) / n;
    for (int i = 0; i < n; ++i) {
      const double v = data((i + 0.5) / n, x2);
      if (v == amp) ++plateau;
      rep.sup_norm = std::max(rep.sup_norm, v);
      rep.min_value = std::min(rep.min_value, v);
    }
  }
  rep.plateau_measure = double(plateau) / (double(n) * n);
  const long samples = 200000;
  long hits = 0;
  for (long q = 0; q < samples; ++q) hits += data(unit(rng), unit(rng)) == amp;
  rep.plateau_monte_carlo = double(hits) / samples;

  // Profile match and seams.
  std::vector<std::pair<Point, Point>> seams;  // (point, unit normal)
  if (spec.kind == DataKind::PartII) {
    for (int q = 0; q < 500; ++q) {
      const double s = spec.delta / 4 * unit(rng), t = unit(rng);
      const double p = std::pow(std::sin(kPi * s), 3) * std::sin(kPi * t);
      rep.profile_deviation = std::max(rep.profile_deviation, std::abs(data(s, t) - p));
      const double p2 = std::pow(std::sin(kPi * t), 3) * std::sin(kPi * s);
      rep.profile_deviation = std::max(rep.profile_deviation, std::abs(data(t, s) - p2));
    }
    const double lines[] = {data.strip_width(), data.strip_width() + data.strip_blend(), 1.0 - data.edge_width()};
    for (int q = 0; q < 100; ++q) {
      const double c = lines[q % 3];
      const double t = 0.1 + 0.8 * unit(rng);
      if (q % 2 == 0) seams.push_back({Point(c, t), Point(1, 0)});
      else seams.push_back({Point(t, c), Point(0, 1)});
    }
  } else {
    const double half = spec.delta / 2;
    for (int q = 0; q < 500; ++q) {
      const double r = half * std::sqrt(unit(rng)), phi = 0.5 * kPi * unit(rng);
      const double x1 = r * std::cos(phi), x2 = r * std::sin(phi);
      const double p = amp * std::pow(r / std::sqrt(2.0), 1.0 + spec.alpha) * std::sin(2.0 * phi);
      rep.profile_deviation = std::max(rep.profile_deviation, std::abs(data(x1, x2) - p));
    }
    for (int q = 0; q < 100; ++q) {
      if (q % 2 == 0) {
        const double r = q % 4 == 0 ? data.profile_radius() : data.blend_radius();
        const double phi = kPi / 2 * (0.1 + 0.8 * unit(rng));
        seams.push_back({Point(r * std::cos(phi), r * std::sin(phi)), Point(std::cos(phi), std::sin(phi))});
      } else {
        const double c = q % 4 == 1 ? data.edge_width() : 1.0 - data.edge_width();
        const double t = 0.2 + 0.6 * unit(rng);
        if (q % 8 < 4) seams.push_back({Point(c, t), Point(1, 0)});
        else seams.push_back({Point(t, c), Point(0, 1)});
      }
    }
    // Second differences along the diagonal: slope alpha - 1 in log-log.
    Eigen::ArrayXd ls(20), ld(20);
    for (int q = 0; q < 20; ++q) {
      const double s = spec.delta / 4 * std::pow(10.0, -2.0 * q / 19.0);
      const double h = s / 10;
      const double d2 = (data(s + h, s + h) - 2.0 * data(s, s) + data(s - h, s - h)) / (h * h);
      ls(q) = std::log(s);
      ld(q) = std::log(std::abs(d2));
    }
    const double mx = ls.mean(), my = ld.mean();
    rep.diagonal_slope = ((ls - mx) * (ld - my)).sum() / (ls - mx).square().sum();
  }

  const double narrowest = spec.kind == DataKind::PartII
                              ? std::min(data.strip_blend(), data.edge_width())
                              : std::min(data.edge_width(), data.blend_radius() - data.profile_radius());
  const double h = 1e-3 * narrowest;
  for (const auto& [x, nrm] : seams) {
    auto along = [&](double sgn) {
      return [&, sgn](double t) { return data(x[0] + sgn * t * nrm[0], x[1] + sgn * t * nrm[1]); };
    };
    const double right = one_sided(along(1.0), h);
    const double left = -one_sided(along(-1.0), h);
    rep.seam_jump = std::max(rep.seam_jump, std::abs(right - left));
  }

  rep.passed = rep.oddness_residual == 0.0 && rep.plateau_measure >= rep.plateau_required &&
               std::abs(rep.sup_norm - amp) <= 1e-12 * amp && rep.min_value >= 0.0 &&
               rep.profile_deviation <= 1e-10 && rep.seam_jump <= 1e-8;
  if (spec.kind != DataKind::PartII) rep.passed = rep.passed && std::abs(rep.diagonal_slope - (spec.alpha - 1.0)) <= 0.05;
  return rep;
}

}  // namespace oddflow
