#include "oddflow/transforms.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace oddflow::transforms {
namespace {

// The FFTW planner is not reentrant; execution of an existing plan on
// caller-owned arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

fftw_r2r_kind kind_of(Basis b) { return b == Basis::Sine ? FFTW_RODFT00 : FFTW_REDFT00; }

// Column-major (x1 fastest) m1 x m2 array == FFTW row-major [m2][m1].
fftw_plan plan_for(int m1, int m2, Basis b1, Basis b2) {
  using Key = std::tuple<int, int, int, int>;
  thread_local std::map<Key, PlanHandle> cache;
  const Key key{m1, m2, static_cast<int>(b1), static_cast<int>(b2)};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second.get();

  std::lock_guard lock(planner_mutex());
  double* in = fftw_alloc_real(static_cast<size_t>(m1) * m2);
  double* out = fftw_alloc_real(static_cast<size_t>(m1) * m2);
  fftw_plan p = fftw_plan_r2r_2d(m2, m1, in, out, kind_of(b2), kind_of(b1),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  if (p == nullptr) throw std::runtime_error("fftw: failed to create r2r plan");
  cache.emplace(key, PlanHandle(p));
  return p;
}

void execute(const Eigen::ArrayXXd& in, Eigen::ArrayXXd& out, Basis b1, Basis b2) {
  const int m1 = static_cast<int>(in.rows());
  const int m2 = static_cast<int>(in.cols());
  out.resize(m1, m2);
  if (m1 == 0 || m2 == 0) return;
  fftw_execute_r2r(plan_for(m1, m2, b1, b2), const_cast<double*>(in.data()), out.data());
}

// Input scaling turning coefficients c_k into FFTW r2r inputs so that the
// unnormalized transform returns point values.
Eigen::ArrayXd synthesis_weights(Basis b, int n) {
  const int m = node_count(b, n);
  Eigen::ArrayXd w = Eigen::ArrayXd::Constant(m, 0.5);
  if (b == Basis::Cosine) {
    w(0) = 1.0;
    w(m - 1) = 1.0;
  }
  return w;
}

}  // namespace

int node_count(Basis b, int n) { return b == Basis::Sine ? n - 1 : n + 1; }

int first_node(Basis b) { return b == Basis::Sine ? 1 : 0; }

Eigen::ArrayXXd synthesize(const Eigen::ArrayXXd& coeffs, Basis b1, Basis b2, int n) {
  if (n < 2) throw std::invalid_argument("synthesize: grid size must be >= 2");
  const int m1 = node_count(b1, n);
  const int m2 = node_count(b2, n);
  const int o1 = first_node(b1);
  const int o2 = first_node(b2);

  // Sine input slot s holds wavenumber s+1; cosine slot s holds wavenumber s.
  Eigen::ArrayXXd in = Eigen::ArrayXXd::Zero(m1, m2);
  const int k1max = std::min<int>(static_cast<int>(coeffs.rows()) - 1, m1 - 1 + o1);
  const int k2max = std::min<int>(static_cast<int>(coeffs.cols()) - 1, m2 - 1 + o2);
  for (int k2 = o2; k2 <= k2max; ++k2) {
    for (int k1 = o1; k1 <= k1max; ++k1) in(k1 - o1, k2 - o2) = coeffs(k1, k2);
  }
  in.colwise() *= synthesis_weights(b1, n);
  in.rowwise() *= synthesis_weights(b2, n).transpose();

  Eigen::ArrayXXd out;
  execute(in, out, b1, b2);
  return out;
}

Eigen::ArrayXXd analyze_sine_sine(const Eigen::ArrayXXd& interior, int n) {
  if (interior.rows() != n - 1 || interior.cols() != n - 1) {
    throw std::invalid_argument("analyze_sine_sine: expected (N-1)x(N-1) interior values");
  }
  Eigen::ArrayXXd out;
  execute(interior, out, Basis::Sine, Basis::Sine);
  Eigen::ArrayXXd coeffs = Eigen::ArrayXXd::Zero(n, n);
  coeffs.bottomRightCorner(n - 1, n - 1) = out / (static_cast<double>(n) * n);
  return coeffs;
}

}  // namespace oddflow::transforms
