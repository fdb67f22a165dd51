#include "tqff/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "tqff/error.hpp"

namespace tqff {
namespace {

using ld = long double;

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
constexpr ld kXgk[8] = {
    0.991455371120812639206854697526329L, 0.949107912342758524526189684047851L,
    0.864864423359769072789712788640926L, 0.741531185599394439863864773280788L,
    0.586087235467691130294144845693013L, 0.405845151377397166906606412076961L,
    0.207784955007898467600689403773245L, 0.000000000000000000000000000000000L};
constexpr ld kWgk[8] = {
    0.022935322010529224963732008058970L, 0.063092092629978553290700663189204L,
    0.104790010322250183839876322541518L, 0.140653259715525918745189590510238L,
    0.169004726639267902826583426598550L, 0.190350578064785409913256402421014L,
    0.204432940075298892414161999234649L, 0.209482141084727828012999174891714L};
constexpr ld kWg[4] = {
    0.129484966168869693270611432679082L, 0.279705391489276667901467771423780L,
    0.381830050505118944950369775488975L, 0.417959183673469387755102040816327L};

struct Panel {
  ld a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<ld(ld)>& f, ld a, ld b, long& evals) {
  const ld centre = 0.5L * (a + b);
  const ld half = 0.5L * (b - a);
  const ld fc = f(centre);
  ld kron = fc * kWgk[7];
  ld gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const ld dx = half * kXgk[j];
    const ld f1 = f(centre - dx);
    const ld f2 = f(centre + dx);
    kron += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  evals += 15;
  kron *= half;
  gauss *= half;
  if (!std::isfinite(kron)) throw Error(ErrorCode::NonFinite, "integrand is not finite");
  return {a, b, kron, std::fabs(kron - gauss)};
}

}  // namespace

IntegralResult integrate_adaptive(const std::function<ld(ld)>& f, ld a, ld b, ld tol,
                                  const IntegrationOptions& options) {
  if (!(tol > 0.0L)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (!(a < b)) throw Error(ErrorCode::InvalidInterval, "need a < b");
  int initial = 1;
  if (options.frequency_hint > 0.0) {
    const ld width = std::numbers::pi_v<ld> / (4.0L * options.frequency_hint);
    initial = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
  }
  IntegralResult result;
  std::priority_queue<Panel> queue;
  ld total = 0.0L;
  ld error = 0.0L;
  const ld h = (b - a) / initial;
  for (int i = 0; i < initial; ++i) {
    const ld lo = a + i * h;
    const ld hi = i + 1 == initial ? b : a + (i + 1) * h;
    Panel p = gk15(f, lo, hi, result.evaluations);
    total += p.value;
    error += p.error;
    queue.push(p);
  }
  int subdivisions = 0;
  while (error > tol) {
    if (++subdivisions > options.max_subdivisions) {
      throw Error(ErrorCode::MaxSubdivision, "adaptive integration exceeded subdivision limit");
    }
    const Panel worst = queue.top();
    queue.pop();
    const ld mid = 0.5L * (worst.a + worst.b);
    const Panel left = gk15(f, worst.a, mid, result.evaluations);
    const Panel right = gk15(f, mid, worst.b, result.evaluations);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }
  // Re-sum to shed drift from the incremental updates.
  total = 0.0L;
  error = 0.0L;
  while (!queue.empty()) {
    total += queue.top().value;
    error += queue.top().error;
    queue.pop();
  }
  result.value = total;
  result.abs_error_estimate = error;
  return result;
}

ld trig_moment(const StandardizedDensity& density, double gamma, double k, ld tol) {
  const ld g = gamma;
  const ld kk = k;
  IntegrationOptions opt;
  opt.frequency_hint = std::max(1.0, std::fabs(k));
  const auto r = integrate_adaptive(
      [&](ld w) { return g * density.pdf(g * w) * std::cos(kk * w); }, 0.0L, std::numbers::pi_v<ld>,
      tol / 2, opt);
  return 2.0L * r.value;
}

double truncated_fourier(const KernelSpec& spec, std::span<const double> tau) {
  if (static_cast<int>(tau.size()) != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "tau dimension");
  const SpectralDecomposition sd = standardized_density(spec);
  ld value = sd.g;
  for (int j = 0; j < spec.dim(); ++j) {
    const double k = spec.gamma * tau[j] / spec.hyper.lengthscales[j];
    value *= trig_moment(*sd.density, spec.gamma, k);
  }
  return static_cast<double>(value);
}

namespace {

CertificateRow make_row(std::vector<int> k, double quad, double oracle) {
  CertificateRow row;
  row.k = std::move(k);
  row.quad = quad;
  row.oracle = oracle;
  row.abs_err = std::fabs(quad - oracle);
  row.pass = row.abs_err <= kExactnessTol * std::max(1.0, std::fabs(oracle));
  return row;
}

void finalize(Certificate& cert) {
  cert.passed = true;
  for (const auto& row : cert.rows) {
    const int norm = row.k.empty() ? 0 : *std::max_element(row.k.begin(), row.k.end());
    if (!row.pass) {
      if (cert.first_failure < 0 || norm < cert.first_failure) cert.first_failure = norm;
      if (norm <= cert.claimed_degree) cert.passed = false;
    }
  }
}

// Enumerates {0..max}^d in lexicographic order.
template <typename Fn>
void for_each_multi_index(int d, int max, Fn&& fn) {
  std::vector<int> k(d, 0);
  while (true) {
    fn(k);
    int j = d - 1;
    for (; j >= 0; --j) {
      if (++k[j] <= max) break;
      k[j] = 0;
    }
    if (j < 0) return;
  }
}

}  // namespace

Certificate exactness_certificate(const QuadratureRule1D& rule, const StandardizedDensity& density,
                                  int max_degree) {
  if (rule.kind != RuleKind::Trig) throw Error(ErrorCode::InvalidArgument, "certificate needs a trig rule");
  Certificate cert;
  cert.claimed_degree = rule.exactness_degree;
  for (int k = 0; k <= max_degree; ++k) {
    double quad = 0.0;
    for (int l = 0; l < rule.size(); ++l) quad += rule.weights[l] * std::cos(k * rule.nodes[l]);
    cert.rows.push_back(
        make_row({k}, quad, static_cast<double>(trig_moment(density, rule.gamma, k))));
  }
  finalize(cert);
  return cert;
}

Certificate exactness_certificate(const TensorRule& rule, const StandardizedDensity& density, double gamma,
                                  int max_degree) {
  Certificate cert;
  cert.claimed_degree = rule.exactness_degree;
  std::vector<ld> moments(max_degree + 1);
  for (int k = 0; k <= max_degree; ++k) moments[k] = trig_moment(density, gamma, k);
  for_each_multi_index(rule.dim, max_degree, [&](const std::vector<int>& k) {
    double quad = 0.0;
    for (int s = 0; s < rule.size(); ++s) {
      double arg = 0.0;
      for (int j = 0; j < rule.dim; ++j) arg += rule.frequencies[s][j] * k[j];
      quad += rule.weights[s] * std::cos(arg);
    }
    ld oracle = 1.0L;
    for (int kj : k) oracle *= moments[kj];
    cert.rows.push_back(make_row(k, quad, static_cast<double>(oracle)));
  });
  finalize(cert);
  return cert;
}

Certificate exactness_certificate(const FeatureMap& map, int max_degree) {
  Certificate cert;
  cert.claimed_degree = map.method == FeatureMethod::TQFF ? 2 * map.size - 1 : max_degree;
  const double g = map.spec.hyper.scale;
  const int d = map.dim();
  for_each_multi_index(d, max_degree, [&](const std::vector<int>& k) {
    std::vector<double> tau(d);
    for (int j = 0; j < d; ++j) tau[j] = k[j] * map.spec.hyper.lengthscales[j] / map.spec.gamma;
    cert.rows.push_back(make_row(k, approx_kernel(map, tau) / g, truncated_fourier(map.spec, tau) / g));
  });
  finalize(cert);
  return cert;
}

}  // namespace tqff
