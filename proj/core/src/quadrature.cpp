#include "tqff/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "tqff/error.hpp"

namespace tqff {
namespace {

using ld = long double;

struct GaussNodesLd {
  std::vector<ld> abscissae;
  std::vector<ld> weights;
};

GaussNodesLd golub_welsch_ld(const std::vector<ld>& diag, const std::vector<ld>& offdiag_sq,
                             ld mu0) {
  const int n = static_cast<int>(diag.size());
  std::vector<ld> d(diag);
  std::vector<ld> e(n, 0.0L);
  for (int i = 0; i + 1 < n; ++i) e[i] = std::sqrt(offdiag_sq[i]);
  // First row of the accumulated eigenvector matrix.
  std::vector<ld> z(n, 0.0L);
  z[0] = 1.0L;

  constexpr int kMaxIter = 100;
  const ld eps = std::numeric_limits<ld>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const ld dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (++iter > kMaxIter) {
          throw Error(ErrorCode::EigenFailure,
                      "implicit QL did not converge for eigenvalue " + std::to_string(l));
        }
        ld g = (d[l + 1] - d[l]) / (2.0L * e[l]);
        ld r = std::hypot(g, 1.0L);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        ld s = 1.0L;
        ld c = 1.0L;
        ld p = 0.0L;
        int i = m - 1;
        for (; i >= l; --i) {
          ld f = s * e[i];
          const ld b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0L) {
            d[i + 1] -= p;
            e[m] = 0.0L;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0L * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0L && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0L;
      }
    } while (m != l);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  GaussNodesLd out;
  out.abscissae.reserve(n);
  out.weights.reserve(n);
  for (int idx : order) {
    if (!std::isfinite(d[idx]) || !std::isfinite(z[idx])) {
      throw Error(ErrorCode::EigenFailure, "non-finite eigenpair");
    }
    out.abscissae.push_back(d[idx]);
    out.weights.push_back(mu0 * z[idx] * z[idx]);
  }
  return out;
}

struct DiscreteMeasure {
  std::vector<ld> z;  // cos(w)
  std::vector<ld> w;
};

DiscreteMeasure discretize(const WeightFunction& weight, int panels, int points) {
  std::vector<ld> gx;
  std::vector<ld> gw;
  gauss_legendre_reference(points, gx, gw);
  DiscreteMeasure m;
  m.z.reserve(static_cast<std::size_t>(panels) * points);
  m.w.reserve(static_cast<std::size_t>(panels) * points);
  const ld pi = std::numbers::pi_v<ld>;
  const ld h = pi / panels;
  for (int p = 0; p < panels; ++p) {
    const ld mid = (p + 0.5L) * h;
    for (int q = 0; q < points; ++q) {
      const ld omega = mid + 0.5L * h * gx[q];
      const ld wt = weight(omega);
      if (!(wt >= 0.0L) || !std::isfinite(wt)) {
        throw Error(ErrorCode::InvalidArgument, "weight must be finite and nonnegative");
      }
      // Factor 2 folds the even weight on [-pi, 0] onto [0, pi].
      m.z.push_back(std::cos(omega));
      m.w.push_back(2.0L * 0.5L * h * gw[q] * wt);
    }
  }
  return m;
}

struct RecurrenceLd {
  std::vector<ld> diag;
  std::vector<ld> offdiag_sq;
  ld mu0 = 0.0L;
};

RecurrenceLd stieltjes_discrete(const DiscreteMeasure& m, int L) {
  const std::size_t n = m.z.size();
  std::vector<ld> p_prev(n, 0.0L);
  std::vector<ld> p(n, 1.0L);
  std::vector<ld> p_next(n);
  RecurrenceLd out;
  out.diag.resize(L);
  out.offdiag_sq.resize(L > 0 ? L - 1 : 0);
  ld norm_prev = 0.0L;
  for (int k = 0; k < L; ++k) {
    ld norm = 0.0L;
    ld moment = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const ld t = m.w[i] * p[i] * p[i];
      norm += t;
      moment += t * m.z[i];
    }
    if (!(norm > 0.0L) || !std::isfinite(norm)) {
      throw Error(ErrorCode::NonPositiveMoment,
                  "squared norm of degree-" + std::to_string(k) + " polynomial is not positive");
    }
    if (k == 0) out.mu0 = norm;
    const ld b = moment / norm;
    ld a = 0.0L;
    if (k > 0) {
      a = norm / norm_prev;
      if (!(a > 0.0L) || !std::isfinite(a)) {
        throw Error(ErrorCode::NonPositiveMoment, "A_" + std::to_string(k) + " <= 0");
      }
      out.offdiag_sq[k - 1] = a;
    }
    out.diag[k] = b;
    for (std::size_t i = 0; i < n; ++i) p_next[i] = (m.z[i] - b) * p[i] - a * p_prev[i];
    std::swap(p_prev, p);
    std::swap(p, p_next);
    norm_prev = norm;
  }
  return out;
}

ld max_coefficient_change(const RecurrenceLd& a, const RecurrenceLd& b) {
  ld diff = std::fabs(a.mu0 - b.mu0) / std::max(1.0L, std::fabs(a.mu0));
  for (std::size_t i = 0; i < a.diag.size(); ++i) diff = std::max(diff, std::fabs(a.diag[i] - b.diag[i]));
  for (std::size_t i = 0; i < a.offdiag_sq.size(); ++i) {
    diff = std::max(diff, std::fabs(a.offdiag_sq[i] - b.offdiag_sq[i]));
  }
  return diff;
}

RecurrenceLd stabilized_recurrence(const WeightFunction& weight, int L, const StieltjesOptions& opt) {
  if (L < 1) throw Error(ErrorCode::InvalidL, "L must be >= 1, got " + std::to_string(L));
  int panels = opt.initial_panels;
  RecurrenceLd coarse = stieltjes_discrete(discretize(weight, panels, opt.points_per_panel), L);
  while (panels * 2 <= opt.max_panels) {
    panels *= 2;
    RecurrenceLd fine = stieltjes_discrete(discretize(weight, panels, opt.points_per_panel), L);
    const ld change = max_coefficient_change(coarse, fine);
    coarse = std::move(fine);
    if (change <= opt.stabilization_tol) return coarse;
  }
  throw Error(ErrorCode::DiscretizationUnstable,
              "recurrence coefficients did not stabilize within " + std::to_string(opt.max_panels) +
                  " panels");
}

void check_rule(const QuadratureRule1D& rule) {
  for (int i = 1; i < rule.size(); ++i) {
    if (!(rule.nodes[i] - rule.nodes[i - 1] > 1e-12)) {
      throw Error(ErrorCode::EigenFailure, "quadrature nodes are not strictly increasing");
    }
  }
  for (double w : rule.weights) {
    if (!(w >= -1e-12)) throw Error(ErrorCode::EigenFailure, "negative quadrature weight");
  }
}

// Removes round-off asymmetry from rules whose recurrence has a zero diagonal.
void symmetrize(std::vector<double>& x, std::vector<double>& w) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const double xs = 0.5 * (x[j] - x[i]);
    const double ws = 0.5 * (w[i] + w[j]);
    x[i] = -xs;
    x[j] = xs;
    w[i] = ws;
    w[j] = ws;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

QuadratureRule1D symmetric_gauss_rule(int L, const std::vector<ld>& offdiag_sq, ld mu0, RuleKind kind) {
  const GaussNodesLd g = golub_welsch_ld(std::vector<ld>(L, 0.0L), offdiag_sq, mu0);
  QuadratureRule1D rule;
  rule.kind = kind;
  rule.exactness_degree = 2 * L - 1;
  rule.mu0 = static_cast<double>(mu0);
  rule.nodes.assign(g.abscissae.begin(), g.abscissae.end());
  rule.weights.assign(g.weights.begin(), g.weights.end());
  symmetrize(rule.nodes, rule.weights);
  return rule;
}

}  // namespace

const char* to_string(RuleKind kind) noexcept {
  switch (kind) {
    case RuleKind::Trig: return "trig";
    case RuleKind::Hermite: return "hermite";
    case RuleKind::Legendre: return "legendre";
  }
  return "unknown";
}

RuleKind rule_kind_from_string(const std::string& name) {
  if (name == "trig") return RuleKind::Trig;
  if (name == "hermite") return RuleKind::Hermite;
  if (name == "legendre") return RuleKind::Legendre;
  throw Error(ErrorCode::ParseError, "unknown rule kind '" + name + "'");
}

void RecurrenceCoefficients::validate() const {
  if (diag.empty()) throw Error(ErrorCode::InvalidL, "empty recurrence");
  if (offdiag_sq.size() + 1 != diag.size()) {
    throw Error(ErrorCode::DimensionMismatch, "offdiag_sq must have L-1 entries");
  }
  if (!(mu0 > 0.0)) throw Error(ErrorCode::NonPositiveMoment, "mu0 must be positive");
  for (double a : offdiag_sq) {
    if (!(a > 0.0)) throw Error(ErrorCode::NonPositiveMoment, "A_k must be positive");
  }
}

double QuadratureRule1D::weight_sum() const noexcept {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double QuadratureRule1D::apply(const std::function<double(double)>& f) const {
  double sum = 0.0;
  for (int i = 0; i < size(); ++i) sum += weights[i] * f(nodes[i]);
  return sum;
}

double TensorRule::apply(const std::function<double(std::span<const double>)>& f) const {
  double sum = 0.0;
  for (int i = 0; i < size(); ++i) sum += weights[i] * f(frequencies[i]);
  return sum;
}

void gauss_legendre_reference(int n, std::vector<ld>& x, std::vector<ld>& w) {
  x.assign(n, 0.0L);
  w.assign(n, 0.0L);
  const ld pi = std::numbers::pi_v<ld>;
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    ld z = std::cos(pi * (i + 0.75L) / (n + 0.5L));
    ld pp = 0.0L;
    for (int iter = 0; iter < 100; ++iter) {
      ld p1 = 1.0L;
      ld p2 = 0.0L;
      for (int j = 0; j < n; ++j) {
        const ld p3 = p2;
        p2 = p1;
        p1 = ((2.0L * j + 1.0L) * z * p2 - j * p3) / (j + 1);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0L);
      const ld z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= 4.0L * std::numeric_limits<ld>::epsilon()) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0L / ((1.0L - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

RecurrenceCoefficients stieltjes_coefficients(const WeightFunction& weight, int L,
                                              const StieltjesOptions& options) {
  const RecurrenceLd r = stabilized_recurrence(weight, L, options);
  RecurrenceCoefficients out;
  out.diag.assign(r.diag.begin(), r.diag.end());
  out.offdiag_sq.assign(r.offdiag_sq.begin(), r.offdiag_sq.end());
  out.mu0 = static_cast<double>(r.mu0);
  return out;
}

GaussNodes golub_welsch(const RecurrenceCoefficients& coeffs) {
  coeffs.validate();
  const GaussNodesLd g = golub_welsch_ld(
      std::vector<ld>(coeffs.diag.begin(), coeffs.diag.end()),
      std::vector<ld>(coeffs.offdiag_sq.begin(), coeffs.offdiag_sq.end()), coeffs.mu0);
  GaussNodes out;
  out.abscissae.assign(g.abscissae.begin(), g.abscissae.end());
  out.weights.assign(g.weights.begin(), g.weights.end());
  return out;
}

QuadratureRule1D trig_rule(const SpectralDensity1D& density, double gamma, int L,
                           const StieltjesOptions& options) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  const ld g = gamma;
  const WeightFunction weight = [&density, g](ld omega) { return g * density(g * omega); };
  const RecurrenceLd r = stabilized_recurrence(weight, L, options);
  const GaussNodesLd nodes = golub_welsch_ld(r.diag, r.offdiag_sq, r.mu0);

  QuadratureRule1D rule;
  rule.kind = RuleKind::Trig;
  rule.domain = {0.0, std::numbers::pi};
  rule.exactness_degree = 2 * L - 1;
  rule.mu0 = static_cast<double>(r.mu0);
  rule.gamma = gamma;
  // Ascending z maps to descending omega; fill from the back.
  rule.nodes.resize(L);
  rule.weights.resize(L);
  for (int i = 0; i < L; ++i) {
    const ld z = nodes.abscissae[i];
    if (std::fabs(z) >= 1.0L - 1e-12L) {
      throw Error(ErrorCode::AbscissaOutOfRange,
                  "cosine abscissa " + std::to_string(static_cast<double>(z)) + " outside (-1, 1)");
    }
    rule.nodes[L - 1 - i] = static_cast<double>(std::acos(std::clamp(z, -1.0L, 1.0L)));
    rule.weights[L - 1 - i] = static_cast<double>(nodes.weights[i]);
  }
  check_rule(rule);
  return rule;
}

QuadratureRule1D gauss_hermite_rule(int L) {
  if (L < 1) throw Error(ErrorCode::InvalidL, "L must be >= 1, got " + std::to_string(L));
  std::vector<ld> a(L - 1);
  for (int k = 1; k < L; ++k) a[k - 1] = k / 2.0L;
  QuadratureRule1D rule = symmetric_gauss_rule(L, a, std::sqrt(std::numbers::pi_v<ld>), RuleKind::Hermite);
  rule.domain = {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  check_rule(rule);
  return rule;
}

QuadratureRule1D gauss_legendre_rule(int L, Interval interval) {
  if (L < 1) throw Error(ErrorCode::InvalidL, "L must be >= 1, got " + std::to_string(L));
  if (!(interval.lo < interval.hi) || !std::isfinite(interval.lo) || !std::isfinite(interval.hi)) {
    throw Error(ErrorCode::InvalidInterval, "need finite a < b");
  }
  std::vector<ld> a(L - 1);
  for (int k = 1; k < L; ++k) {
    const ld kk = static_cast<ld>(k) * k;
    a[k - 1] = kk / (4.0L * kk - 1.0L);
  }
  QuadratureRule1D rule = symmetric_gauss_rule(L, a, 2.0L, RuleKind::Legendre);
  const double half = 0.5 * (interval.hi - interval.lo);
  const double mid = 0.5 * (interval.hi + interval.lo);
  for (int i = 0; i < L; ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  rule.mu0 = interval.hi - interval.lo;
  rule.domain = interval;
  check_rule(rule);
  return rule;
}

QuadratureRule1D halve_symmetric(const QuadratureRule1D& rule, bool keep_zero) {
  const int n = rule.size();
  for (int i = 0; i < n / 2; ++i) {
    const double xi = rule.nodes[i];
    const double xj = rule.nodes[n - 1 - i];
    if (std::fabs(xi + xj) > 1e-10 * std::max(1.0, std::fabs(xj))) {
      throw Error(ErrorCode::AsymmetricRule, "nodes are not symmetric about 0");
    }
  }
  if (n % 2 == 1) {
    if (std::fabs(rule.nodes[n / 2]) > 1e-10) {
      throw Error(ErrorCode::AsymmetricRule, "odd rule without a centre node at 0");
    }
    if (!keep_zero) throw Error(ErrorCode::OddRule, "odd rule has a node at 0");
  }
  QuadratureRule1D out;
  out.kind = rule.kind;
  out.exactness_degree = rule.exactness_degree;
  out.mu0 = rule.mu0;
  out.gamma = rule.gamma;
  out.domain = {0.0, rule.domain.hi};
  if (n % 2 == 1) {
    out.nodes.push_back(0.0);
    out.weights.push_back(rule.weights[n / 2]);
  }
  for (int i = (n + 1) / 2; i < n; ++i) {
    out.nodes.push_back(rule.nodes[i]);
    out.weights.push_back(rule.weights[i] + rule.weights[n - 1 - i]);
  }
  return out;
}

TensorRule tensor_product(std::span<const QuadratureRule1D> rules) {
  const int d = static_cast<int>(rules.size());
  if (d < 1) throw Error(ErrorCode::DimensionMismatch, "need at least one 1-d rule");
  const int L = rules[0].size();
  int degree = rules[0].exactness_degree;
  for (const auto& r : rules) {
    if (r.size() != L) throw Error(ErrorCode::DimensionMismatch, "1-d rules differ in size");
    for (double x : r.nodes) {
      if (std::fabs(x) <= 1e-12) throw Error(ErrorCode::NodeAtZero, "1-d node at 0 cannot be mirrored");
    }
    degree = std::min(degree, r.exactness_degree);
  }

  // Signed index s in {-L..-1, 1..L} is stored as position in [0, 2L).
  auto signed_index = [L](int pos) { return pos < L ? pos - L : pos - L + 1; };

  TensorRule out;
  out.dim = d;
  out.base_L = L;
  out.exactness_degree = degree;
  std::size_t count = static_cast<std::size_t>(L);
  for (int j = 1; j < d; ++j) count *= static_cast<std::size_t>(2 * L);
  out.frequencies.reserve(count);
  out.weights.reserve(count);

  std::vector<int> pos(d, 0);
  pos[0] = L;  // first entry restricted to positive indices
  while (true) {
    std::vector<double> freq(d);
    double weight = 2.0;
    for (int j = 0; j < d; ++j) {
      const int s = signed_index(pos[j]);
      const int k = std::abs(s) - 1;
      freq[j] = s > 0 ? rules[j].nodes[k] : -rules[j].nodes[k];
      weight *= 0.5 * rules[j].weights[k];
    }
    out.frequencies.push_back(std::move(freq));
    out.weights.push_back(weight);

    int j = d - 1;
    for (; j >= 0; --j) {
      if (++pos[j] < 2 * L) break;
      pos[j] = j == 0 ? L : 0;
    }
    if (j < 0) break;
  }
  return out;
}

}  // namespace tqff
