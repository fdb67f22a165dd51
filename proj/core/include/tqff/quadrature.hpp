#pragma once

// Quadrature rule construction: three-term recurrences, Golub-Welsch, and the
// cosine-exact rule used by trigonometric quadrature Fourier features.

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tqff {

struct RecurrenceCoefficients {
  std::vector<double> diag;       // B_0 .. B_{L-1}
  std::vector<double> offdiag_sq; // A_1 .. A_{L-1}
  double mu0 = 0.0;

  int size() const noexcept { return static_cast<int>(diag.size()); }
  void validate() const;
};

enum class RuleKind { Trig, Hermite, Legendre };

const char* to_string(RuleKind kind) noexcept;
RuleKind rule_kind_from_string(const std::string& name);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct QuadratureRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  RuleKind kind = RuleKind::Legendre;
  Interval domain;
  int exactness_degree = 0;
  double mu0 = 0.0;
  /// Truncation parameter of trig rules; 0 for polynomial rules.
  double gamma = 0.0;

  int size() const noexcept { return static_cast<int>(nodes.size()); }
  double weight_sum() const noexcept;
  /// Sum of weight_l * f(node_l).
  double apply(const std::function<double(double)>& f) const;
};

/// Half-space tensor rule. Stored weights already carry the factor 2 of the
/// mirrored construction, so Q(f) = sum_i weights[i] * f(frequencies[i]) for even f.
struct TensorRule {
  std::vector<std::vector<double>> frequencies;
  std::vector<double> weights;
  int dim = 0;
  int base_L = 0;
  int exactness_degree = 0;

  int size() const noexcept { return static_cast<int>(weights.size()); }
  double apply(const std::function<double(std::span<const double>)>& f) const;
};

/// Nonnegative even weight evaluated pointwise on [0, pi].
using WeightFunction = std::function<long double(long double)>;

struct StieltjesOptions {
  int initial_panels = 64;
  int points_per_panel = 32;
  int max_panels = 4096;
  double stabilization_tol = 1e-13;
};

/// Recurrence coefficients of the monic polynomials in z = cos(w) orthogonal under
/// <f, g> = int_{-pi}^{pi} f(w) g(w) weight(w) dw, via the discretized Stieltjes procedure.
RecurrenceCoefficients stieltjes_coefficients(const WeightFunction& weight, int L,
                                              const StieltjesOptions& options = {});

struct GaussNodes {
  std::vector<double> abscissae;  // ascending
  std::vector<double> weights;
};

/// Eigen-decomposition of the Jacobi matrix by implicit-shift QL, keeping only the
/// first component of each eigenvector.
GaussNodes golub_welsch(const RecurrenceCoefficients& coeffs);

/// Standardized 1-d spectral density used to build trig rules; must be even.
using SpectralDensity1D = std::function<long double(long double)>;

/// L-node rule with trigonometric exactness 2L-1 for the weight gamma * p(gamma * w) on [-pi, pi].
QuadratureRule1D trig_rule(const SpectralDensity1D& density, double gamma, int L,
                           const StieltjesOptions& options = {});

/// Gauss-Hermite rule for exp(-w^2) on the real line.
QuadratureRule1D gauss_hermite_rule(int L);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule1D gauss_legendre_rule(int L, Interval interval = {-1.0, 1.0});

/// Keeps the positive nodes of a symmetric rule with doubled weights. With keep_zero,
/// an odd rule keeps its centre node with its weight unchanged; otherwise it is rejected.
QuadratureRule1D halve_symmetric(const QuadratureRule1D& rule, bool keep_zero = false);

/// Mirrors each 1-d rule to signed nodes and enumerates the half-space of multi-indices
/// whose first entry is positive.
TensorRule tensor_product(std::span<const QuadratureRule1D> rules);

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration in long double.
void gauss_legendre_reference(int n, std::vector<long double>& x, std::vector<long double>& w);

}  // namespace tqff
