#pragma once

// Reference integration used to certify the quadrature paths. Nothing here calls into
// the recurrence or Golub-Welsch code.

#include <functional>
#include <span>
#include <vector>

#include "tqff/feature_map.hpp"
#include "tqff/quadrature.hpp"
#include "tqff/spectral.hpp"

namespace tqff {

struct IntegralResult {
  long double value = 0.0L;
  long double abs_error_estimate = 0.0L;
  long evaluations = 0;
};

struct IntegrationOptions {
  /// Largest angular frequency of the integrand; bounds the initial panel width by pi / (4 * hint).
  double frequency_hint = 0.0;
  int max_subdivisions = 200000;
};

/// Adaptive 7/15-point Gauss-Kronrod with global error control.
IntegralResult integrate_adaptive(const std::function<long double(long double)>& f, long double a,
                                  long double b, long double tol, const IntegrationOptions& options = {});

/// int_{-pi}^{pi} gamma p(gamma w) cos(k w) dw for real k.
long double trig_moment(const StandardizedDensity& density, double gamma, double k,
                        long double tol = 1e-14L);

/// g * prod_j int_{-pi}^{pi} gamma p(gamma w) cos(w gamma tau_j / theta_j) dw.
double truncated_fourier(const KernelSpec& spec, std::span<const double> tau);

struct CertificateRow {
  std::vector<int> k;
  double quad = 0.0;
  double oracle = 0.0;
  double abs_err = 0.0;
  bool pass = false;
};

struct Certificate {
  std::vector<CertificateRow> rows;
  int claimed_degree = 0;
  bool passed = false;
  /// Smallest ||k||_inf whose row fails, or -1.
  int first_failure = -1;
};

inline constexpr double kExactnessTol = 1e-9;

/// Rows for k = 0..max_degree; passes when every row with k <= rule.exactness_degree passes.
Certificate exactness_certificate(const QuadratureRule1D& rule, const StandardizedDensity& density,
                                  int max_degree);

/// Rows for every k in {0..max_degree}^d.
Certificate exactness_certificate(const TensorRule& rule, const StandardizedDensity& density, double gamma,
                                  int max_degree);

/// Treats a feature map as a rule for the truncated integral: row k compares
/// Phi(0)^T Phi(tau_k) / g with the oracle at tau_k = k theta / gamma. The claimed degree
/// is 2L-1 for TQFF and max_degree for the other methods.
Certificate exactness_certificate(const FeatureMap& map, int max_degree);

}  // namespace tqff
