#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tqff/rng.hpp"

namespace tqff {

struct Hyperparams {
  std::vector<double> lengthscales;
  double scale = 1.0;
  double noise = 0.01;

  int dim() const noexcept { return static_cast<int>(lengthscales.size()); }
  void validate() const;
};

enum class KernelFamily { SE };

const char* to_string(KernelFamily family) noexcept;
KernelFamily kernel_family_from_string(const std::string& name);

struct KernelSpec {
  KernelFamily family = KernelFamily::SE;
  Hyperparams hyper;
  double gamma = 1.15;

  int dim() const noexcept { return hyper.dim(); }
  void validate() const;
};

/// Hyperparameter-free density p^{(j)} in a single standardized frequency.
class StandardizedDensity {
 public:
  virtual ~StandardizedDensity() = default;
  virtual long double pdf(long double omega) const = 0;
  /// Integral of pdf over [c, inf) for c >= 0.
  virtual long double upper_tail(long double c) const = 0;
  virtual double sample(CounterRng& rng) const = 0;
  virtual std::string name() const = 0;
};

class StandardNormalDensity final : public StandardizedDensity {
 public:
  long double pdf(long double omega) const override;
  long double upper_tail(long double c) const override;
  double sample(CounterRng& rng) const override { return rng.normal(); }
  std::string name() const override { return "standard_normal"; }
};

/// Decomposition k(tau) = g * int p(w) exp(i w^T D tau) dw with D diagonal.
struct SpectralDecomposition {
  std::shared_ptr<const StandardizedDensity> density;  // same density in every dimension
  double g = 1.0;
  std::vector<double> d_diag;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> tau);

SpectralDecomposition standardized_density(const KernelSpec& spec);

/// C_d = g * d * 2^{d-1}.
double bound_constant(const KernelSpec& spec);

/// 2 C_d int_pi^inf p_gamma(gamma w) dw.
double truncation_tail(const KernelSpec& spec);

/// ceil(gamma / min_j theta_j).
int bound_order(const KernelSpec& spec);

/// Uniform error bound of an L-node trig feature map on [0,1]^d; +inf on overflow.
double theorem3_bound(const KernelSpec& spec, int L);

}  // namespace tqff
