#include "tqff/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tqff/error.hpp"

namespace tqff {

void Hyperparams::validate() const {
  if (lengthscales.empty()) throw Error(ErrorCode::DimensionMismatch, "need at least one lengthscale");
  for (double t : lengthscales) {
    if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "lengthscales must be positive");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  if (!(noise > 0.0) || !std::isfinite(noise)) throw Error(ErrorCode::InvalidArgument, "noise must be positive");
}

const char* to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::SE: return "se";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "se") return KernelFamily::SE;
  throw Error(ErrorCode::UnsupportedFamily, "kernel family '" + name + "'");
}

void KernelSpec::validate() const {
  hyper.validate();
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
}

long double StandardNormalDensity::pdf(long double omega) const {
  return std::exp(-0.5L * omega * omega) / std::sqrt(2.0L * std::numbers::pi_v<long double>);
}

long double StandardNormalDensity::upper_tail(long double c) const {
  return 0.5L * std::erfc(c / std::numbers::sqrt2_v<long double>);
}

double kernel_eval(const KernelSpec& spec, std::span<const double> tau) {
  if (static_cast<int>(tau.size()) != spec.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "tau has wrong dimension");
  }
  double q = 0.0;
  for (int j = 0; j < spec.dim(); ++j) {
    const double r = tau[j] / spec.hyper.lengthscales[j];
    q += r * r;
  }
  return spec.hyper.scale * std::exp(-0.5 * q);
}

SpectralDecomposition standardized_density(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::SE: {
      SpectralDecomposition out;
      out.density = std::make_shared<StandardNormalDensity>();
      out.g = spec.hyper.scale;
      out.d_diag.reserve(spec.dim());
      for (double t : spec.hyper.lengthscales) out.d_diag.push_back(1.0 / t);
      return out;
    }
  }
  throw Error(ErrorCode::UnsupportedFamily, "no standardized density");
}

double bound_constant(const KernelSpec& spec) {
  const int d = spec.dim();
  return spec.hyper.scale * d * std::ldexp(1.0, d - 1);
}

double truncation_tail(const KernelSpec& spec) {
  const SpectralDecomposition sd = standardized_density(spec);
  // int_pi^inf gamma p(gamma w) dw = int_{gamma pi}^inf p(u) du
  const long double tail = sd.density->upper_tail(static_cast<long double>(spec.gamma) * std::numbers::pi_v<long double>);
  return static_cast<double>(2.0L * bound_constant(spec) * tail);
}

int bound_order(const KernelSpec& spec) {
  const double min_theta = *std::min_element(spec.hyper.lengthscales.begin(), spec.hyper.lengthscales.end());
  return static_cast<int>(std::ceil(spec.gamma / min_theta));
}

double theorem3_bound(const KernelSpec& spec, int L) {
  if (L < 1) throw Error(ErrorCode::InvalidL, "L must be >= 1");
  spec.validate();
  const int M = bound_order(spec);
  const int H = std::max(M, 2 * L - 1);
  const int r = std::max(1, 2 * L - M);
  const double lead = std::numbers::pi + 4.0 + 2.0 * std::log((2.0 / std::numbers::pi) * (4.0 * L - 1.0));
  // log( H! / (2 (2L)^r (M-1)!) )
  const double log_ratio = std::lgamma(H + 1.0) - std::lgamma(static_cast<double>(M)) -
                           r * std::log(2.0 * L) - std::log(2.0);
  const double log_term = std::log(bound_constant(spec)) + std::log(lead) + log_ratio;
  if (log_term > std::log(std::numeric_limits<double>::max())) {
    return std::numeric_limits<double>::infinity();
  }
  return truncation_tail(spec) + std::exp(log_term);
}

}  // namespace tqff
