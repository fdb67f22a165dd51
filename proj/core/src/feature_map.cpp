#include "tqff/feature_map.hpp"

#include <cmath>
#include <numbers>

#include "tqff/error.hpp"
#include "tqff/quadrature.hpp"

namespace tqff {
namespace {

FeatureMap from_tensor(FeatureMethod method, const KernelSpec& spec, int size, const TensorRule& rule,
                       double arg_scale) {
  FeatureMap map;
  map.method = method;
  map.spec = spec;
  map.size = size;
  map.arg_scale = arg_scale;
  const int S = rule.size();
  map.frequencies.resize(S, rule.dim);
  map.sqrt_weights.resize(S);
  for (int s = 0; s < S; ++s) {
    for (int j = 0; j < rule.dim; ++j) map.frequencies(s, j) = rule.frequencies[s][j];
    map.sqrt_weights(s) = std::sqrt(std::max(0.0, rule.weights[s]));
  }
  return map;
}

TensorRule replicate(const QuadratureRule1D& rule, int d) {
  const std::vector<QuadratureRule1D> rules(d, rule);
  return tensor_product(rules);
}

int int_pow(int base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) {
    r *= base;
    if (r > (1LL << 31)) throw Error(ErrorCode::InvalidArgument, "feature count overflows");
  }
  return static_cast<int>(r);
}

}  // namespace

const char* to_string(FeatureMethod method) noexcept {
  switch (method) {
    case FeatureMethod::TQFF: return "tqff";
    case FeatureMethod::GLFF: return "glff";
    case FeatureMethod::GHFF: return "ghff";
    case FeatureMethod::RFF: return "rff";
  }
  return "unknown";
}

FeatureMethod feature_method_from_string(const std::string& name) {
  if (name == "tqff") return FeatureMethod::TQFF;
  if (name == "glff") return FeatureMethod::GLFF;
  if (name == "ghff") return FeatureMethod::GHFF;
  if (name == "rff") return FeatureMethod::RFF;
  throw Error(ErrorCode::InvalidArgument, "unknown feature method '" + name + "'");
}

FeatureMap FeatureMap::with_hyper(const Hyperparams& hyper) const {
  if (hyper.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "hyperparameter dimension");
  FeatureMap out = *this;
  out.spec.hyper = hyper;
  return out;
}

Eigen::MatrixXd FeatureMap::scaled_frequencies() const {
  Eigen::MatrixXd f = frequencies;
  for (int j = 0; j < dim(); ++j) f.col(j) *= arg_scale / spec.hyper.lengthscales[j];
  return f;
}

Eigen::VectorXd FeatureMap::amplitudes() const { return std::sqrt(spec.hyper.scale) * sqrt_weights; }

int frequency_count(FeatureMethod method, int size, int dim) {
  if (method == FeatureMethod::RFF) return size;
  return int_pow(2 * size, dim) / 2;
}

int size_for_frequency_count(FeatureMethod method, int S, int dim) {
  if (S < 1) throw Error(ErrorCode::InvalidArgument, "feature count must be positive");
  if (method == FeatureMethod::RFF) return S;
  const int L = static_cast<int>(std::lround(0.5 * std::pow(2.0 * S, 1.0 / dim)));
  if (L < 1 || frequency_count(method, L, dim) != S) {
    throw Error(ErrorCode::InvalidArgument, std::to_string(S) + " frequencies is not of the form (2L)^" +
                                                std::to_string(dim) + "/2");
  }
  return L;
}

FeatureMap build_feature_map(FeatureMethod method, const KernelSpec& spec, int size,
                             std::optional<std::uint64_t> seed) {
  spec.validate();
  if (size < 1) {
    throw Error(method == FeatureMethod::RFF ? ErrorCode::InvalidArgument : ErrorCode::InvalidL,
                "feature map size must be >= 1");
  }
  const SpectralDecomposition sd = standardized_density(spec);
  const int d = spec.dim();

  switch (method) {
    case FeatureMethod::TQFF: {
      const auto density = sd.density;
      const QuadratureRule1D rule =
          trig_rule([density](long double w) { return density->pdf(w); }, spec.gamma, size);
      return from_tensor(method, spec, size, replicate(rule, d), spec.gamma);
    }
    case FeatureMethod::GLFF: {
      const double half_width = spec.gamma * std::numbers::pi;
      QuadratureRule1D rule = gauss_legendre_rule(2 * size, {-half_width, half_width});
      for (int i = 0; i < rule.size(); ++i) {
        rule.weights[i] *= static_cast<double>(sd.density->pdf(rule.nodes[i]));
      }
      return from_tensor(method, spec, size, replicate(halve_symmetric(rule), d), 1.0);
    }
    case FeatureMethod::GHFF: {
      if (spec.family != KernelFamily::SE) {
        throw Error(ErrorCode::UnsupportedFamily, "Gauss-Hermite features need the SE kernel");
      }
      QuadratureRule1D rule = gauss_hermite_rule(2 * size);
      // exp(-w^2) weight -> standard normal: w = sqrt(2) x, weight / sqrt(pi).
      for (int i = 0; i < rule.size(); ++i) {
        rule.nodes[i] *= std::numbers::sqrt2;
        rule.weights[i] /= std::sqrt(std::numbers::pi);
      }
      rule.mu0 = 1.0;
      return from_tensor(method, spec, size, replicate(halve_symmetric(rule), d), 1.0);
    }
    case FeatureMethod::RFF: {
      if (!seed) throw Error(ErrorCode::SeedRequired, "random Fourier features need a seed");
      FeatureMap map;
      map.method = method;
      map.spec = spec;
      map.size = size;
      map.seed = seed;
      map.arg_scale = 1.0;
      map.frequencies.resize(size, d);
      CounterRng rng(*seed, 0x7266665f66726571ULL);
      for (int s = 0; s < size; ++s) {
        for (int j = 0; j < d; ++j) map.frequencies(s, j) = sd.density->sample(rng);
      }
      map.sqrt_weights = Eigen::VectorXd::Constant(size, std::sqrt(1.0 / size));
      return map;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown feature method");
}

Eigen::VectorXd feature_vector(const FeatureMap& map, std::span<const double> x) {
  if (static_cast<int>(x.size()) != map.dim()) throw Error(ErrorCode::DimensionMismatch, "input dimension");
  const int S = map.num_frequencies();
  const Eigen::MatrixXd f = map.scaled_frequencies();
  const Eigen::VectorXd amp = map.amplitudes();
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd arg = f * xv;
  Eigen::VectorXd phi(2 * S);
  for (int s = 0; s < S; ++s) {
    phi(s) = amp(s) * std::cos(arg(s));
    phi(S + s) = amp(s) * std::sin(arg(s));
  }
  return phi;
}

Eigen::MatrixXd design_matrix(const FeatureMap& map, const Eigen::MatrixXd& X) {
  if (X.cols() != map.dim()) throw Error(ErrorCode::DimensionMismatch, "input dimension");
  const int S = map.num_frequencies();
  const Eigen::Index n = X.rows();
  const Eigen::MatrixXd arg = map.scaled_frequencies() * X.transpose();  // S x n
  const Eigen::VectorXd amp = map.amplitudes();
  Eigen::MatrixXd lambda(2 * S, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int s = 0; s < S; ++s) {
      lambda(s, i) = amp(s) * std::cos(arg(s, i));
      lambda(S + s, i) = amp(s) * std::sin(arg(s, i));
    }
  }
  return lambda;
}

double approx_kernel(const FeatureMap& map, std::span<const double> tau) {
  const std::vector<double> zero(map.dim(), 0.0);
  return feature_vector(map, zero).dot(feature_vector(map, tau));
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

std::vector<SweepCell> approx_error_sweep(const SweepConfig& config) {
  if (config.methods.empty() || config.feature_counts.empty() || config.taus.empty()) {
    throw Error(ErrorCode::InvalidArgument, "sweep grids must be nonempty");
  }
  const int d = config.spec.dim();
  const std::size_t T = config.taus.size();
  std::vector<double> exact(T);
  std::vector<std::vector<double>> offsets(T, std::vector<double>(d));
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(offsets[t].begin(), offsets[t].end(), config.taus[t]);
    exact[t] = kernel_eval(config.spec, offsets[t]);
  }

  std::vector<SweepCell> cells;
  for (FeatureMethod method : config.methods) {
    for (int S : config.feature_counts) {
      const int size = size_for_frequency_count(method, S, d);
      SweepCell cell{method, S, std::vector<double>(T, 0.0)};
      std::vector<std::optional<std::uint64_t>> seeds;
      if (method == FeatureMethod::RFF) {
        if (config.seeds.empty()) throw Error(ErrorCode::SeedRequired, "RFF sweep needs seeds");
        for (auto s : config.seeds) seeds.emplace_back(s);
      } else {
        seeds.emplace_back(std::nullopt);
      }
      for (const auto& seed : seeds) {
        const FeatureMap map = build_feature_map(method, config.spec, size, seed);
        for (std::size_t t = 0; t < T; ++t) {
          cell.abs_errors[t] += std::fabs(exact[t] - approx_kernel(map, offsets[t])) / seeds.size();
        }
      }
      double sum = 0.0;
      for (double e : cell.abs_errors) {
        sum += e;
        cell.max_error = std::max(cell.max_error, e);
      }
      cell.mean_error = sum / T;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace tqff
