#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tqff/spectral.hpp"

namespace tqff {

enum class FeatureMethod { TQFF, GLFF, GHFF, RFF };

const char* to_string(FeatureMethod method) noexcept;
FeatureMethod feature_method_from_string(const std::string& name);

/// Fourier feature map Phi(x) in R^{2S}: cosine block followed by sine block.
///
/// Frequencies and weights are stored in standardized units and never depend on the
/// lengthscales or scale; those enter only at evaluation, through `spec`:
///   arg_s(x)  = sum_j frequencies(s, j) * arg_scale * x_j / theta_j
///   amp_s     = sqrt(g) * sqrt_weights(s)
/// arg_scale is gamma for TQFF (its rule lives on [-pi, pi]) and 1 otherwise.
struct FeatureMap {
  FeatureMethod method = FeatureMethod::TQFF;
  Eigen::MatrixXd frequencies;   // S x d
  Eigen::VectorXd sqrt_weights;  // S
  double arg_scale = 1.0;
  KernelSpec spec;
  std::optional<std::uint64_t> seed;
  /// Per-dimension node count L for quadrature maps, S for RFF.
  int size = 0;

  int num_frequencies() const noexcept { return static_cast<int>(frequencies.rows()); }
  int feature_dim() const noexcept { return 2 * num_frequencies(); }
  int dim() const noexcept { return static_cast<int>(frequencies.cols()); }
  double weight_sum() const noexcept { return sqrt_weights.squaredNorm(); }

  /// Same frequencies and weights evaluated under other hyperparameters.
  FeatureMap with_hyper(const Hyperparams& hyper) const;

  /// S x d matrix of frequencies(s, j) * arg_scale / theta_j.
  Eigen::MatrixXd scaled_frequencies() const;
  Eigen::VectorXd amplitudes() const;
};

/// Number of frequencies a map of the given method, size and dimension produces.
int frequency_count(FeatureMethod method, int size, int dim);

/// Inverse of frequency_count; throws InvalidArgument when S is not attainable.
int size_for_frequency_count(FeatureMethod method, int S, int dim);

FeatureMap build_feature_map(FeatureMethod method, const KernelSpec& spec, int size,
                             std::optional<std::uint64_t> seed = std::nullopt);

Eigen::VectorXd feature_vector(const FeatureMap& map, std::span<const double> x);

/// 2S x n matrix whose i-th column is feature_vector(map, X.row(i)).
Eigen::MatrixXd design_matrix(const FeatureMap& map, const Eigen::MatrixXd& X);

/// Phi(0)^T Phi(tau).
double approx_kernel(const FeatureMap& map, std::span<const double> tau);

struct SweepConfig {
  std::vector<FeatureMethod> methods;
  KernelSpec spec;
  std::vector<int> feature_counts;
  /// Scalar offsets; in d > 1 the offset vector is tau * (1, ..., 1).
  std::vector<double> taus;
  std::vector<std::uint64_t> seeds;  // RFF only
};

struct SweepCell {
  FeatureMethod method;
  int S = 0;
  std::vector<double> abs_errors;  // one per tau; RFF averaged over seeds
  double mean_error = 0.0;
  double max_error = 0.0;
};

std::vector<SweepCell> approx_error_sweep(const SweepConfig& config);

/// n evenly spaced points on [lo, hi] inclusive.
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace tqff
