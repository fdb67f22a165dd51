#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tqff/feature_map.hpp"
#include "tqff/spectral.hpp"

namespace tqff {

struct Normalization {
  double y_mean = 0.0;
  double y_sd = 1.0;
  std::vector<double> x_mean;  // empty when inputs are not normalized
  std::vector<double> x_sd;
};

struct Dataset {
  Eigen::MatrixXd X;  // n x d
  Eigen::VectorXd y;
  Normalization normalization;

  Eigen::Index n() const noexcept { return X.rows(); }
  int dim() const noexcept { return static_cast<int>(X.cols()); }
  void validate() const;
};

/// z-scores y (and X when requested); constants are stored on the result.
Dataset normalize(const Dataset& raw, bool normalize_inputs = false);

/// Applies stored input normalization to new inputs (no-op when there is none).
Eigen::MatrixXd normalize_inputs(const Normalization& norm, const Eigen::MatrixXd& X);

struct PredictiveDistribution {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;         // observation level, includes noise
  Eigen::VectorXd latent_variances;  // excludes noise

  Eigen::Index size() const noexcept { return means.size(); }
};

/// Maps predictions made in normalized units back to the raw output scale.
PredictiveDistribution denormalize(const PredictiveDistribution& pred, const Normalization& norm);

/// Gradient with respect to (log theta_1..d, log scale, log noise).
struct LoglikGradient {
  double value = 0.0;
  Eigen::VectorXd grad;
};

struct FullGpOptions {
  Eigen::Index cap = 6000;
};

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

double full_gp_loglik(const KernelSpec& spec, const Dataset& data, const FullGpOptions& options = {});
LoglikGradient full_gp_loglik_grad(const KernelSpec& spec, const Dataset& data,
                                   const FullGpOptions& options = {});
PredictiveDistribution full_gp_predict(const KernelSpec& spec, const Dataset& data, const Eigen::MatrixXd& Xtest,
                                       const FullGpOptions& options = {});

/// log N(y; 0, Lambda^T Lambda + noise I) through the 2S x 2S system only.
double ff_loglik(const FeatureMap& map, const Hyperparams& hyper, const Dataset& data);
LoglikGradient ff_loglik_grad(const FeatureMap& map, const Hyperparams& hyper, const Dataset& data);

struct OptConfig {
  double lr = 0.01;
  int iters = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  /// Defaults to theta_j = 0.5 * range_j(X), scale = var(y), noise = 0.1 * var(y).
  std::optional<Hyperparams> init;
};

Hyperparams default_init(const Dataset& data);

/// Cached solve of A = Lambda Lambda^T + noise I.
struct FfCache {
  Eigen::MatrixXd chol_lower;     // 2S x 2S lower Cholesky factor of A
  Eigen::VectorXd mean_weights;   // A^{-1} Lambda y
};

struct GPModel {
  FeatureMap map;  // carries the fitted hyperparameters in map.spec.hyper
  OptConfig opt;
  Normalization normalization;
  std::shared_ptr<const Dataset> train;
  FfCache cache;
  std::vector<double> loss_history;  // negative log-likelihood per iteration, plus final

  const Hyperparams& hyper() const noexcept { return map.spec.hyper; }
};

/// Builds the cache for fixed hyperparameters; X may have zero rows (prior only).
FfCache ff_cache(const FeatureMap& map, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

GPModel ff_model(const FeatureMap& map, std::shared_ptr<const Dataset> data, const OptConfig& opt = {});

/// Adam on the negative log marginal likelihood in log-parameter space.
GPModel ff_fit(const FeatureMap& map, std::shared_ptr<const Dataset> data, const OptConfig& opt);

/// Adam on the exact GP log-likelihood; returns the final hyperparameters.
Hyperparams full_gp_fit(const KernelSpec& spec, const Dataset& data, const OptConfig& opt,
                        const FullGpOptions& options = {});

PredictiveDistribution ff_predict(const GPModel& model, const Eigen::MatrixXd& Xtest);
PredictiveDistribution ff_predict(const FeatureMap& map, const FfCache& cache, const Eigen::MatrixXd& Xtest);

struct Metrics {
  double rmse = 0.0;
  double nll = 0.0;
};

Metrics metrics(const PredictiveDistribution& pred, const Eigen::VectorXd& ytrue);

/// Per-point KL(p_i || q_i) between univariate Gaussians (observation-level variances).
Eigen::VectorXd kl_gaussian(const PredictiveDistribution& p, const PredictiveDistribution& q);

}  // namespace tqff
