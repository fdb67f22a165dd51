#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tqff/feature_map.hpp"
#include "tqff/gp.hpp"
#include "tqff/report.hpp"

namespace tqff {

enum class ExperimentKind { ToyExample, KernelSweep, GammaSweep, Synthetic2D, HoldoutUncertainty, Benchmark };

const char* to_string(ExperimentKind kind) noexcept;
ExperimentKind experiment_kind_from_string(const std::string& name);

struct DataSource {
  std::string source = "toy";  // toy | schaffer | gp2d | csv
  std::string path;            // csv only
  Eigen::Index n = 2000;       // training points (total points for csv-free benchmark sources)
  Eigen::Index n_test = 1000;
  double theta = 0.05;         // gp2d lengthscale
  double noise = 0.01;         // gp2d noise variance
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::KernelSweep;
  std::vector<FeatureMethod> methods{FeatureMethod::TQFF, FeatureMethod::GLFF, FeatureMethod::GHFF,
                                     FeatureMethod::RFF};
  std::vector<int> sizes{10, 20, 30, 40, 50, 60, 80, 100, 120, 150, 200};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  /// Kernel sweeps run once per value; fitting suites use them as initial lengthscales
  /// (one optimizer start each, best training likelihood kept).
  std::vector<double> lengthscales{0.05, 0.025, 0.01};
  double gamma = 1.15;
  std::vector<double> gammas{0.5, 0.8, 1.0, 1.15, 1.5};
  double scale = 1.0;
  int tau_grid_n = 100;
  std::vector<double> thresholds{1e-4, 1e-6};
  DataSource data;
  OptConfig opt;
  /// Feature counts for suites that compare one size per method.
  std::map<FeatureMethod, int> method_sizes{
      {FeatureMethod::TQFF, 70}, {FeatureMethod::GLFF, 70}, {FeatureMethod::GHFF, 30}, {FeatureMethod::RFF, 300}};
  int full_gp_iters = 100;
  /// Adam learning rate for the exact-GP refinement of shared hyperparameters.
  double full_gp_lr = 0.05;
  double split_fraction = 0.8;
  int segments = 5;
  double holdout_fraction = 0.2;
  bool plots = false;
  std::string output_dir = "report";

  void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string to_json(const ExperimentConfig& config);
/// Hash of the canonical config JSON with output_dir removed.
std::string config_hash(const ExperimentConfig& config);

/// Runs the suite; errors are captured in the bundle (failed/failure) with partial tables kept.
ReportBundle run_experiment(const ExperimentConfig& config);

// Typed suite results, shared by the report builder and the tests.

struct KernelSweepResult {
  double theta = 0.0;
  std::vector<SweepCell> cells;
  std::vector<double> taus;
};
std::vector<KernelSweepResult> run_kernel_sweep(const ExperimentConfig& config);

/// Smallest S whose mean error is <= threshold for the method, or -1.
int first_crossing(const std::vector<SweepCell>& cells, FeatureMethod method, double threshold);

struct GammaSweepRow {
  double gamma = 0.0;
  int L = 0;
  double mean_error = 0.0;
  double max_error = 0.0;
  double tail = 0.0;
};
std::vector<GammaSweepRow> run_gamma_sweep(const ExperimentConfig& config);

struct MethodPrediction {
  FeatureMethod method;
  int S = 0;
  PredictiveDistribution pred;
};

struct ToyResult {
  Dataset train;
  Eigen::MatrixXd test_x;
  Hyperparams hyper;
  PredictiveDistribution full;
  std::vector<MethodPrediction> approx;
};
ToyResult run_toy_example(const ExperimentConfig& config);

/// TQFF warm start followed by exact-GP Adam steps.
Hyperparams fit_shared_hyperparameters(const Dataset& train, const ExperimentConfig& config);

struct FitRow {
  std::uint64_t seed = 0;
  FeatureMethod method;
  int S = 0;
  double rmse = 0.0;
  double nll = 0.0;
  double train_loglik = 0.0;
  Hyperparams hyper;
};
std::vector<FitRow> run_synthetic2d(const ExperimentConfig& config);
std::vector<FitRow> run_benchmark(const ExperimentConfig& config);

struct HoldoutRow {
  std::uint64_t seed = 0;
  FeatureMethod method;
  int S = 0;
  Eigen::VectorXd x;   // held-out inputs (first coordinate)
  Eigen::VectorXd kl;  // KL(full || approx) per held-out point
};
std::vector<HoldoutRow> run_holdout_uncertainty(const ExperimentConfig& config);

/// Splits a series (sorted by its first input) by removing `segments` contiguous blocks
/// covering about `fraction` of the points; returns (kept, removed).
std::pair<Dataset, Dataset> remove_segments(const Dataset& series, int segments, double fraction,
                                            std::uint64_t seed);

/// Fits one feature model per initial lengthscale and keeps the best training likelihood.
GPModel fit_multistart(FeatureMethod method, int S, std::shared_ptr<const Dataset> train,
                       const ExperimentConfig& config, std::uint64_t seed);

}  // namespace tqff
