#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "tqff/gp.hpp"

namespace tqff {

/// exp(-x^2) * exp(sin^2(10 (x - 0.5))) + 3x
double toy_function(double x);

/// Schaffer function N.2, https://www.sfu.ca/~ssurjano/schaffer2.html
///   f(x, y) = 0.5 + (sin^2(x^2 - y^2) - 0.5) / (1 + 0.001 (x^2 + y^2))^2
double schaffer2(double x, double y);

inline constexpr double kToyNoiseSd = 0.1;

/// x ~ U(0,1), y = toy_function(x) + N(0, 0.1^2), returned z-scored in y.
Dataset gen_toy(Eigen::Index n, std::uint64_t seed);

/// m inputs drawn from U(-1, 1), sorted ascending.
Eigen::MatrixXd gen_toy_test_inputs(Eigen::Index m, std::uint64_t seed);

/// Uniform random inputs on [-3, 3]^2, noiseless outputs.
Dataset gen_schaffer(Eigen::Index n, std::uint64_t seed);

struct Gp2dOptions {
  double scale = 1.0;
  double noise = 0.01;
  int dim = 2;
  Eigen::Index cap = 6000;
};

/// X ~ U([0,1]^d), y ~ N(0, K_XX + noise I) with an isotropic SE kernel.
Dataset gen_gp2d(Eigen::Index n, double theta, std::uint64_t seed, const Gp2dOptions& options = {});

struct CsvSchema {
  bool header = true;
  bool normalize = true;  // z-score y with stored constants
};

/// d feature columns followed by one target column.
Dataset ingest_csv(const std::string& path, const CsvSchema& schema = {});

/// Writes x1..xd,y with a header; values in raw (denormalized) units.
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Seeded shuffle; train gets round(fraction * n) rows. Both parts carry the
/// normalization fitted on the raw training targets.
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed);

/// Raw-unit targets of a dataset.
Eigen::VectorXd raw_targets(const Dataset& data);

}  // namespace tqff
