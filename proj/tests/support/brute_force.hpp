#pragma once

// Slow reference paths for tests. None of these call the solvers under test.

#include <vector>

#include <Eigen/Dense>

#include "tqff/feature_map.hpp"
#include "tqff/gp.hpp"
#include "tqff/spectral.hpp"

namespace tqff::ref {

/// log N(y; 0, C) via an explicit inverse and an LU determinant.
double naive_loglik(const Eigen::MatrixXd& C, const Eigen::VectorXd& y);

/// Conditional Gaussian with explicit inverse: K_xx (n x n, no noise), K_sx (m x n), k_ss diagonal (m).
PredictiveDistribution naive_predict(const Eigen::MatrixXd& Kxx, const Eigen::MatrixXd& Ksx,
                                     const Eigen::VectorXd& kss, const Eigen::VectorXd& y, double noise);

/// Elementwise Phi(x_i)^T Phi(x_k) built one pair at a time from feature_vector.
Eigen::MatrixXd approx_gram(const FeatureMap& map, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Elementwise kernel_eval over all pairs.
Eigen::MatrixXd exact_gram(const KernelSpec& spec, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

struct MomentRecurrence {
  std::vector<long double> diag;
  std::vector<long double> offdiag_sq;
  long double mu0 = 0.0L;
};

/// Recurrence coefficients from oracle moments m_k = int cos^k(w) gamma p(gamma w) dw on
/// [-pi, pi], orthogonalizing monomials in z = cos w with coefficient-vector arithmetic.
MomentRecurrence moment_recurrence(const StandardizedDensity& density, double gamma, int L);

/// Central finite difference of ff_loglik in log-parameter space.
Eigen::VectorXd fd_gradient_ff(const FeatureMap& map, const Hyperparams& h, const Dataset& data, double step);
Eigen::VectorXd fd_gradient_full(const KernelSpec& spec, const Dataset& data, double step);

/// Uniform random inputs on [lo, hi]^d from a fixed seed.
Eigen::MatrixXd random_inputs(Eigen::Index n, int d, double lo, double hi, std::uint64_t seed);

/// Max |k(tau) - Phi(0)^T Phi(tau)| over tau = linspace(0, 1, n) (diagonal in d > 1).
double max_kernel_error(const FeatureMap& map, int n_tau = 100);

}  // namespace tqff::ref
