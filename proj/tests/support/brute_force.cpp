#include "brute_force.hpp"

#include <cmath>
#include <numbers>

#include "tqff/oracle.hpp"
#include "tqff/rng.hpp"

namespace tqff::ref {

double naive_loglik(const Eigen::MatrixXd& C, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd Cinv = C.inverse();
  const double det = C.fullPivLu().determinant();
  const double n = static_cast<double>(y.size());
  return -0.5 * (y.dot(Cinv * y) + std::log(det) + n * std::log(2.0 * std::numbers::pi));
}

PredictiveDistribution naive_predict(const Eigen::MatrixXd& Kxx, const Eigen::MatrixXd& Ksx,
                                     const Eigen::VectorXd& kss, const Eigen::VectorXd& y, double noise) {
  Eigen::MatrixXd C = Kxx;
  C.diagonal().array() += noise;
  const Eigen::MatrixXd Cinv = C.inverse();
  PredictiveDistribution p;
  p.means = Ksx * Cinv * y;
  p.latent_variances = kss - (Ksx * Cinv * Ksx.transpose()).diagonal();
  p.variances = p.latent_variances.array() + noise;
  return p;
}

Eigen::MatrixXd approx_gram(const FeatureMap& map, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd G(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const Eigen::VectorXd ai = A.row(i).transpose();
    const Eigen::VectorXd fa = feature_vector(map, {ai.data(), static_cast<std::size_t>(ai.size())});
    for (Eigen::Index k = 0; k < B.rows(); ++k) {
      const Eigen::VectorXd bk = B.row(k).transpose();
      G(i, k) = fa.dot(feature_vector(map, {bk.data(), static_cast<std::size_t>(bk.size())}));
    }
  }
  return G;
}

Eigen::MatrixXd exact_gram(const KernelSpec& spec, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd G(A.rows(), B.rows());
  std::vector<double> tau(A.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index k = 0; k < B.rows(); ++k) {
      for (Eigen::Index j = 0; j < A.cols(); ++j) tau[j] = A(i, j) - B(k, j);
      G(i, k) = kernel_eval(spec, tau);
    }
  }
  return G;
}

MomentRecurrence moment_recurrence(const StandardizedDensity& density, double gamma, int L) {
  using ld = long double;
  const ld pi = std::numbers::pi_v<ld>;
  std::vector<ld> m(2 * L + 1);
  for (int k = 0; k <= 2 * L; ++k) {
    auto f = [&](ld w) { return gamma * density.pdf(gamma * w) * std::pow(std::cos(w), k); };
    m[k] = 2.0L * integrate_adaptive(f, 0.0L, pi, 1e-16L, IntegrationOptions{static_cast<double>(k) + 1.0}).value;
  }
  auto ip = [&](const std::vector<ld>& p, const std::vector<ld>& q) {
    ld s = 0.0L;
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = 0; j < q.size(); ++j) s += p[i] * q[j] * m[i + j];
    }
    return s;
  };
  MomentRecurrence r;
  r.mu0 = m[0];
  std::vector<ld> prev, cur{1.0L};
  ld prev_norm = 0.0L;
  for (int k = 0; k < L; ++k) {
    std::vector<ld> zp(cur.size() + 1, 0.0L);
    for (std::size_t i = 0; i < cur.size(); ++i) zp[i + 1] = cur[i];
    const ld norm = ip(cur, cur);
    const ld b = ip(zp, cur) / norm;
    r.diag.push_back(b);
    std::vector<ld> next = zp;
    for (std::size_t i = 0; i < cur.size(); ++i) next[i] -= b * cur[i];
    if (k > 0) {
      const ld a = norm / prev_norm;
      r.offdiag_sq.push_back(a);
      for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= a * prev[i];
    }
    prev = cur;
    prev_norm = norm;
    cur = next;
  }
  return r;
}

namespace {

Hyperparams shifted(const Hyperparams& h, int index, double delta) {
  Hyperparams out = h;
  const int d = h.dim();
  if (index < d) {
    out.lengthscales[index] *= std::exp(delta);
  } else if (index == d) {
    out.scale *= std::exp(delta);
  } else {
    out.noise *= std::exp(delta);
  }
  return out;
}

}  // namespace

Eigen::VectorXd fd_gradient_ff(const FeatureMap& map, const Hyperparams& h, const Dataset& data, double step) {
  Eigen::VectorXd g(h.dim() + 2);
  for (int i = 0; i < g.size(); ++i) {
    g(i) = (ff_loglik(map, shifted(h, i, step), data) - ff_loglik(map, shifted(h, i, -step), data)) / (2.0 * step);
  }
  return g;
}

Eigen::VectorXd fd_gradient_full(const KernelSpec& spec, const Dataset& data, double step) {
  Eigen::VectorXd g(spec.dim() + 2);
  for (int i = 0; i < g.size(); ++i) {
    KernelSpec plus = spec, minus = spec;
    plus.hyper = shifted(spec.hyper, i, step);
    minus.hyper = shifted(spec.hyper, i, -step);
    g(i) = (full_gp_loglik(plus, data) - full_gp_loglik(minus, data)) / (2.0 * step);
  }
  return g;
}

Eigen::MatrixXd random_inputs(Eigen::Index n, int d, double lo, double hi, std::uint64_t seed) {
  CounterRng rng(seed, 0x7e57);
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) X(i, j) = rng.uniform(lo, hi);
  }
  return X;
}

double max_kernel_error(const FeatureMap& map, int n_tau) {
  double worst = 0.0;
  std::vector<double> tau(map.dim());
  for (double t : linspace(0.0, 1.0, n_tau)) {
    std::fill(tau.begin(), tau.end(), t);
    worst = std::max(worst, std::fabs(kernel_eval(map.spec, tau) - approx_kernel(map, tau)));
  }
  return worst;
}

}  // namespace tqff::ref
