#include "tqff/gp.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "tqff/error.hpp"

namespace tqff {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Cholesky of K + noise I with the jitter escalation policy: no jitter first, then
// 1e-8 * scale growing tenfold up to 1e-4 * scale.
Eigen::LLT<Eigen::MatrixXd> robust_cholesky(Eigen::MatrixXd K, double scale) {
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() == Eigen::Success) return llt;
  double added = 0.0;
  for (double jitter = 1e-8 * scale; jitter <= 1e-4 * scale * (1 + 1e-12); jitter *= 10.0) {
    K.diagonal().array() += jitter - added;
    added = jitter;
    llt.compute(K);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw Error(ErrorCode::CholeskyFailure, "covariance not positive definite after maximum jitter");
}

void check_cap(const Dataset& data, const FullGpOptions& options) {
  if (data.n() > options.cap) {
    throw Error(ErrorCode::CapExceeded, "exact GP limited to n <= " + std::to_string(options.cap));
  }
}

struct FfSystem {
  Eigen::MatrixXd lambda;  // 2S x n
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd b;  // Lambda y
  Eigen::VectorXd c;  // A^{-1} b
  double logdet_A = 0.0;
};

FfSystem ff_system(const FeatureMap& map, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  FfSystem sys;
  sys.lambda = design_matrix(map, X);
  const Eigen::Index m = sys.lambda.rows();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  A.selfadjointView<Eigen::Lower>().rankUpdate(sys.lambda);
  A.diagonal().array() += map.spec.hyper.noise;
  sys.llt.compute(A);
  if (sys.llt.info() != Eigen::Success) {
    throw Error(ErrorCode::CholeskyFailure, "feature-space system is not positive definite");
  }
  sys.b = sys.lambda * y;
  sys.c = sys.llt.solve(sys.b);
  const Eigen::MatrixXd& L = sys.llt.matrixLLT();
  sys.logdet_A = 2.0 * L.diagonal().array().log().sum();
  return sys;
}

double ff_value(const FfSystem& sys, const Eigen::VectorXd& y, double noise) {
  const double n = static_cast<double>(y.size());
  const double two_s = static_cast<double>(sys.lambda.rows());
  const double quad = (y.squaredNorm() - sys.b.dot(sys.c)) / noise;
  return -0.5 * (quad + sys.logdet_A + (n - two_s) * std::log(noise) + n * kLog2Pi);
}

}  // namespace

void Dataset::validate() const {
  if (X.rows() < 1) throw Error(ErrorCode::EmptyData, "dataset has no rows");
  if (y.size() != X.rows()) throw Error(ErrorCode::LengthMismatch, "X and y row counts differ");
  if (!X.allFinite() || !y.allFinite()) throw Error(ErrorCode::NonFinite, "dataset has non-finite entries");
  if (!(normalization.y_sd > 0.0)) throw Error(ErrorCode::InvalidArgument, "normalization sd must be positive");
}

Dataset normalize(const Dataset& raw, bool normalize_inputs_flag) {
  raw.validate();
  Dataset out = raw;
  const double n = static_cast<double>(raw.n());
  const double mean = raw.y.mean();
  double sd = std::sqrt((raw.y.array() - mean).square().sum() / n);
  if (!(sd > 0.0)) sd = 1.0;
  out.y = (raw.y.array() - mean) / sd;
  out.normalization.y_mean = mean;
  out.normalization.y_sd = sd;
  out.normalization.x_mean.clear();
  out.normalization.x_sd.clear();
  if (normalize_inputs_flag) {
    for (int j = 0; j < raw.dim(); ++j) {
      const double m = raw.X.col(j).mean();
      double s = std::sqrt((raw.X.col(j).array() - m).square().sum() / n);
      if (!(s > 0.0)) s = 1.0;
      out.X.col(j) = (raw.X.col(j).array() - m) / s;
      out.normalization.x_mean.push_back(m);
      out.normalization.x_sd.push_back(s);
    }
  }
  return out;
}

Eigen::MatrixXd normalize_inputs(const Normalization& norm, const Eigen::MatrixXd& X) {
  if (norm.x_mean.empty()) return X;
  if (static_cast<Eigen::Index>(norm.x_mean.size()) != X.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "input normalization dimension");
  }
  Eigen::MatrixXd out = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    out.col(j) = (X.col(j).array() - norm.x_mean[j]) / norm.x_sd[j];
  }
  return out;
}

PredictiveDistribution denormalize(const PredictiveDistribution& pred, const Normalization& norm) {
  PredictiveDistribution out;
  const double s2 = norm.y_sd * norm.y_sd;
  out.means = pred.means.array() * norm.y_sd + norm.y_mean;
  out.variances = pred.variances * s2;
  out.latent_variances = pred.latent_variances * s2;
  return out;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.cols() != spec.dim() || B.cols() != spec.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "kernel input dimension");
  }
  Eigen::MatrixXd As = A;
  Eigen::MatrixXd Bs = B;
  for (int j = 0; j < spec.dim(); ++j) {
    As.col(j) /= spec.hyper.lengthscales[j];
    Bs.col(j) /= spec.hyper.lengthscales[j];
  }
  const Eigen::VectorXd an = As.rowwise().squaredNorm();
  const Eigen::VectorXd bn = Bs.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * As * Bs.transpose();
  d2.colwise() += an;
  d2.rowwise() += bn.transpose();
  return spec.hyper.scale * (-0.5 * d2.array().max(0.0)).exp().matrix();
}

double full_gp_loglik(const KernelSpec& spec, const Dataset& data, const FullGpOptions& options) {
  check_cap(data, options);
  spec.validate();
  Eigen::MatrixXd K = kernel_matrix(spec, data.X, data.X);
  K.diagonal().array() += spec.hyper.noise;
  const auto llt = robust_cholesky(std::move(K), spec.hyper.scale);
  const Eigen::VectorXd alpha = llt.solve(data.y);
  const Eigen::MatrixXd& L = llt.matrixLLT();
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  const double n = static_cast<double>(data.n());
  return -0.5 * (data.y.dot(alpha) + logdet + n * kLog2Pi);
}

LoglikGradient full_gp_loglik_grad(const KernelSpec& spec, const Dataset& data, const FullGpOptions& options) {
  check_cap(data, options);
  spec.validate();
  const int d = spec.dim();
  const Eigen::MatrixXd Kf = kernel_matrix(spec, data.X, data.X);
  Eigen::MatrixXd K = Kf;
  K.diagonal().array() += spec.hyper.noise;
  const auto llt = robust_cholesky(std::move(K), spec.hyper.scale);
  const Eigen::VectorXd alpha = llt.solve(data.y);
  const Eigen::MatrixXd& L = llt.matrixLLT();
  const double n = static_cast<double>(data.n());

  LoglikGradient out;
  out.value = -0.5 * (data.y.dot(alpha) + 2.0 * L.diagonal().array().log().sum() + n * kLog2Pi);
  // dl/dp = 0.5 tr((alpha alpha^T - K^{-1}) dK/dp)
  const Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(data.n(), data.n()));
  Eigen::MatrixXd W = alpha * alpha.transpose() - Kinv;
  out.grad.resize(d + 2);
  for (int j = 0; j < d; ++j) {
    const double t = spec.hyper.lengthscales[j];
    Eigen::MatrixXd D(data.n(), data.n());
    for (Eigen::Index a = 0; a < data.n(); ++a) {
      for (Eigen::Index b = 0; b < data.n(); ++b) {
        const double r = (data.X(a, j) - data.X(b, j)) / t;
        D(a, b) = r * r;
      }
    }
    out.grad(j) = 0.5 * (W.array() * Kf.array() * D.array()).sum();
  }
  out.grad(d) = 0.5 * (W.array() * Kf.array()).sum();
  out.grad(d + 1) = 0.5 * spec.hyper.noise * W.trace();
  return out;
}

PredictiveDistribution full_gp_predict(const KernelSpec& spec, const Dataset& data, const Eigen::MatrixXd& Xtest,
                                       const FullGpOptions& options) {
  check_cap(data, options);
  spec.validate();
  Eigen::MatrixXd K = kernel_matrix(spec, data.X, data.X);
  K.diagonal().array() += spec.hyper.noise;
  const auto llt = robust_cholesky(std::move(K), spec.hyper.scale);
  const Eigen::MatrixXd Ks = kernel_matrix(spec, data.X, Xtest);  // n x m
  const Eigen::VectorXd alpha = llt.solve(data.y);
  const Eigen::MatrixXd V = llt.matrixL().solve(Ks);
  PredictiveDistribution out;
  out.means = Ks.transpose() * alpha;
  out.latent_variances = (spec.hyper.scale - V.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
  out.variances = out.latent_variances.array() + spec.hyper.noise;
  return out;
}

double ff_loglik(const FeatureMap& map, const Hyperparams& hyper, const Dataset& data) {
  hyper.validate();
  const FeatureMap m = map.with_hyper(hyper);
  const FfSystem sys = ff_system(m, data.X, data.y);
  return ff_value(sys, data.y, hyper.noise);
}

LoglikGradient ff_loglik_grad(const FeatureMap& map, const Hyperparams& hyper, const Dataset& data) {
  hyper.validate();
  const FeatureMap m = map.with_hyper(hyper);
  const FfSystem sys = ff_system(m, data.X, data.y);
  const double noise = hyper.noise;
  const int S = m.num_frequencies();
  const int d = m.dim();
  const Eigen::Index n = data.n();

  LoglikGradient out;
  out.value = ff_value(sys, data.y, noise);
  out.grad.resize(d + 2);

  // dl = <W, dLambda> with W = c r^T / noise - A^{-1} Lambda, r = y - Lambda^T c.
  const Eigen::VectorXd r = data.y - sys.lambda.transpose() * sys.c;
  const Eigen::MatrixXd Ainv = sys.llt.solve(Eigen::MatrixXd::Identity(2 * S, 2 * S));
  Eigen::MatrixXd W = (sys.c / noise) * r.transpose();
  W.noalias() -= Ainv.selfadjointView<Eigen::Lower>() * sys.lambda;

  out.grad(d) = 0.5 * (W.array() * sys.lambda.array()).sum();

  // dLambda_cos = Lambda_sin * G_j, dLambda_sin = -Lambda_cos * G_j, G_j(s,i) = F_sj x_ij / theta_j.
  const Eigen::MatrixXd H = W.topRows(S).cwiseProduct(sys.lambda.bottomRows(S)) -
                            W.bottomRows(S).cwiseProduct(sys.lambda.topRows(S));
  const Eigen::MatrixXd HX = H * data.X;  // S x d
  const Eigen::MatrixXd F = m.scaled_frequencies();
  for (int j = 0; j < d; ++j) out.grad(j) = F.col(j).dot(HX.col(j));

  const double yy = data.y.squaredNorm();
  out.grad(d + 1) = -0.5 * (-yy / noise + sys.b.dot(sys.c) / noise + sys.c.squaredNorm() +
                            noise * Ainv.trace() + static_cast<double>(n) - 2.0 * S);
  return out;
}

Hyperparams default_init(const Dataset& data) {
  data.validate();
  Hyperparams h;
  for (int j = 0; j < data.dim(); ++j) {
    const double range = data.X.col(j).maxCoeff() - data.X.col(j).minCoeff();
    h.lengthscales.push_back(range > 0.0 ? 0.5 * range : 1.0);
  }
  const double mean = data.y.mean();
  double var = (data.y.array() - mean).square().mean();
  if (!(var > 0.0)) var = 1.0;
  h.scale = var;
  h.noise = 0.1 * var;
  return h;
}

FfCache ff_cache(const FeatureMap& map, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw Error(ErrorCode::LengthMismatch, "X and y row counts differ");
  FfSystem sys = ff_system(map, X, y);
  FfCache cache;
  cache.chol_lower = sys.llt.matrixL();
  cache.mean_weights = sys.c;
  return cache;
}

GPModel ff_model(const FeatureMap& map, std::shared_ptr<const Dataset> data, const OptConfig& opt) {
  data->validate();
  GPModel model;
  model.map = map;
  model.opt = opt;
  model.normalization = data->normalization;
  model.cache = ff_cache(map, data->X, data->y);
  model.train = std::move(data);
  return model;
}

namespace {

Eigen::VectorXd pack(const Hyperparams& h) {
  const int d = h.dim();
  Eigen::VectorXd p(d + 2);
  for (int j = 0; j < d; ++j) p(j) = std::log(h.lengthscales[j]);
  p(d) = std::log(h.scale);
  p(d + 1) = std::log(h.noise);
  return p;
}

Hyperparams unpack(const Eigen::VectorXd& p) {
  const int d = static_cast<int>(p.size()) - 2;
  Hyperparams h;
  for (int j = 0; j < d; ++j) h.lengthscales.push_back(std::exp(p(j)));
  h.scale = std::exp(p(d));
  h.noise = std::exp(p(d + 1));
  return h;
}

}  // namespace

namespace {

// Adam ascent on a log-likelihood; records the negated value per iteration.
Eigen::VectorXd adam_maximize(Eigen::VectorXd p, const std::function<LoglikGradient(const Hyperparams&)>& eval,
                              const OptConfig& opt, std::vector<double>& history) {
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(p.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(p.size());
  for (int t = 1; t <= opt.iters; ++t) {
    LoglikGradient lg;
    try {
      lg = eval(unpack(p));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::CholeskyFailure) {
        throw Error(ErrorCode::CholeskyFailure, "at iteration " + std::to_string(t) + ": " + e.what());
      }
      throw;
    }
    if (!std::isfinite(lg.value) || !lg.grad.allFinite()) {
      throw Error(ErrorCode::NonFiniteLoss, "non-finite loss at iteration " + std::to_string(t));
    }
    history.push_back(-lg.value);
    const Eigen::VectorXd g = -lg.grad;
    m1 = opt.beta1 * m1 + (1.0 - opt.beta1) * g;
    m2 = opt.beta2 * m2 + (1.0 - opt.beta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(opt.beta1, t);
    const double c2 = 1.0 - std::pow(opt.beta2, t);
    p.array() -= opt.lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + opt.eps);
    // exp must stay positive and finite for every parameter
    if (!(p.array().abs() < 700.0).all()) {
      throw Error(ErrorCode::NonFiniteLoss, "parameters diverged at iteration " + std::to_string(t));
    }
  }
  return p;
}

}  // namespace

GPModel ff_fit(const FeatureMap& map, std::shared_ptr<const Dataset> data, const OptConfig& opt) {
  data->validate();
  const Hyperparams init = opt.init ? *opt.init : default_init(*data);
  if (init.dim() != map.dim()) throw Error(ErrorCode::DimensionMismatch, "initial hyperparameter dimension");
  std::vector<double> history;
  history.reserve(opt.iters + 1);
  const Eigen::VectorXd p = adam_maximize(
      pack(init), [&](const Hyperparams& h) { return ff_loglik_grad(map, h, *data); }, opt, history);
  const FeatureMap fitted = map.with_hyper(opt.iters == 0 ? init : unpack(p));
  GPModel model = ff_model(fitted, std::move(data), opt);
  const double final_loss = -ff_loglik(fitted, fitted.spec.hyper, *model.train);
  if (!std::isfinite(final_loss)) throw Error(ErrorCode::NonFiniteLoss, "non-finite final loss");
  history.push_back(final_loss);
  model.loss_history = std::move(history);
  return model;
}

Hyperparams full_gp_fit(const KernelSpec& spec, const Dataset& data, const OptConfig& opt,
                        const FullGpOptions& options) {
  data.validate();
  const Hyperparams init = opt.init ? *opt.init : default_init(data);
  std::vector<double> history;
  const Eigen::VectorXd p = adam_maximize(
      pack(init),
      [&](const Hyperparams& h) {
        KernelSpec s = spec;
        s.hyper = h;
        return full_gp_loglik_grad(s, data, options);
      },
      opt, history);
  return opt.iters == 0 ? init : unpack(p);
}

PredictiveDistribution ff_predict(const FeatureMap& map, const FfCache& cache, const Eigen::MatrixXd& Xtest) {
  const Eigen::MatrixXd phi = design_matrix(map, Xtest);  // 2S x m
  const double noise = map.spec.hyper.noise;
  PredictiveDistribution out;
  out.means = phi.transpose() * cache.mean_weights;
  const Eigen::MatrixXd V = cache.chol_lower.triangularView<Eigen::Lower>().solve(phi);
  out.latent_variances = noise * V.colwise().squaredNorm().transpose();
  out.variances = out.latent_variances.array() + noise;
  return out;
}

PredictiveDistribution ff_predict(const GPModel& model, const Eigen::MatrixXd& Xtest) {
  return ff_predict(model.map, model.cache, Xtest);
}

Metrics metrics(const PredictiveDistribution& pred, const Eigen::VectorXd& ytrue) {
  if (pred.size() != ytrue.size() || pred.variances.size() != ytrue.size()) {
    throw Error(ErrorCode::LengthMismatch, "prediction and target lengths differ");
  }
  if (ytrue.size() == 0) throw Error(ErrorCode::EmptyData, "no targets");
  Metrics m;
  const Eigen::ArrayXd r = pred.means.array() - ytrue.array();
  m.rmse = std::sqrt(r.square().mean());
  m.nll = (0.5 * (kLog2Pi + pred.variances.array().log()) + 0.5 * r.square() / pred.variances.array()).mean();
  return m;
}

Eigen::VectorXd kl_gaussian(const PredictiveDistribution& p, const PredictiveDistribution& q) {
  if (p.size() != q.size() || p.variances.size() != q.variances.size()) {
    throw Error(ErrorCode::LengthMismatch, "distribution lengths differ");
  }
  if ((p.variances.array() <= 0.0).any() || (q.variances.array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "variances must be positive");
  }
  const Eigen::ArrayXd vp = p.variances.array();
  const Eigen::ArrayXd vq = q.variances.array();
  const Eigen::ArrayXd dm = p.means.array() - q.means.array();
  Eigen::ArrayXd kl = 0.5 * ((vq / vp).log() + (vp + dm.square()) / vq - 1.0);
  return kl.max(0.0).matrix();
}

}  // namespace tqff
