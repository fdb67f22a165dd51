#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "brute_force.hpp"
#include "tqff/datasets.hpp"
#include "tqff/error.hpp"
#include "tqff/gp.hpp"
#include "tqff/rng.hpp"

namespace {

using namespace tqff;

constexpr double kLog2Pi = 1.8378770664093454836;

KernelSpec se(std::vector<double> theta, double scale, double noise) {
  KernelSpec s;
  s.hyper.lengthscales = std::move(theta);
  s.hyper.scale = scale;
  s.hyper.noise = noise;
  return s;
}

Dataset random_dataset(Eigen::Index n, int d, std::uint64_t seed) {
  Dataset data;
  data.X = ref::random_inputs(n, d, 0, 1, seed);
  CounterRng rng(seed, 99);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) data.y(i) = std::sin(6.0 * data.X(i, 0)) + 0.3 * rng.normal();
  return data;
}

Eigen::MatrixXd approx_covariance(const FeatureMap& map, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd C = ref::approx_gram(map, X, X);
  C.diagonal().array() += map.spec.hyper.noise;
  return C;
}

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

TEST(FullGp, SinglePointAtZero) {
  const auto s = se({0.3}, 2.5, 0.4);
  Dataset d;
  d.X = Eigen::MatrixXd::Constant(1, 1, 0.7);
  d.y = Eigen::VectorXd::Zero(1);
  EXPECT_NEAR(full_gp_loglik(s, d), -0.5 * std::log(2 * std::numbers::pi * (2.5 + 0.4)), 1e-14);
}

TEST(FullGp, InterpolatesWhenNoiseVanishes) {
  const auto s = se({0.2}, 1.0, 1e-10);
  Dataset d;
  d.X = Eigen::MatrixXd(5, 1);
  d.X << 0.0, 0.25, 0.5, 0.75, 1.0;
  d.y = Eigen::VectorXd(5);
  d.y << 0.3, -1.2, 0.8, 0.1, 2.0;
  const auto pred = full_gp_predict(s, d, d.X);
  EXPECT_LE(max_abs(pred.means - d.y), 1e-6);
  EXPECT_LE(pred.latent_variances.maxCoeff(), 1e-8);
}

TEST(FullGp, MatchesNaiveDenseEvaluation) {
  const auto s = se({0.15, 0.4}, 1.7, 0.05);
  const auto d = random_dataset(20, 2, 11);
  Eigen::MatrixXd C = ref::exact_gram(s, d.X, d.X);
  C.diagonal().array() += 0.05;
  EXPECT_NEAR(full_gp_loglik(s, d), ref::naive_loglik(C, d.y), 1e-8);

  const Eigen::MatrixXd Xs = ref::random_inputs(8, 2, -0.2, 1.2, 12);
  const auto pred = full_gp_predict(s, d, Xs);
  const auto naive = ref::naive_predict(ref::exact_gram(s, d.X, d.X), ref::exact_gram(s, Xs, d.X),
                                        Eigen::VectorXd::Constant(8, 1.7), d.y, 0.05);
  EXPECT_LE(max_abs(pred.means - naive.means), 1e-8);
  EXPECT_LE(max_abs(pred.latent_variances - naive.latent_variances), 1e-8);
  EXPECT_LE(max_abs(pred.variances - naive.variances), 1e-8);
}

TEST(FullGp, CapExceeded) {
  const auto d = random_dataset(30, 1, 1);
  try {
    full_gp_loglik(se({0.2}, 1, 0.1), d, FullGpOptions{.cap = 20});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CapExceeded);
  }
}

TEST(FullGp, GradientMatchesFiniteDifferences) {
  const auto d = random_dataset(40, 2, 5);
  const auto s = se({0.2, 0.5}, 1.3, 0.08);
  const auto g = full_gp_loglik_grad(s, d);
  const auto fd = ref::fd_gradient_full(s, d, 1e-4);
  EXPECT_NEAR(g.value, full_gp_loglik(s, d), 1e-10);
  EXPECT_LE(max_abs(g.grad - fd) / max_abs(fd), 1e-4);
}

TEST(FeatureLoglik, WoodburyMatchesNaive) {
  for (auto method : {FeatureMethod::TQFF, FeatureMethod::GHFF, FeatureMethod::RFF}) {
    const auto s = se({0.1}, 1.4, 0.03);
    const auto map = build_feature_map(method, s, method == FeatureMethod::RFF ? 15 : 15, 3);
    ASSERT_GE(map.feature_dim(), 30);
    const auto d = random_dataset(30, 1, 7);
    EXPECT_NEAR(ff_loglik(map, s.hyper, d), ref::naive_loglik(approx_covariance(map, d.X), d.y), 1e-8);
  }
}

TEST(FeatureLoglik, WoodburyMatchesNaiveFewFeatures) {
  const auto s = se({0.2, 0.3}, 0.9, 0.05);
  const auto map = build_feature_map(FeatureMethod::TQFF, s, 3);
  const auto d = random_dataset(50, 2, 8);
  EXPECT_NEAR(ff_loglik(map, s.hyper, d), ref::naive_loglik(approx_covariance(map, d.X), d.y), 1e-8);
}

TEST(FeatureLoglik, ZeroTargets) {
  const auto s = se({0.1}, 1.0, 0.2);
  const auto map = build_feature_map(FeatureMethod::TQFF, s, 10);
  Dataset d = random_dataset(40, 1, 2);
  d.y.setZero();
  const Eigen::MatrixXd L = design_matrix(map, d.X);
  Eigen::MatrixXd A = L * L.transpose();
  A.diagonal().array() += 0.2;
  const double logdet = 2.0 * Eigen::LLT<Eigen::MatrixXd>(A).matrixLLT().diagonal().array().log().sum();
  const double S2 = static_cast<double>(map.feature_dim());
  EXPECT_NEAR(ff_loglik(map, s.hyper, d), -0.5 * (logdet + (40 - S2) * std::log(0.2) + 40 * kLog2Pi), 1e-10);
}

TEST(FeatureLoglik, TargetScalingShiftsQuadraticOnly) {
  const auto s = se({0.1}, 1.0, 0.1);
  const auto map = build_feature_map(FeatureMethod::TQFF, s, 12);
  const Dataset d = random_dataset(40, 1, 3);
  Dataset dc = d;
  const double c = 2.7;
  dc.y *= c;
  const Eigen::MatrixXd C = approx_covariance(map, d.X);
  const double quad = d.y.dot(C.ldlt().solve(d.y));
  EXPECT_NEAR(ff_loglik(map, s.hyper, dc) - ff_loglik(map, s.hyper, d), -0.5 * (c * c - 1) * quad, 1e-9);
}

TEST(FeatureLoglik, GradientMatchesFiniteDifferencesAtRandomPoints) {
  const auto base = se({0.2, 0.3}, 1.0, 0.1);
  const auto map = build_feature_map(FeatureMethod::TQFF, base, 6);
  const auto d = random_dataset(50, 2, 13);
  CounterRng rng(2024, 0);
  for (int t = 0; t < 20; ++t) {
    Hyperparams h;
    h.lengthscales = {std::exp(rng.uniform(-3, 0)), std::exp(rng.uniform(-3, 0))};
    h.scale = std::exp(rng.uniform(-1, 1));
    h.noise = std::exp(rng.uniform(-4, 0));
    const auto g = ff_loglik_grad(map, h, d);
    const auto fd = ref::fd_gradient_ff(map, h, d, 1e-4);
    EXPECT_NEAR(g.value, ff_loglik(map, h, d), 1e-9 * std::abs(g.value));
    EXPECT_LE(max_abs(g.grad - fd) / max_abs(fd), 1e-4) << "point " << t;
  }
}

TEST(FeatureFit, ZeroIterationsReturnsInitialization) {
  auto d = std::make_shared<Dataset>(random_dataset(30, 1, 4));
  const auto map = build_feature_map(FeatureMethod::TQFF, se({0.1}, 1, 0.1), 10);
  OptConfig opt;
  opt.iters = 0;
  opt.init = Hyperparams{{0.123}, 1.5, 0.07};
  const auto model = ff_fit(map, d, opt);
  EXPECT_EQ(model.hyper().lengthscales[0], 0.123);
  EXPECT_EQ(model.hyper().scale, 1.5);
  EXPECT_EQ(model.hyper().noise, 0.07);
  ASSERT_EQ(model.loss_history.size(), 1u);
}

TEST(FeatureFit, DeterministicAndMonotoneAtSmallRate) {
  auto d = std::make_shared<Dataset>(normalize(random_dataset(200, 1, 6)));
  const auto map = build_feature_map(FeatureMethod::TQFF, se({0.1}, 1, 0.1), 20);
  OptConfig opt;
  opt.lr = 1e-3;
  opt.iters = 100;
  const auto a = ff_fit(map, d, opt);
  const auto b = ff_fit(map, d, opt);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_LE(a.loss_history.back(), a.loss_history.front());
}

TEST(FeatureFit, NonFiniteTargetsRejected) {
  Dataset d = random_dataset(10, 1, 1);
  d.y(3) = std::nan("");
  const auto map = build_feature_map(FeatureMethod::TQFF, se({0.1}, 1, 0.1), 5);
  EXPECT_THROW(ff_fit(map, std::make_shared<Dataset>(d), OptConfig{}), Error);
}

TEST(FeatureFit, RecoversLengthscale) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto d = std::make_shared<Dataset>(gen_gp2d(1000, 0.2, seed, Gp2dOptions{.scale = 1.0, .noise = 0.01, .dim = 1}));
    const auto map = build_feature_map(FeatureMethod::TQFF, se({0.2}, 1, 0.01), 60);
    const auto model = ff_fit(map, d, OptConfig{});
    EXPECT_NEAR(model.hyper().lengthscales[0], 0.2, 0.06) << "seed " << seed;
  }
}

TEST(FeaturePredict, MatchesNaiveKernelSpace) {
  const auto s = se({0.1}, 1.2, 0.02);
  const auto map = build_feature_map(FeatureMethod::TQFF, s, 12);
  const auto d = std::make_shared<Dataset>(random_dataset(20, 1, 21));
  const auto model = ff_model(map, d);
  const Eigen::MatrixXd Xs = ref::random_inputs(15, 1, -0.5, 1.5, 22);
  const auto pred = ff_predict(model, Xs);
  const auto naive = ref::naive_predict(ref::approx_gram(map, d->X, d->X), ref::approx_gram(map, Xs, d->X),
                                        ref::approx_gram(map, Xs, Xs).diagonal(), d->y, 0.02);
  EXPECT_LE(max_abs(pred.means - naive.means), 1e-8);
  EXPECT_LE(max_abs(pred.latent_variances - naive.latent_variances), 1e-8);
  EXPECT_GE(pred.variances.minCoeff(), 0.02 - 1e-12);
  EXPECT_GE(pred.latent_variances.minCoeff(), -1e-10);
}

TEST(FeaturePredict, CacheRebuildReproducesPredictions) {
  const auto s = se({0.1, 0.2}, 1.0, 0.05);
  const auto map = build_feature_map(FeatureMethod::GLFF, s, 5);
  const auto d = std::make_shared<Dataset>(random_dataset(100, 2, 30));
  const auto model = ff_model(map, d);
  const Eigen::MatrixXd Xs = ref::random_inputs(10, 2, 0, 1, 31);
  const auto a = ff_predict(model, Xs);
  const auto b = ff_predict(map, ff_cache(map, d->X, d->y), Xs);
  EXPECT_LE(max_abs(a.means - b.means), 1e-10);
  EXPECT_LE(max_abs(a.variances - b.variances), 1e-10);
}

TEST(FeaturePredict, EmptyTrainingSetGivesPrior) {
  const auto s = se({0.1}, 2.0, 0.1);
  const auto map = build_feature_map(FeatureMethod::TQFF, s, 20);
  const Eigen::MatrixXd empty(0, 1);
  const auto pred = ff_predict(map, ff_cache(map, empty, Eigen::VectorXd()), ref::random_inputs(5, 1, 0, 1, 1));
  for (Eigen::Index i = 0; i < 5; ++i) {
    EXPECT_EQ(pred.means(i), 0.0);
    EXPECT_NEAR(pred.latent_variances(i), 2.0 * map.weight_sum(), 1e-12);
  }
}

TEST(FeaturePredict, RevertsToPriorFarFromData) {
  const double theta = 0.05;
  const auto s = se({theta}, 1.0, 0.01);
  const auto map = build_feature_map(FeatureMethod::TQFF, s, 70);
  const auto d = std::make_shared<Dataset>(random_dataset(300, 1, 40));
  const auto model = ff_model(map, d);
  Eigen::MatrixXd Xs(2, 1);
  Xs << 1.0 + 10 * theta, -10 * theta;
  const auto pred = ff_predict(model, Xs);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_NEAR(pred.latent_variances(i) / map.weight_sum(), 1.0, 0.01);
  }
}

TEST(Normalization, RoundTrip) {
  Dataset raw = random_dataset(60, 1, 50);
  raw.y = 4.0 * raw.y.array() + 10.0;
  const Dataset norm = normalize(raw);
  const double sd = norm.normalization.y_sd;
  const double mean = norm.normalization.y_mean;
  EXPECT_NEAR(norm.y.mean(), 0.0, 1e-12);

  const auto s = se({0.1}, 1.1, 0.05);
  const auto map = build_feature_map(FeatureMethod::TQFF, s, 15);
  const Eigen::MatrixXd Xs = ref::random_inputs(10, 1, 0, 1, 51);
  const auto back = denormalize(ff_predict(ff_model(map, std::make_shared<Dataset>(norm)), Xs), norm.normalization);

  Hyperparams raw_hyper = s.hyper;
  raw_hyper.scale *= sd * sd;
  raw_hyper.noise *= sd * sd;
  const auto raw_map = map.with_hyper(raw_hyper);
  Dataset centred = raw;
  centred.y.array() -= mean;
  const auto direct = ff_predict(raw_map, ff_cache(raw_map, centred.X, centred.y), Xs);
  EXPECT_LE(max_abs(back.means - (direct.means.array() + mean).matrix()), 1e-8);
  EXPECT_LE(max_abs(back.variances - direct.variances), 1e-8);
  EXPECT_LE(max_abs(back.latent_variances - direct.latent_variances), 1e-8);
}

TEST(Normalization, InputsAreStandardized) {
  Dataset raw = random_dataset(50, 2, 60);
  raw.X.col(1) = 5.0 * raw.X.col(1).array() - 3.0;
  const Dataset norm = normalize(raw, true);
  ASSERT_EQ(norm.normalization.x_mean.size(), 2u);
  const Eigen::MatrixXd again = normalize_inputs(norm.normalization, raw.X);
  EXPECT_LE((again - norm.X).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(norm.X.col(1).mean(), 0.0, 1e-12);
}

TEST(Metrics, RmseAndLengthMismatch) {
  PredictiveDistribution p;
  p.means = Eigen::Vector2d(1.0, 2.0);
  p.variances = Eigen::Vector2d(1.0, 1.0);
  p.latent_variances = Eigen::Vector2d(0.5, 0.5);
  const auto m = metrics(p, Eigen::Vector2d(1.0, 4.0));
  EXPECT_NEAR(m.rmse, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(m.nll, 0.5 * kLog2Pi + 0.5 * (0.0 + 4.0) / 2.0, 1e-14);
  try {
    metrics(p, Eigen::Vector3d(1, 2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
}

TEST(Metrics, NllMatchesEntropyUnderOwnPredictive) {
  const int n = 10000;
  const double var = 2.0;
  PredictiveDistribution p;
  p.means = Eigen::VectorXd::Constant(n, 0.3);
  p.variances = Eigen::VectorXd::Constant(n, var);
  p.latent_variances = p.variances;
  CounterRng rng(77, 0);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = 0.3 + std::sqrt(var) * rng.normal();
  const double entropy = 0.5 * std::log(2 * std::numbers::pi * std::numbers::e * var);
  // per-draw nll has sd 1/sqrt(2)
  EXPECT_NEAR(metrics(p, y).nll, entropy, 4.0 * std::sqrt(0.5 / n));
}

TEST(KlGaussian, ClosedForms) {
  PredictiveDistribution p;
  p.means = Eigen::Vector2d(0.0, 0.4);
  p.variances = Eigen::Vector2d(1.0, 3.0);
  p.latent_variances = p.variances;
  const auto same = kl_gaussian(p, p);
  EXPECT_EQ(same(0), 0.0);
  EXPECT_EQ(same(1), 0.0);

  PredictiveDistribution q = p;
  q.means(0) = 1.0;
  EXPECT_NEAR(kl_gaussian(p, q)(0), 0.5, 1e-15);

  q.variances(1) = 1.5;
  const double expected = 0.5 * (std::log(1.5 / 3.0) + 3.0 / 1.5 - 1.0);
  EXPECT_NEAR(kl_gaussian(p, q)(1), expected, 1e-15);
  EXPECT_GE(kl_gaussian(q, p).minCoeff(), 0.0);

  PredictiveDistribution short_q;
  short_q.means = Eigen::VectorXd::Zero(1);
  short_q.variances = Eigen::VectorXd::Ones(1);
  short_q.latent_variances = short_q.variances;
  EXPECT_THROW(kl_gaussian(p, short_q), Error);
}

}  // namespace
