#include <benchmark/benchmark.h>

#include <memory>

#include "tqff/datasets.hpp"
#include "tqff/feature_map.hpp"
#include "tqff/gp.hpp"
#include "tqff/quadrature.hpp"
#include "tqff/spectral.hpp"

namespace {

tqff::KernelSpec se_spec(int d, double theta) {
  tqff::KernelSpec spec;
  spec.hyper.lengthscales.assign(d, theta);
  spec.hyper.noise = 0.01;
  return spec;
}

void BM_TrigRule(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const tqff::StandardNormalDensity density;
  for (auto _ : state) {
    auto rule = tqff::trig_rule([&density](long double w) { return density.pdf(w); }, 1.15, L);
    benchmark::DoNotOptimize(rule.nodes.data());
  }
  state.SetComplexityN(L);
}
BENCHMARK(BM_TrigRule)->RangeMultiplier(2)->Range(8, 128)->Unit(benchmark::kMillisecond)->Complexity();

void BM_GaussHermite(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tqff::gauss_hermite_rule(L).nodes.data());
}
BENCHMARK(BM_GaussHermite)->RangeMultiplier(4)->Range(16, 256)->Unit(benchmark::kMicrosecond);

void BM_DesignMatrix(benchmark::State& state) {
  const auto n = state.range(0);
  const auto map = tqff::build_feature_map(tqff::FeatureMethod::TQFF, se_spec(2, 0.05), 10);
  const tqff::Dataset data = tqff::gen_schaffer(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(tqff::design_matrix(map, data.X).data());
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_DesignMatrix)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

// One Adam step's worth of work: likelihood plus analytic gradient.
void BM_FeatureLoglikGrad(benchmark::State& state) {
  const auto n = state.range(0);
  const int L = static_cast<int>(state.range(1));
  const auto spec = se_spec(2, 0.05);
  const auto map = tqff::build_feature_map(tqff::FeatureMethod::TQFF, spec, L);
  const tqff::Dataset data = tqff::normalize(tqff::gen_schaffer(n, 2));
  for (auto _ : state) benchmark::DoNotOptimize(tqff::ff_loglik_grad(map, spec.hyper, data).value);
  state.counters["features"] = map.feature_dim();
}
BENCHMARK(BM_FeatureLoglikGrad)->Args({1000, 8})->Args({4000, 8})->Args({4000, 10})->Unit(benchmark::kMillisecond);

void BM_ExactLoglik(benchmark::State& state) {
  const auto n = state.range(0);
  const auto spec = se_spec(2, 0.5);
  const tqff::Dataset data = tqff::normalize(tqff::gen_schaffer(n, 3));
  for (auto _ : state) benchmark::DoNotOptimize(tqff::full_gp_loglik(spec, data));
}
BENCHMARK(BM_ExactLoglik)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const auto spec = se_spec(1, 0.1);
  const auto map = tqff::build_feature_map(tqff::FeatureMethod::TQFF, spec, 70);
  auto train = std::make_shared<const tqff::Dataset>(tqff::gen_toy(2000, 4));
  const tqff::GPModel model = tqff::ff_model(map, train);
  const Eigen::MatrixXd Xtest = tqff::gen_toy_test_inputs(state.range(0), 5);
  for (auto _ : state) benchmark::DoNotOptimize(tqff::ff_predict(model, Xtest).means.data());
}
BENCHMARK(BM_Predict)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
