#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "tqff/datasets.hpp"
#include "tqff/error.hpp"
#include "tqff/rng.hpp"

namespace {

using namespace tqff;
namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tqff_test_datasets";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

double population_sd(const Eigen::VectorXd& v) {
  return std::sqrt((v.array() - v.mean()).square().mean());
}

double sample_variance(const Eigen::VectorXd& v) {
  return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

TEST(Toy, NoiselessValueAtHalf) {
  EXPECT_NEAR(toy_function(0.5), std::exp(-0.25) + 1.5, 1e-15);
}

TEST(Toy, DeterministicAndNormalized) {
  const auto a = gen_toy(5000, 3);
  const auto b = gen_toy(5000, 3);
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(a.y, b.y);
  EXPECT_NEAR(a.y.mean(), 0.0, 1e-12);
  EXPECT_NEAR(population_sd(a.y), 1.0, 1e-12);
  EXPECT_GE(a.X.minCoeff(), 0.0);
  EXPECT_LE(a.X.maxCoeff(), 1.0);
  EXPECT_NE(gen_toy(5000, 4).y, a.y);
}

TEST(Toy, NoiseVariance) {
  const auto d = gen_toy(5000, 9);
  const Eigen::VectorXd y = raw_targets(d);
  Eigen::VectorXd resid(d.n());
  for (Eigen::Index i = 0; i < d.n(); ++i) resid(i) = y(i) - toy_function(d.X(i, 0));
  EXPECT_NEAR(sample_variance(resid), kToyNoiseSd * kToyNoiseSd, 0.1 * kToyNoiseSd * kToyNoiseSd);
}

TEST(Toy, TestInputsSortedInRange) {
  const auto X = gen_toy_test_inputs(1000, 1);
  ASSERT_EQ(X.rows(), 1000);
  EXPECT_TRUE(std::is_sorted(X.data(), X.data() + X.size()));
  EXPECT_GE(X.minCoeff(), -1.0);
  EXPECT_LE(X.maxCoeff(), 1.0);
}

TEST(Schaffer, MinimumAndSymmetry) {
  EXPECT_EQ(schaffer2(0.0, 0.0), 0.0);
  CounterRng rng(5, 0);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-3, 3), y = rng.uniform(-3, 3);
    EXPECT_NEAR(schaffer2(x, y), schaffer2(y, x), 1e-14);
  }
}

TEST(Schaffer, IndependentFormula) {
  auto other = [](double x, double y) {
    const double s = std::sin(x * x - y * y);
    const double den = 1.0 + 0.001 * (x * x + y * y);
    return 0.5 + (s * s - 0.5) / (den * den);
  };
  CounterRng rng(6, 0);
  for (int i = 0; i < 10; ++i) {
    const double x = rng.uniform(-3, 3), y = rng.uniform(-3, 3);
    EXPECT_NEAR(schaffer2(x, y), other(x, y), 1e-12);
  }
  const auto d = gen_schaffer(200, 1);
  ASSERT_EQ(d.dim(), 2);
  EXPECT_GE(d.X.minCoeff(), -3.0);
  EXPECT_LE(d.X.maxCoeff(), 3.0);
  const Eigen::VectorXd y = raw_targets(d);
  for (Eigen::Index i = 0; i < d.n(); ++i) EXPECT_NEAR(y(i), schaffer2(d.X(i, 0), d.X(i, 1)), 1e-12);
}

TEST(GpDraw, MeanNearZeroAcrossSeeds) {
  const Eigen::Index n = 500;
  double total = 0.0;
  const int seeds = 20;
  for (int s = 1; s <= seeds; ++s) total += gen_gp2d(n, 0.05, s).y.mean();
  const double pooled = total / seeds;
  // pooled mean has sd at most sqrt(1.01 / seeds) from the per-seed mean variance bound
  EXPECT_LE(std::abs(pooled), 3.0 * std::sqrt(1.01 / seeds));
}

TEST(GpDraw, MarginalVariance) {
  const auto d = gen_gp2d(2000, 0.025, 4);
  const double v = (d.y.array().square()).mean();
  EXPECT_NEAR(v, 1.01, 0.15 * 1.01);
}

TEST(GpDraw, Deterministic) {
  EXPECT_EQ(gen_gp2d(300, 0.05, 2).y, gen_gp2d(300, 0.05, 2).y);
  EXPECT_NE(gen_gp2d(300, 0.05, 2).y, gen_gp2d(300, 0.05, 3).y);
}

TEST(GpDraw, CapExceeded) {
  try {
    gen_gp2d(7000, 0.05, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CapExceeded);
  }
}

TEST(Csv, ParsesAndNormalizes) {
  const auto p = scratch("ok.csv");
  write_text(p, "# generated\nx1,x2,y\n0,1,2\n1,2,4\n\n2,3,9\n");
  const auto d = ingest_csv(p.string());
  ASSERT_EQ(d.n(), 3);
  ASSERT_EQ(d.dim(), 2);
  EXPECT_EQ(d.X(2, 1), 3.0);
  EXPECT_NEAR(d.y.mean(), 0.0, 1e-12);
  EXPECT_NEAR(raw_targets(d)(2), 9.0, 1e-12);

  const auto raw = ingest_csv(p.string(), CsvSchema{.header = true, .normalize = false});
  EXPECT_EQ(raw.y(1), 4.0);
}

TEST(Csv, ParseErrorsReportLine) {
  const auto p = scratch("bad.csv");
  write_text(p, "x,y\n1,2\n3,abc\n");
  try {
    ingest_csv(p.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  write_text(p, "x,y\n1,2\n3,4,5\n");
  try {
    ingest_csv(p.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
  write_text(p, "x,y\n1,inf\n");
  EXPECT_THROW(ingest_csv(p.string()), Error);
}

TEST(Csv, EmptyAndMissing) {
  const auto p = scratch("empty.csv");
  write_text(p, "x,y\n");
  try {
    ingest_csv(p.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyData);
  }
  try {
    ingest_csv(scratch("does_not_exist.csv").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Csv, WriteReadRoundTrip) {
  const auto d = gen_gp2d(50, 0.1, 8);
  const auto p = scratch("round.csv");
  write_dataset_csv(p.string(), d);
  const auto back = ingest_csv(p.string(), CsvSchema{.header = true, .normalize = false});
  EXPECT_EQ(back.X, d.X);
  EXPECT_EQ(back.y, d.y);
}

TEST(Split, TenRows) {
  Dataset d;
  d.X.resize(10, 1);
  d.y.resize(10);
  for (int i = 0; i < 10; ++i) {
    d.X(i, 0) = i;
    d.y(i) = 3.0 * i + 1.0;
  }
  const auto [train, test] = split(d, 0.8, 42);
  ASSERT_EQ(train.n(), 8);
  ASSERT_EQ(test.n(), 2);
  std::set<double> seen;
  for (Eigen::Index i = 0; i < 8; ++i) seen.insert(train.X(i, 0));
  for (Eigen::Index i = 0; i < 2; ++i) seen.insert(test.X(i, 0));
  EXPECT_EQ(seen.size(), 10u);

  EXPECT_NEAR(train.y.mean(), 0.0, 1e-12);
  EXPECT_NEAR(population_sd(train.y), 1.0, 1e-12);
  const Eigen::VectorXd test_raw = raw_targets(test);
  for (Eigen::Index i = 0; i < 2; ++i) EXPECT_NEAR(test_raw(i), 3.0 * test.X(i, 0) + 1.0, 1e-12);

  const auto [train2, test2] = split(d, 0.8, 42);
  EXPECT_EQ(train.X, train2.X);
  EXPECT_EQ(test.X, test2.X);
  EXPECT_THROW(split(d, 1.0, 1), Error);
}

}  // namespace
