#include "tqff/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "tqff/error.hpp"
#include "tqff/report.hpp"
#include "tqff/rng.hpp"

namespace tqff {

double toy_function(double x) {
  const double s = std::sin(10.0 * (x - 0.5));
  return std::exp(-x * x) * std::exp(s * s) + 3.0 * x;
}

double schaffer2(double x, double y) {
  const double s = std::sin(x * x - y * y);
  const double den = 1.0 + 0.001 * (x * x + y * y);
  return 0.5 + (s * s - 0.5) / (den * den);
}

Dataset gen_toy(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  CounterRng rng(seed, 0x70);
  Dataset raw;
  raw.X.resize(n, 1);
  raw.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = rng.uniform();
    raw.X(i, 0) = x;
    raw.y(i) = toy_function(x) + kToyNoiseSd * rng.normal();
  }
  return normalize(raw);
}

Eigen::MatrixXd gen_toy_test_inputs(Eigen::Index m, std::uint64_t seed) {
  CounterRng rng(seed, 0x71);
  std::vector<double> xs(m);
  for (auto& x : xs) x = rng.uniform(-1.0, 1.0);
  std::sort(xs.begin(), xs.end());
  Eigen::MatrixXd X(m, 1);
  for (Eigen::Index i = 0; i < m; ++i) X(i, 0) = xs[i];
  return X;
}

Dataset gen_schaffer(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  CounterRng rng(seed, 0x5c);
  Dataset data;
  data.X.resize(n, 2);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.X(i, 0) = rng.uniform(-3.0, 3.0);
    data.X(i, 1) = rng.uniform(-3.0, 3.0);
    data.y(i) = schaffer2(data.X(i, 0), data.X(i, 1));
  }
  return data;
}

Dataset gen_gp2d(Eigen::Index n, double theta, std::uint64_t seed, const Gp2dOptions& options) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  if (n > options.cap) throw Error(ErrorCode::CapExceeded, "GP sampling limited to n <= " + std::to_string(options.cap));
  CounterRng rng(seed, 0x6b);
  Dataset data;
  data.X.resize(n, options.dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < options.dim; ++j) data.X(i, j) = rng.uniform();
  }
  KernelSpec spec;
  spec.hyper.lengthscales.assign(options.dim, theta);
  spec.hyper.scale = options.scale;
  spec.hyper.noise = options.noise;
  spec.validate();
  Eigen::MatrixXd K = kernel_matrix(spec, data.X, data.X);
  K.diagonal().array() += options.noise;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::CholeskyFailure, "GP sampling covariance");
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  data.y = llt.matrixL() * z;
  return data;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, long line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": not a number: '" + text + "'");
  }
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos != text.size()) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": not a number: '" + text + "'");
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": non-finite value");
  }
  return v;
}

}  // namespace

Dataset ingest_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  std::size_t width = 0;
  bool header_pending = schema.header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.empty()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": no columns");
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(width) + " columns, got " +
                                             std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(width);
    for (const auto& f : fields) row.push_back(parse_number(f, line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyData, path + " has no data rows");
  Dataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(width - 1);
  data.X.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.X(i, j) = rows[i][j];
    data.y(i) = rows[i][d];
  }
  return schema.normalize ? normalize(data) : data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ostringstream out;
  out.precision(17);
  for (int j = 0; j < data.dim(); ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  const Eigen::VectorXd y = raw_targets(data);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.dim(); ++j) out << data.X(i, j) << ',';
    out << y(i) << '\n';
  }
  write_file_atomic(path, out.str());
}

Eigen::VectorXd raw_targets(const Dataset& data) {
  return (data.y.array() * data.normalization.y_sd + data.normalization.y_mean).matrix();
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed) {
  data.validate();
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorCode::InvalidArgument, "fraction must be in (0, 1)");
  const Eigen::Index n = data.n();
  const auto n_train = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) throw Error(ErrorCode::EmptyData, "split leaves an empty part");

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  CounterRng rng(seed, 0x59);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[i], order[j]);
  }
  const Eigen::VectorXd y = raw_targets(data);
  auto take = [&](Eigen::Index begin, Eigen::Index end) {
    Dataset part;
    part.X.resize(end - begin, data.dim());
    part.y.resize(end - begin);
    for (Eigen::Index r = begin; r < end; ++r) {
      part.X.row(r - begin) = data.X.row(order[r]);
      part.y(r - begin) = y(order[r]);
    }
    part.normalization.x_mean = data.normalization.x_mean;
    part.normalization.x_sd = data.normalization.x_sd;
    return part;
  };
  Dataset train = normalize(take(0, n_train));
  Dataset test = take(n_train, n);
  test.normalization.y_mean = train.normalization.y_mean;
  test.normalization.y_sd = train.normalization.y_sd;
  test.y = (test.y.array() - train.normalization.y_mean) / train.normalization.y_sd;
  train.normalization.x_mean = data.normalization.x_mean;
  train.normalization.x_sd = data.normalization.x_sd;
  return {std::move(train), std::move(test)};
}

}  // namespace tqff
