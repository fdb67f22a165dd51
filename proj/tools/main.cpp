// tqff: quadrature rules, kernel-approximation sweeps and feature-space GP regression.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tqff/datasets.hpp"
#include "tqff/error.hpp"
#include "tqff/experiments.hpp"
#include "tqff/feature_map.hpp"
#include "tqff/gp.hpp"
#include "tqff/oracle.hpp"
#include "tqff/quadrature.hpp"
#include "tqff/report.hpp"
#include "tqff/serialize.hpp"
#include "tqff/spectral.hpp"

namespace {

using namespace tqff;

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

int exit_code_for(ErrorCode code) { return is_numerical(code) ? kNumericalError : kConfigError; }

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw Error(ErrorCode::InvalidArgument, std::string("bad ") + what + " '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " list is empty");
  return out;
}

KernelSpec kernel_from_flags(const std::string& family, std::vector<double> lengthscales, double gamma) {
  KernelSpec spec;
  spec.family = kernel_family_from_string(family);
  spec.hyper.lengthscales = std::move(lengthscales);
  spec.gamma = gamma;
  spec.validate();
  return spec;
}

struct RuleArgs {
  std::string kernel = "se";
  std::string method = "tqff";
  int L = 10;
  double gamma = 1.15;
  int dim = 1;
  std::string out;
};

int cmd_rule(const RuleArgs& a) {
  const FeatureMethod method = feature_method_from_string(a.method);
  if (method == FeatureMethod::RFF) throw Error(ErrorCode::InvalidArgument, "rule needs tqff, glff or ghff");
  const KernelSpec spec = kernel_from_flags(a.kernel, std::vector<double>(a.dim, 1.0), a.gamma);
  const RuleDocument doc = rule_document(build_feature_map(method, spec, a.L));
  write_file_atomic(a.out, to_json(doc));
  std::cout << "wrote " << doc.nodes.rows() << " frequencies (" << 2 * doc.nodes.rows() << " features) to " << a.out
            << "\n";
  return 0;
}

struct VerifyArgs {
  std::string rule;
  std::string kernel = "se";
  double gamma = 1.15;
  int max_degree = -1;
  std::string out;
};

int cmd_verify(const VerifyArgs& a) {
  const RuleDocument doc = rule_document_from_json(read_text_file(a.rule));
  const KernelSpec spec = kernel_from_flags(a.kernel, std::vector<double>(doc.dim, 1.0), a.gamma);
  const int max_degree = a.max_degree >= 0 ? a.max_degree : doc.exactness_degree + 1;
  Certificate cert;
  if (doc.kind == RuleKind::Trig) {
    cert = exactness_certificate(to_tensor_rule(doc), *standardized_density(spec).density, a.gamma, max_degree);
  } else {
    cert = exactness_certificate(to_feature_map(doc, spec), max_degree);
  }
  CsvTable t({"k", "quad", "oracle", "abs_err", "pass"});
  for (const auto& r : cert.rows) {
    std::string k;
    for (std::size_t i = 0; i < r.k.size(); ++i) k += (i ? "," : "") + std::to_string(r.k[i]);
    if (r.k.size() > 1) k = "\"" + k + "\"";
    t.add_row({k, format_double(r.quad), format_double(r.oracle), format_double(r.abs_err), r.pass ? "1" : "0"});
  }
  write_file_atomic(a.out, t.render());
  std::cout << (cert.passed ? "PASS" : "FAIL") << " claimed degree " << cert.claimed_degree;
  if (cert.first_failure >= 0) std::cout << ", first failing |k|_inf = " << cert.first_failure;
  std::cout << "\n";
  return 0;
}

struct SweepArgs {
  std::string methods = "tqff,glff,ghff,rff";
  std::string lengthscale = "0.05";
  std::string s_grid = "10,20,30,40,50,60,80,100,150,200";
  int tau_grid_n = 100;
  std::string seeds = "1,2,3,4,5";
  double gamma = 1.15;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  SweepConfig sc;
  for (const auto& m : parse_list<std::string>(a.methods, "method")) sc.methods.push_back(feature_method_from_string(m));
  sc.spec = kernel_from_flags("se", parse_list<double>(a.lengthscale, "lengthscale"), a.gamma);
  sc.feature_counts = parse_list<int>(a.s_grid, "S");
  if (a.tau_grid_n < 1) throw Error(ErrorCode::InvalidArgument, "--tau-grid-n must be positive");
  sc.taus = linspace(0.0, 1.0, a.tau_grid_n);
  sc.seeds = parse_list<std::uint64_t>(a.seeds, "seed");
  const auto cells = approx_error_sweep(sc);
  CsvTable t({"method", "S", "tau", "abs_error"});
  for (const auto& c : cells) {
    for (std::size_t i = 0; i < sc.taus.size(); ++i) {
      t.add_row({to_string(c.method), std::to_string(c.S), format_double(sc.taus[i]), format_double(c.abs_errors[i])});
    }
    std::cout << to_string(c.method) << " S=" << c.S << " (" << 2 * c.S << " features) mean=" << c.mean_error
              << " max=" << c.max_error << "\n";
  }
  write_file_atomic(a.out, t.render());
  return 0;
}

struct FitArgs {
  std::string data;
  std::string method = "tqff";
  int features = 70;
  double gamma = 1.15;
  int iters = 1000;
  double lr = 0.01;
  std::uint64_t seed = 0;
  double init_lengthscale = 0.0;
  std::string out;
};

int cmd_fit(const FitArgs& a) {
  auto data = std::make_shared<const Dataset>(ingest_csv(a.data));
  const FeatureMethod method = feature_method_from_string(a.method);
  Hyperparams init = default_init(*data);
  if (a.init_lengthscale > 0.0) init.lengthscales.assign(data->dim(), a.init_lengthscale);
  KernelSpec spec;
  spec.hyper = init;
  spec.gamma = a.gamma;
  spec.validate();
  std::optional<std::uint64_t> seed;
  if (method == FeatureMethod::RFF) seed = a.seed;
  const FeatureMap map =
      build_feature_map(method, spec, size_for_frequency_count(method, a.features, data->dim()), seed);
  OptConfig opt;
  opt.lr = a.lr;
  opt.iters = a.iters;
  opt.seed = a.seed;
  opt.init = init;
  const GPModel model = ff_fit(map, data, opt);
  write_file_atomic(a.out, to_json(model));
  std::cout << "S=" << map.num_frequencies() << " (" << map.feature_dim() << " features), final nll "
            << model.loss_history.back() << ", lengthscales";
  for (double l : model.hyper().lengthscales) std::cout << ' ' << l;
  std::cout << ", scale " << model.hyper().scale << ", noise " << model.hyper().noise << "\n";
  return 0;
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
};

int cmd_predict(const PredictArgs& a) {
  const GPModel model = model_from_json(read_text_file(a.model));
  const Dataset test = ingest_csv(a.data, CsvSchema{true, false});
  const int d = model.map.dim();
  Eigen::MatrixXd X;
  bool has_targets = false;
  if (test.dim() + 1 == d) {
    X.resize(test.n(), d);
    X << test.X, test.y;
  } else if (test.dim() == d) {
    X = test.X;
    has_targets = true;
  } else {
    throw Error(ErrorCode::DimensionMismatch, "test data has " + std::to_string(test.dim() + 1) +
                                                  " columns, model expects " + std::to_string(d) + " inputs");
  }
  const PredictiveDistribution pred =
      denormalize(ff_predict(model, normalize_inputs(model.normalization, X)), model.normalization);
  CsvTable t({"index", "mean", "sd_obs", "sd_latent"});
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    t.add_row({std::to_string(i), format_double(pred.means(i)), format_double(std::sqrt(pred.variances(i))),
               format_double(std::sqrt(std::max(0.0, pred.latent_variances(i))))});
  }
  write_file_atomic(a.out, t.render());
  if (has_targets) {
    const Metrics m = metrics(pred, test.y);
    std::cout << "rmse " << m.rmse << " nll " << m.nll << "\n";
  }
  return 0;
}

struct DatagenArgs {
  std::string which = "toy";
  Eigen::Index n = 1000;
  std::uint64_t seed = 0;
  double theta = 0.05;
  std::string out;
};

int cmd_datagen(const DatagenArgs& a) {
  Dataset data;
  if (a.which == "toy") {
    data = gen_toy(a.n, a.seed);
  } else if (a.which == "schaffer") {
    data = gen_schaffer(a.n, a.seed);
  } else if (a.which == "gp2d") {
    data = gen_gp2d(a.n, a.theta, a.seed);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown generator '" + a.which + "'");
  }
  write_dataset_csv(a.out, data);
  std::cout << "wrote " << data.n() << " rows to " << a.out << "\n";
  return 0;
}

struct BenchArgs {
  std::string config;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  ExperimentConfig config = config_from_json(read_text_file(a.config));
  if (!a.out.empty()) config.output_dir = a.out;
  const ReportBundle bundle = run_experiment(config);
  write_bundle(bundle, config.output_dir);
  std::cout << bundle.experiment << " config_hash=" << bundle.config_hash << " -> " << config.output_dir << "\n";
  if (bundle.failed) {
    std::cerr << "error: " << bundle.failure << "\n";
    return bundle.failure_code ? exit_code_for(*bundle.failure_code) : kNumericalError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier-feature Gaussian-process regression with trigonometric quadrature"};
  app.require_subcommand(1);

  RuleArgs rule;
  auto* r = app.add_subcommand("rule", "construct a quadrature rule and write it as JSON");
  r->add_option("--kernel", rule.kernel, "kernel family")->capture_default_str();
  r->add_option("--method", rule.method, "tqff | glff | ghff")->capture_default_str();
  r->add_option("--L", rule.L, "nodes per dimension")->capture_default_str();
  r->add_option("--gamma", rule.gamma, "truncation parameter")->capture_default_str();
  r->add_option("--dim", rule.dim, "input dimension")->capture_default_str();
  r->add_option("--out", rule.out, "output JSON")->required();

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "certify a rule's exactness against the reference integrator");
  v->add_option("--rule", verify.rule, "rule JSON")->required();
  v->add_option("--kernel", verify.kernel, "kernel family")->capture_default_str();
  v->add_option("--gamma", verify.gamma, "truncation parameter")->capture_default_str();
  v->add_option("--max-degree", verify.max_degree, "largest frequency checked (default: exactness degree + 1)");
  v->add_option("--out", verify.out, "certificate CSV")->required();

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "kernel approximation error over tau in [0, 1]");
  s->add_option("--methods", sweep.methods, "comma-separated methods")->capture_default_str();
  s->add_option("--lengthscale", sweep.lengthscale, "lengthscale, or one per dimension")->capture_default_str();
  s->add_option("--s-grid", sweep.s_grid, "frequency counts S")->capture_default_str();
  s->add_option("--tau-grid-n", sweep.tau_grid_n, "tau grid points")->capture_default_str();
  s->add_option("--seeds", sweep.seeds, "RFF seeds")->capture_default_str();
  s->add_option("--gamma", sweep.gamma, "truncation parameter")->capture_default_str();
  s->add_option("--out", sweep.out, "errors CSV")->required();

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "train a feature-space GP");
  f->add_option("--data", fit.data, "training CSV")->required();
  f->add_option("--method", fit.method, "tqff | glff | ghff | rff")->capture_default_str();
  f->add_option("--features", fit.features, "frequency count S (feature vector length 2S)")->capture_default_str();
  f->add_option("--gamma", fit.gamma, "truncation parameter")->capture_default_str();
  f->add_option("--iters", fit.iters, "Adam iterations")->capture_default_str();
  f->add_option("--lr", fit.lr, "Adam learning rate")->capture_default_str();
  f->add_option("--seed", fit.seed, "seed (RFF frequencies)")->capture_default_str();
  f->add_option("--init-lengthscale", fit.init_lengthscale, "initial lengthscale (default: half the input range)");
  f->add_option("--out", fit.out, "model JSON")->required();

  PredictArgs predict;
  auto* p = app.add_subcommand("predict", "predict with a trained model");
  p->add_option("--model", predict.model, "model JSON")->required();
  p->add_option("--data", predict.data, "test CSV (inputs, optionally followed by targets)")->required();
  p->add_option("--out", predict.out, "prediction CSV")->required();

  DatagenArgs datagen;
  auto* g = app.add_subcommand("datagen", "generate a synthetic dataset");
  g->add_option("--which", datagen.which, "toy | schaffer | gp2d")->capture_default_str();
  g->add_option("--n", datagen.n, "number of points")->capture_default_str();
  g->add_option("--seed", datagen.seed, "seed")->capture_default_str();
  g->add_option("--theta", datagen.theta, "gp2d lengthscale")->capture_default_str();
  g->add_option("--out", datagen.out, "output CSV")->required();

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "run an experiment suite from a JSON config");
  b->add_option("--config", bench.config, "experiment config JSON")->required();
  b->add_option("--out", bench.out, "output directory (overrides output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*r) return cmd_rule(rule);
    if (*v) return cmd_verify(verify);
    if (*s) return cmd_sweep(sweep);
    if (*f) return cmd_fit(fit);
    if (*p) return cmd_predict(predict);
    if (*g) return cmd_datagen(datagen);
    if (*b) return cmd_bench(bench);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return 0;
}
