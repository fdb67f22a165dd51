#include "tqff/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "tqff/datasets.hpp"
#include "tqff/error.hpp"
#include "tqff/rng.hpp"

namespace tqff {

using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kKindNames[] = {"ToyExample",  "KernelSweep",        "GammaSweep",
                                      "Synthetic2D", "HoldoutUncertainty", "Benchmark"};

std::string fmt(double v) { return format_double(v); }

KernelSpec make_spec(std::vector<double> lengthscales, double scale, double noise, double gamma) {
  KernelSpec spec;
  spec.hyper.lengthscales = std::move(lengthscales);
  spec.hyper.scale = scale;
  spec.hyper.noise = noise;
  spec.gamma = gamma;
  spec.validate();
  return spec;
}

Dataset take_rows(const Dataset& data, Eigen::Index begin, Eigen::Index end) {
  Dataset out;
  out.X = data.X.middleRows(begin, end - begin);
  out.y = data.y.segment(begin, end - begin);
  out.normalization = data.normalization;
  return out;
}

// Normalizes train and maps test onto the same constants.
std::pair<Dataset, Dataset> normalize_pair(const Dataset& train_raw, const Dataset& test_raw) {
  Dataset train = normalize(train_raw);
  Dataset test = test_raw;
  test.normalization = train.normalization;
  test.y = (test_raw.y.array() - train.normalization.y_mean) / train.normalization.y_sd;
  return {std::move(train), std::move(test)};
}

std::optional<std::uint64_t> map_seed(FeatureMethod method, std::uint64_t seed) {
  if (method == FeatureMethod::RFF) return seed;
  return std::nullopt;
}

}  // namespace

const char* to_string(ExperimentKind kind) noexcept { return kKindNames[static_cast<int>(kind)]; }

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (int i = 0; i < 6; ++i) {
    if (name == kKindNames[i]) return static_cast<ExperimentKind>(i);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown experiment '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "methods must be nonempty");
  if (sizes.empty()) throw Error(ErrorCode::InvalidArgument, "sizes must be nonempty");
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "seeds must be nonempty");
  for (int s : sizes) {
    if (s < 1) throw Error(ErrorCode::InvalidArgument, "sizes must be positive");
  }
  for (double l : lengthscales) {
    if (!(l > 0.0)) throw Error(ErrorCode::InvalidArgument, "lengthscales must be positive");
  }
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  if (tau_grid_n < 1) throw Error(ErrorCode::InvalidArgument, "tau_grid_n must be positive");
  if (opt.iters < 0 || !(opt.lr > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad optimizer settings");
  if (full_gp_iters < 0 || !(full_gp_lr > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad full-GP optimizer settings");
  if (data.source == "csv" && data.path.empty()) throw Error(ErrorCode::InvalidArgument, "csv source needs a path");
  if (data.source != "toy" && data.source != "schaffer" && data.source != "gp2d" && data.source != "csv") {
    throw Error(ErrorCode::InvalidArgument, "unknown data source '" + data.source + "'");
  }
  if ((experiment == ExperimentKind::KernelSweep || experiment == ExperimentKind::GammaSweep) &&
      lengthscales.empty()) {
    throw Error(ErrorCode::InvalidArgument, "kernel sweeps need at least one lengthscale");
  }
}

ExperimentConfig config_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
    static const std::set<std::string> known{
        "experiment", "methods", "sizes", "seeds", "lengthscales", "gamma", "gammas",
        "scale", "tau_grid_n", "thresholds", "data", "opt", "method_sizes", "full_gp_iters", "full_gp_lr",
        "split_fraction", "segments", "holdout_fraction", "plots", "output_dir"};
    for (const auto& [key, value] : j.items()) {
      if (!known.contains(key)) throw Error(ErrorCode::ParseError, "config: unknown field '" + key + "'");
    }
    ExperimentConfig c;
    c.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
    if (c.experiment == ExperimentKind::Synthetic2D) {
      c.data.source = "gp2d";
      c.data.n = 4000;
    }
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(feature_method_from_string(m.get<std::string>()));
    }
    c.sizes = j.value("sizes", c.sizes);
    c.seeds = j.value("seeds", c.seeds);
    c.lengthscales = j.value("lengthscales", c.lengthscales);
    c.gamma = j.value("gamma", c.gamma);
    c.gammas = j.value("gammas", c.gammas);
    c.scale = j.value("scale", c.scale);
    c.tau_grid_n = j.value("tau_grid_n", c.tau_grid_n);
    c.thresholds = j.value("thresholds", c.thresholds);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      c.data.source = d.value("source", c.data.source);
      c.data.path = d.value("path", c.data.path);
      c.data.n = d.value("n", c.data.n);
      c.data.n_test = d.value("n_test", c.data.n_test);
      c.data.theta = d.value("theta", c.data.theta);
      c.data.noise = d.value("noise", c.data.noise);
    }
    if (j.contains("opt")) {
      const auto& o = j.at("opt");
      c.opt.lr = o.value("lr", c.opt.lr);
      c.opt.iters = o.value("iters", c.opt.iters);
      c.opt.beta1 = o.value("beta1", c.opt.beta1);
      c.opt.beta2 = o.value("beta2", c.opt.beta2);
      c.opt.eps = o.value("eps", c.opt.eps);
    }
    if (j.contains("method_sizes")) {
      for (const auto& [k, v] : j.at("method_sizes").items()) c.method_sizes[feature_method_from_string(k)] = v.get<int>();
    }
    c.full_gp_iters = j.value("full_gp_iters", c.full_gp_iters);
    c.full_gp_lr = j.value("full_gp_lr", c.full_gp_lr);
    c.split_fraction = j.value("split_fraction", c.split_fraction);
    c.segments = j.value("segments", c.segments);
    c.holdout_fraction = j.value("holdout_fraction", c.holdout_fraction);
    c.plots = j.value("plots", c.plots);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
}

std::string to_json(const ExperimentConfig& c) {
  ojson j;
  j["experiment"] = to_string(c.experiment);
  j["methods"] = ojson::array();
  for (auto m : c.methods) j["methods"].push_back(to_string(m));
  j["sizes"] = c.sizes;
  j["seeds"] = c.seeds;
  j["lengthscales"] = c.lengthscales;
  j["gamma"] = c.gamma;
  j["gammas"] = c.gammas;
  j["scale"] = c.scale;
  j["tau_grid_n"] = c.tau_grid_n;
  j["thresholds"] = c.thresholds;
  j["data"] = {{"source", c.data.source}, {"path", c.data.path}, {"n", c.data.n},
               {"n_test", c.data.n_test}, {"theta", c.data.theta}, {"noise", c.data.noise}};
  j["opt"] = {{"lr", c.opt.lr}, {"iters", c.opt.iters}, {"beta1", c.opt.beta1}, {"beta2", c.opt.beta2},
              {"eps", c.opt.eps}};
  j["method_sizes"] = ojson::object();
  for (const auto& [m, s] : c.method_sizes) j["method_sizes"][to_string(m)] = s;
  j["full_gp_iters"] = c.full_gp_iters;
  j["full_gp_lr"] = c.full_gp_lr;
  j["split_fraction"] = c.split_fraction;
  j["segments"] = c.segments;
  j["holdout_fraction"] = c.holdout_fraction;
  j["plots"] = c.plots;
  j["output_dir"] = c.output_dir;
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.output_dir.clear();
  return hex64(fnv1a64(to_json(c)));
}

// ---------------------------------------------------------------------------
// Kernel-approximation suites

std::vector<KernelSweepResult> run_kernel_sweep(const ExperimentConfig& config) {
  std::vector<KernelSweepResult> out;
  const auto taus = linspace(0.0, 1.0, config.tau_grid_n);
  for (double theta : config.lengthscales) {
    SweepConfig sc;
    sc.methods = config.methods;
    sc.spec = make_spec({theta}, config.scale, 0.01, config.gamma);
    sc.feature_counts = config.sizes;
    sc.taus = taus;
    sc.seeds = config.seeds;
    out.push_back(KernelSweepResult{theta, approx_error_sweep(sc), taus});
  }
  return out;
}

int first_crossing(const std::vector<SweepCell>& cells, FeatureMethod method, double threshold) {
  int best = -1;
  for (const auto& c : cells) {
    if (c.method == method && c.mean_error <= threshold && (best < 0 || c.S < best)) best = c.S;
  }
  return best;
}

std::vector<GammaSweepRow> run_gamma_sweep(const ExperimentConfig& config) {
  std::vector<GammaSweepRow> rows;
  const double theta = config.lengthscales.front();
  const auto taus = linspace(0.0, 1.0, config.tau_grid_n);
  for (double gamma : config.gammas) {
    SweepConfig sc;
    sc.methods = {FeatureMethod::TQFF};
    sc.spec = make_spec({theta}, config.scale, 0.01, gamma);
    sc.feature_counts = config.sizes;
    sc.taus = taus;
    const double tail = truncation_tail(sc.spec);
    for (const auto& cell : approx_error_sweep(sc)) {
      rows.push_back(GammaSweepRow{gamma, cell.S, cell.mean_error, cell.max_error, tail});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Regression suites

Hyperparams fit_shared_hyperparameters(const Dataset& train, const ExperimentConfig& config) {
  const auto it = config.method_sizes.find(FeatureMethod::TQFF);
  const int S = it == config.method_sizes.end() ? 70 : it->second;
  const Hyperparams init = default_init(train);
  const KernelSpec spec = make_spec(init.lengthscales, init.scale, init.noise, config.gamma);
  const FeatureMap map = build_feature_map(FeatureMethod::TQFF, spec, size_for_frequency_count(FeatureMethod::TQFF, S, train.dim()));
  OptConfig opt = config.opt;
  opt.init = init;
  auto data = std::make_shared<const Dataset>(train);
  Hyperparams h = ff_fit(map, data, opt).hyper();
  if (config.full_gp_iters > 0 && train.n() <= FullGpOptions{}.cap) {
    OptConfig full = config.opt;
    full.iters = config.full_gp_iters;
    full.lr = config.full_gp_lr;
    full.init = h;
    h = full_gp_fit(spec, train, full);
  }
  return h;
}

ToyResult run_toy_example(const ExperimentConfig& config) {
  ToyResult r;
  r.train = gen_toy(config.data.n, config.seeds.front());
  const auto grid = linspace(-1.0, 1.0, static_cast<int>(config.data.n_test));
  r.test_x = Eigen::Map<const Eigen::VectorXd>(grid.data(), static_cast<Eigen::Index>(grid.size()));
  r.hyper = fit_shared_hyperparameters(r.train, config);
  KernelSpec spec = make_spec(r.hyper.lengthscales, r.hyper.scale, r.hyper.noise, config.gamma);
  r.full = full_gp_predict(spec, r.train, r.test_x);
  for (FeatureMethod m : config.methods) {
    const auto it = config.method_sizes.find(m);
    const int S = it == config.method_sizes.end() ? config.sizes.front() : it->second;
    const FeatureMap map =
        build_feature_map(m, spec, size_for_frequency_count(m, S, 1), map_seed(m, config.seeds.front()));
    const FfCache cache = ff_cache(map, r.train.X, r.train.y);
    r.approx.push_back(MethodPrediction{m, S, ff_predict(map, cache, r.test_x)});
  }
  return r;
}

GPModel fit_multistart(FeatureMethod method, int S, std::shared_ptr<const Dataset> train,
                       const ExperimentConfig& config, std::uint64_t seed) {
  const Hyperparams base = default_init(*train);
  std::vector<Hyperparams> starts;
  if (config.lengthscales.empty()) {
    starts.push_back(base);
  } else {
    for (double l : config.lengthscales) {
      Hyperparams h = base;
      h.lengthscales.assign(train->dim(), l);
      starts.push_back(h);
    }
  }
  const KernelSpec spec = make_spec(base.lengthscales, base.scale, base.noise, config.gamma);
  const FeatureMap map = build_feature_map(method, spec, size_for_frequency_count(method, S, train->dim()),
                                           map_seed(method, seed));
  std::optional<GPModel> best;
  for (const auto& h : starts) {
    OptConfig opt = config.opt;
    opt.init = h;
    opt.seed = seed;
    GPModel m = ff_fit(map, train, opt);
    if (!best || m.loss_history.back() < best->loss_history.back()) best = std::move(m);
  }
  return std::move(*best);
}

namespace {

std::vector<FitRow> fit_grid(const ExperimentConfig& config,
                             const std::function<std::pair<Dataset, Dataset>(std::uint64_t)>& make_data) {
  struct Cell {
    std::size_t seed_index;
    FeatureMethod method;
    int S;
  };
  std::vector<std::pair<std::shared_ptr<const Dataset>, Dataset>> data;
  for (auto seed : config.seeds) {
    auto [train, test] = make_data(seed);
    data.emplace_back(std::make_shared<const Dataset>(std::move(train)), std::move(test));
  }
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < config.seeds.size(); ++s) {
    for (auto m : config.methods) {
      for (int S : config.sizes) cells.push_back(Cell{s, m, S});
    }
  }
  std::vector<FitRow> rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const Cell& c = cells[i];
    const auto& [train, test] = data[c.seed_index];
    const std::uint64_t seed = config.seeds[c.seed_index];
    const GPModel model = fit_multistart(c.method, c.S, train, config, seed);
    const PredictiveDistribution pred = denormalize(ff_predict(model, test.X), train->normalization);
    const Metrics met = metrics(pred, raw_targets(test));
    rows[i] = FitRow{seed, c.method, c.S, met.rmse, met.nll, -model.loss_history.back(), model.hyper()};
  });
  return rows;
}

}  // namespace

std::vector<FitRow> run_synthetic2d(const ExperimentConfig& config) {
  return fit_grid(config, [&](std::uint64_t seed) {
    Gp2dOptions o;
    o.noise = config.data.noise;
    o.scale = config.scale;
    const Dataset all = gen_gp2d(config.data.n + config.data.n_test, config.data.theta, seed, o);
    return normalize_pair(take_rows(all, 0, config.data.n), take_rows(all, config.data.n, all.n()));
  });
}

namespace {

Dataset load_source(const ExperimentConfig& config, std::uint64_t seed, Eigen::Index n) {
  const auto& src = config.data;
  if (src.source == "csv") return ingest_csv(src.path, CsvSchema{true, false});
  if (src.source == "schaffer") return gen_schaffer(n, seed);
  if (src.source == "gp2d") {
    Gp2dOptions o;
    o.noise = src.noise;
    o.scale = config.scale;
    return gen_gp2d(n, src.theta, seed, o);
  }
  Dataset toy = gen_toy(n, seed);
  toy.y = raw_targets(toy);
  toy.normalization = Normalization{};
  return toy;
}

}  // namespace

std::vector<FitRow> run_benchmark(const ExperimentConfig& config) {
  return fit_grid(config, [&](std::uint64_t seed) {
    const Dataset all = load_source(config, seed, config.data.n);
    return split(all, config.split_fraction, seed);
  });
}

std::pair<Dataset, Dataset> remove_segments(const Dataset& series, int segments, double fraction,
                                            std::uint64_t seed) {
  series.validate();
  if (segments < 1 || !(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "need segments >= 1 and 0 < fraction < 1");
  }
  const Eigen::Index n = series.n();
  const Eigen::Index block = n / segments;
  const auto len = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n) / segments));
  if (len < 1 || len >= block) throw Error(ErrorCode::InvalidArgument, "series too short for the segments");

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return series.X(a, 0) < series.X(b, 0); });
  std::vector<char> removed(n, 0);
  CounterRng rng(seed, 0x5e);
  for (int s = 0; s < segments; ++s) {
    const auto offset = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(block - len + 1)));
    for (Eigen::Index i = 0; i < len; ++i) removed[s * block + offset + i] = 1;
  }
  std::vector<Eigen::Index> kept_idx, removed_idx;
  for (Eigen::Index r = 0; r < n; ++r) (removed[r] ? removed_idx : kept_idx).push_back(order[r]);
  auto gather = [&](const std::vector<Eigen::Index>& idx) {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(idx.size()), series.dim());
    out.y.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out.X.row(static_cast<Eigen::Index>(i)) = series.X.row(idx[i]);
      out.y(static_cast<Eigen::Index>(i)) = series.y(idx[i]);
    }
    out.normalization = series.normalization;
    return out;
  };
  return {gather(kept_idx), gather(removed_idx)};
}

std::vector<HoldoutRow> run_holdout_uncertainty(const ExperimentConfig& config) {
  std::vector<HoldoutRow> rows;
  for (auto seed : config.seeds) {
    const Dataset series = config.data.source == "csv" ? ingest_csv(config.data.path) : gen_toy(config.data.n, seed);
    auto [train, test] = remove_segments(series, config.segments, config.holdout_fraction, seed);
    const Hyperparams h = fit_shared_hyperparameters(train, config);
    const KernelSpec spec = make_spec(h.lengthscales, h.scale, h.noise, config.gamma);
    const PredictiveDistribution full = full_gp_predict(spec, train, test.X);
    for (auto m : config.methods) {
      for (int S : config.sizes) {
        const FeatureMap map =
            build_feature_map(m, spec, size_for_frequency_count(m, S, train.dim()), map_seed(m, seed));
        const PredictiveDistribution approx = ff_predict(map, ff_cache(map, train.X, train.y), test.X);
        rows.push_back(HoldoutRow{seed, m, S, test.X.col(0), kl_gaussian(full, approx)});
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Report assembly

namespace {

void add_figure(ReportBundle& b, const std::string& name, PlotSpec plot, const std::string& title, bool logx,
                bool logy) {
  plot.title = title;
  plot.logx = logx;
  plot.logy = logy;
  b.figures[name] = render_svg(plot);
  b.plot_data[name] = render_plot_data(plot);
}

void report_kernel_sweep(const ExperimentConfig& config, ReportBundle& b) {
  CsvTable summary({"theta", "method", "S", "feature_dim", "mean_error", "max_error"});
  CsvTable raw({"theta", "method", "S", "tau", "abs_error"});
  CsvTable crossings({"theta", "method", "threshold", "first_S"});
  for (const auto& res : run_kernel_sweep(config)) {
    for (const auto& c : res.cells) {
      summary.add_row({fmt(res.theta), to_string(c.method), std::to_string(c.S), std::to_string(2 * c.S),
                       fmt(c.mean_error), fmt(c.max_error)});
      for (std::size_t t = 0; t < res.taus.size(); ++t) {
        raw.add_row({fmt(res.theta), to_string(c.method), std::to_string(c.S), fmt(res.taus[t]), fmt(c.abs_errors[t])});
      }
    }
    for (auto m : config.methods) {
      for (double thr : config.thresholds) {
        const int s = first_crossing(res.cells, m, thr);
        crossings.add_row({fmt(res.theta), to_string(m), fmt(thr), s < 0 ? "" : std::to_string(s)});
      }
    }
  }
  b.tables["kernel_sweep"] = summary;
  b.tables["kernel_errors"] = raw;
  b.tables["crossings"] = crossings;
  if (config.plots) {
    for (double theta : config.lengthscales) {
      const std::string key = fmt(theta);
      auto plot = plot_from_table(summary, "S", "mean_error", "method",
                                  [&](const std::vector<std::string>& r) { return r[0] == key; });
      add_figure(b, "kernel_sweep_theta_" + key, plot, "mean |k - approx|, theta = " + key, false, true);
    }
  }
}

void report_gamma_sweep(const ExperimentConfig& config, ReportBundle& b) {
  CsvTable t({"gamma", "L", "mean_error", "max_error", "truncation_tail"});
  for (const auto& r : run_gamma_sweep(config)) {
    t.add_row({fmt(r.gamma), std::to_string(r.L), fmt(r.mean_error), fmt(r.max_error), fmt(r.tail)});
  }
  b.tables["gamma_sweep"] = t;
  if (config.plots) add_figure(b, "gamma_sweep", plot_from_table(t, "L", "max_error", "gamma"), "max error vs L", false, true);
}

void report_toy(const ExperimentConfig& config, ReportBundle& b) {
  const ToyResult r = run_toy_example(config);
  CsvTable preds({"method", "S", "x", "mean", "sd_obs", "sd_latent"});
  auto emit = [&](const std::string& name, int S, const PredictiveDistribution& p) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      preds.add_row({name, std::to_string(S), fmt(r.test_x(i, 0)), fmt(p.means(i)), fmt(std::sqrt(p.variances(i))),
                     fmt(std::sqrt(std::max(0.0, p.latent_variances(i))))});
    }
  };
  emit("full", 0, r.full);
  for (const auto& a : r.approx) emit(to_string(a.method), a.S, a.pred);

  CsvTable summary({"method", "S", "max_abs_mean_diff", "mean_kl", "max_kl", "min_latent_sd_ratio_x_lt_0"});
  for (const auto& a : r.approx) {
    const Eigen::VectorXd kl = kl_gaussian(r.full, a.pred);
    double min_ratio = INFINITY;
    for (Eigen::Index i = 0; i < r.test_x.rows(); ++i) {
      if (r.test_x(i, 0) >= 0.0) continue;
      min_ratio = std::min(min_ratio, std::sqrt(std::max(0.0, a.pred.latent_variances(i)) /
                                                r.full.latent_variances(i)));
    }
    summary.add_row({to_string(a.method), std::to_string(a.S),
                     fmt((a.pred.means - r.full.means).cwiseAbs().maxCoeff()), fmt(kl.mean()), fmt(kl.maxCoeff()),
                     fmt(min_ratio)});
  }

  CsvTable kern({"method", "S", "tau", "k_exact", "k_approx"});
  const KernelSpec spec = make_spec(r.hyper.lengthscales, r.hyper.scale, r.hyper.noise, config.gamma);
  const auto taus = linspace(-1.0, 1.0, 401);
  for (const auto& a : r.approx) {
    const FeatureMap map = build_feature_map(a.method, spec, size_for_frequency_count(a.method, a.S, 1),
                                             map_seed(a.method, config.seeds.front()));
    for (double t : taus) {
      const double tau[1] = {t};
      kern.add_row({to_string(a.method), std::to_string(a.S), fmt(t), fmt(kernel_eval(spec, tau)), fmt(approx_kernel(map, tau))});
    }
  }
  CsvTable hyper({"lengthscale", "scale", "noise"});
  hyper.add_row({fmt(r.hyper.lengthscales[0]), fmt(r.hyper.scale), fmt(r.hyper.noise)});

  b.tables["toy_predictions"] = preds;
  b.tables["toy_summary"] = summary;
  b.tables["toy_kernel"] = kern;
  b.tables["toy_hyper"] = hyper;
  if (config.plots) {
    add_figure(b, "toy_predictions", plot_from_table(preds, "x", "mean", "method"), "predictive mean", false, false);
    add_figure(b, "toy_sd", plot_from_table(preds, "x", "sd_latent", "method"), "latent sd", false, false);
    add_figure(b, "toy_kernel", plot_from_table(kern, "tau", "k_approx", "method"), "kernel approximation", false, false);
  }
}

void report_fits(const ExperimentConfig& config, ReportBundle& b, const std::vector<FitRow>& rows,
                 const std::string& prefix) {
  std::vector<std::string> cols{"seed", "method", "S", "feature_dim", "nll", "rmse", "train_loglik"};
  const int d = rows.empty() ? 0 : rows.front().hyper.dim();
  for (int j = 0; j < d; ++j) cols.push_back("lengthscale_" + std::to_string(j + 1));
  cols.insert(cols.end(), {"scale", "noise"});
  CsvTable fits(cols);
  for (const auto& r : rows) {
    std::vector<std::string> row{std::to_string(r.seed), to_string(r.method), std::to_string(r.S),
                                 std::to_string(2 * r.S), fmt(r.nll), fmt(r.rmse), fmt(r.train_loglik)};
    for (double l : r.hyper.lengthscales) row.push_back(fmt(l));
    row.push_back(fmt(r.hyper.scale));
    row.push_back(fmt(r.hyper.noise));
    fits.add_row(std::move(row));
  }
  CsvTable summary({"method", "S", "mean_nll", "sd_nll", "mean_rmse", "sd_rmse"});
  for (auto m : config.methods) {
    for (int S : config.sizes) {
      std::vector<double> nll, rmse;
      for (const auto& r : rows) {
        if (r.method == m && r.S == S) nll.push_back(r.nll), rmse.push_back(r.rmse);
      }
      if (nll.empty()) continue;
      auto mean_sd = [](const std::vector<double>& v) {
        const double mu = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mu) * (x - mu);
        return std::pair{mu, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
      };
      const auto [mn, sn] = mean_sd(nll);
      const auto [mr, sr] = mean_sd(rmse);
      summary.add_row({to_string(m), std::to_string(S), fmt(mn), fmt(sn), fmt(mr), fmt(sr)});
    }
  }
  b.tables[prefix + "_fits"] = fits;
  b.tables[prefix + "_summary"] = summary;
  if (config.plots) {
    add_figure(b, prefix + "_nll", plot_from_table(summary, "S", "mean_nll", "method"), "test NLL vs S", false, false);
    add_figure(b, prefix + "_rmse", plot_from_table(summary, "S", "mean_rmse", "method"), "test RMSE vs S", false, false);
  }
}

void report_holdout(const ExperimentConfig& config, ReportBundle& b) {
  CsvTable summary({"seed", "method", "S", "mean_kl", "max_kl"});
  CsvTable points({"seed", "method", "S", "x", "kl"});
  for (const auto& r : run_holdout_uncertainty(config)) {
    summary.add_row({std::to_string(r.seed), to_string(r.method), std::to_string(r.S), fmt(r.kl.mean()),
                     fmt(r.kl.maxCoeff())});
    for (Eigen::Index i = 0; i < r.kl.size(); ++i) {
      points.add_row({std::to_string(r.seed), to_string(r.method), std::to_string(r.S), fmt(r.x(i)), fmt(r.kl(i))});
    }
  }
  b.tables["holdout_kl"] = summary;
  b.tables["holdout_points"] = points;
  if (config.plots) {
    const std::string first = std::to_string(config.seeds.front());
    add_figure(b, "holdout_kl",
               plot_from_table(summary, "S", "mean_kl", "method",
                               [&](const std::vector<std::string>& r) { return r[0] == first; }),
               "mean KL(full || approx) vs S", false, true);
  }
}

}  // namespace

ReportBundle run_experiment(const ExperimentConfig& config) {
  ReportBundle b;
  b.experiment = to_string(config.experiment);
  b.config_json = to_json(config);
  b.config_hash = config_hash(config);
  b.seeds = config.seeds;
  try {
    config.validate();
    switch (config.experiment) {
      case ExperimentKind::KernelSweep: report_kernel_sweep(config, b); break;
      case ExperimentKind::GammaSweep: report_gamma_sweep(config, b); break;
      case ExperimentKind::ToyExample: report_toy(config, b); break;
      case ExperimentKind::Synthetic2D: report_fits(config, b, run_synthetic2d(config), "synthetic2d"); break;
      case ExperimentKind::HoldoutUncertainty: report_holdout(config, b); break;
      case ExperimentKind::Benchmark: report_fits(config, b, run_benchmark(config), "benchmark"); break;
    }
  } catch (const std::exception& e) {
    b.failed = true;
    b.failure = e.what();
    if (const auto* err = dynamic_cast<const Error*>(&e)) b.failure_code = err->code();
  }
  return b;
}

}  // namespace tqff
