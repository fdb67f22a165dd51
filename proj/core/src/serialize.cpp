#include "tqff/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tqff/error.hpp"

namespace tqff {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

ojson matrix_rows(const Eigen::MatrixXd& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson r = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_rows(const json& rows, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const json& r = rows.at(i);
    if (r.is_number()) {
      if (cols != 1) throw Error(ErrorCode::ParseError, "expected a row of length " + std::to_string(cols));
      m(i, 0) = r.get<double>();
      continue;
    }
    if (static_cast<Eigen::Index>(r.size()) != cols) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(i) + " has wrong length");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.at(j).get<double>();
  }
  return m;
}

ojson vector_json(const Eigen::VectorXd& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = a.at(i).get<double>();
  return v;
}

ojson kernel_json(const KernelSpec& spec) {
  ojson k;
  k["family"] = to_string(spec.family);
  k["lengthscales"] = spec.hyper.lengthscales;
  k["scale"] = spec.hyper.scale;
  k["noise"] = spec.hyper.noise;
  k["gamma"] = spec.gamma;
  k["dim"] = spec.dim();
  return k;
}

KernelSpec kernel_from_json(const json& k) {
  KernelSpec spec;
  spec.family = kernel_family_from_string(k.at("family").get<std::string>());
  spec.hyper.lengthscales = k.at("lengthscales").get<std::vector<double>>();
  spec.hyper.scale = k.at("scale").get<double>();
  spec.hyper.noise = k.at("noise").get<double>();
  spec.gamma = k.at("gamma").get<double>();
  if (k.contains("dim") && k.at("dim").get<int>() != spec.dim()) {
    throw Error(ErrorCode::ParseError, "kernel dim does not match lengthscales");
  }
  spec.validate();
  return spec;
}

ojson map_json(const FeatureMap& map) {
  ojson j;
  j["method"] = to_string(map.method);
  j["S"] = map.num_frequencies();
  j["size"] = map.size;
  j["dim"] = map.dim();
  j["gamma"] = map.spec.gamma;
  if (map.seed) j["seed"] = *map.seed;
  j["kernel"] = kernel_json(map.spec);
  ojson flat = ojson::array();
  for (Eigen::Index i = 0; i < map.frequencies.rows(); ++i) {
    for (Eigen::Index c = 0; c < map.frequencies.cols(); ++c) flat.push_back(map.frequencies(i, c));
  }
  j["frequencies"] = std::move(flat);
  j["sqrt_weights"] = vector_json(map.sqrt_weights);
  return j;
}

FeatureMap map_from_json(const json& j) {
  FeatureMap map;
  map.method = feature_method_from_string(j.at("method").get<std::string>());
  const int S = j.at("S").get<int>();
  const int d = j.at("dim").get<int>();
  map.size = j.value("size", S);
  map.spec = kernel_from_json(j.at("kernel"));
  map.spec.gamma = j.at("gamma").get<double>();
  if (map.spec.dim() != d) throw Error(ErrorCode::ParseError, "map dim does not match kernel");
  if (j.contains("seed")) map.seed = j.at("seed").get<std::uint64_t>();
  const json& flat = j.at("frequencies");
  if (static_cast<int>(flat.size()) != S * d) throw Error(ErrorCode::ParseError, "frequencies length != S*dim");
  map.frequencies.resize(S, d);
  for (int i = 0; i < S; ++i) {
    for (int c = 0; c < d; ++c) map.frequencies(i, c) = flat.at(static_cast<std::size_t>(i) * d + c).get<double>();
  }
  map.sqrt_weights = vector_from_json(j.at("sqrt_weights"));
  if (map.sqrt_weights.size() != S) throw Error(ErrorCode::ParseError, "sqrt_weights length != S");
  map.arg_scale = map.method == FeatureMethod::TQFF ? map.spec.gamma : 1.0;
  return map;
}

template <class F>
auto guarded_parse(const std::string& text, F&& f) {
  try {
    return f(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace

RuleDocument rule_document(const FeatureMap& map) {
  RuleDocument doc;
  switch (map.method) {
    case FeatureMethod::TQFF:
      doc.kind = RuleKind::Trig;
      doc.exactness_degree = 2 * map.size - 1;
      break;
    case FeatureMethod::GLFF:
      doc.kind = RuleKind::Legendre;
      doc.exactness_degree = 4 * map.size - 1;
      break;
    case FeatureMethod::GHFF:
      doc.kind = RuleKind::Hermite;
      doc.exactness_degree = 4 * map.size - 1;
      break;
    case FeatureMethod::RFF:
      throw Error(ErrorCode::InvalidArgument, "random features have no quadrature rule");
  }
  doc.L = map.size;
  doc.gamma = map.spec.gamma;
  doc.dim = map.dim();
  doc.nodes = map.frequencies;
  doc.weights.resize(map.num_frequencies());
  for (int s = 0; s < map.num_frequencies(); ++s) doc.weights[s] = map.sqrt_weights(s) * map.sqrt_weights(s);
  doc.mu0 = map.weight_sum();
  return doc;
}

TensorRule to_tensor_rule(const RuleDocument& doc) {
  if (doc.kind != RuleKind::Trig) throw Error(ErrorCode::InvalidArgument, "tensor rules are trig rules");
  TensorRule rule;
  rule.dim = doc.dim;
  rule.base_L = doc.L;
  rule.exactness_degree = doc.exactness_degree;
  rule.weights = doc.weights;
  for (Eigen::Index i = 0; i < doc.nodes.rows(); ++i) {
    std::vector<double> f(doc.dim);
    for (int j = 0; j < doc.dim; ++j) f[j] = doc.nodes(i, j);
    rule.frequencies.push_back(std::move(f));
  }
  return rule;
}

FeatureMap to_feature_map(const RuleDocument& doc, const KernelSpec& spec) {
  if (spec.dim() != doc.dim) throw Error(ErrorCode::DimensionMismatch, "kernel and rule dimensions differ");
  FeatureMap map;
  map.method = doc.kind == RuleKind::Trig       ? FeatureMethod::TQFF
               : doc.kind == RuleKind::Legendre ? FeatureMethod::GLFF
                                                : FeatureMethod::GHFF;
  map.frequencies = doc.nodes;
  map.sqrt_weights.resize(static_cast<Eigen::Index>(doc.weights.size()));
  for (std::size_t s = 0; s < doc.weights.size(); ++s) {
    map.sqrt_weights(static_cast<Eigen::Index>(s)) = std::sqrt(std::max(0.0, doc.weights[s]));
  }
  map.spec = spec;
  map.arg_scale = map.method == FeatureMethod::TQFF ? spec.gamma : 1.0;
  map.size = doc.L;
  return map;
}

std::string to_json(const RuleDocument& doc) {
  ojson j;
  j["kind"] = to_string(doc.kind);
  j["L"] = doc.L;
  j["gamma"] = doc.gamma;
  j["dim"] = doc.dim;
  if (doc.dim == 1) {
    j["nodes"] = vector_json(doc.nodes.col(0));
  } else {
    j["nodes"] = matrix_rows(doc.nodes);
  }
  j["weights"] = doc.weights;
  j["exactness_degree"] = doc.exactness_degree;
  j["mu0"] = doc.mu0;
  return j.dump(2) + "\n";
}

RuleDocument rule_document_from_json(const std::string& text) {
  return guarded_parse(text, [](const json& j) {
    RuleDocument doc;
    doc.kind = rule_kind_from_string(j.at("kind").get<std::string>());
    doc.L = j.at("L").get<int>();
    doc.gamma = j.at("gamma").get<double>();
    doc.dim = j.at("dim").get<int>();
    if (doc.dim < 1) throw Error(ErrorCode::ParseError, "dim must be positive");
    doc.nodes = matrix_from_rows(j.at("nodes"), doc.dim);
    doc.weights = j.at("weights").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(doc.weights.size()) != doc.nodes.rows()) {
      throw Error(ErrorCode::ParseError, "nodes and weights lengths differ");
    }
    doc.exactness_degree = j.at("exactness_degree").get<int>();
    doc.mu0 = j.at("mu0").get<double>();
    return doc;
  });
}

std::string to_json(const FeatureMap& map) { return map_json(map).dump(2) + "\n"; }

FeatureMap feature_map_from_json(const std::string& text) {
  return guarded_parse(text, [](const json& j) { return map_from_json(j); });
}

std::string to_json(const GPModel& model) {
  ojson j;
  j["map"] = map_json(model.map);
  j["hyper"] = {{"lengthscales", model.hyper().lengthscales},
                {"scale", model.hyper().scale},
                {"noise", model.hyper().noise}};
  j["kernel"] = kernel_json(model.map.spec);
  j["opt"] = {{"lr", model.opt.lr},
              {"iters", model.opt.iters},
              {"seed", model.opt.seed},
              {"beta1", model.opt.beta1},
              {"beta2", model.opt.beta2},
              {"eps", model.opt.eps}};
  j["normalization"] = {{"y_mean", model.normalization.y_mean},
                        {"y_sd", model.normalization.y_sd},
                        {"x_mean", model.normalization.x_mean},
                        {"x_sd", model.normalization.x_sd}};
  j["final_loss"] = model.loss_history.empty() ? 0.0 : model.loss_history.back();
  j["cache"] = {{"chol_lower", matrix_rows(model.cache.chol_lower)},
                {"mean_weights", vector_json(model.cache.mean_weights)}};
  return j.dump(2) + "\n";
}

GPModel model_from_json(const std::string& text) {
  return guarded_parse(text, [](const json& j) {
    GPModel model;
    model.map = map_from_json(j.at("map"));
    Hyperparams h;
    h.lengthscales = j.at("hyper").at("lengthscales").get<std::vector<double>>();
    h.scale = j.at("hyper").at("scale").get<double>();
    h.noise = j.at("hyper").at("noise").get<double>();
    h.validate();
    if (h.dim() != model.map.dim()) throw Error(ErrorCode::ParseError, "hyper dim does not match map");
    model.map = model.map.with_hyper(h);
    const json& o = j.at("opt");
    model.opt.lr = o.at("lr").get<double>();
    model.opt.iters = o.at("iters").get<int>();
    model.opt.seed = o.at("seed").get<std::uint64_t>();
    model.opt.beta1 = o.value("beta1", model.opt.beta1);
    model.opt.beta2 = o.value("beta2", model.opt.beta2);
    model.opt.eps = o.value("eps", model.opt.eps);
    const json& n = j.at("normalization");
    model.normalization.y_mean = n.at("y_mean").get<double>();
    model.normalization.y_sd = n.at("y_sd").get<double>();
    model.normalization.x_mean = n.value("x_mean", std::vector<double>{});
    model.normalization.x_sd = n.value("x_sd", std::vector<double>{});
    const int m = model.map.feature_dim();
    model.cache.chol_lower = matrix_from_rows(j.at("cache").at("chol_lower"), m);
    model.cache.mean_weights = vector_from_json(j.at("cache").at("mean_weights"));
    if (model.cache.chol_lower.rows() != m || model.cache.mean_weights.size() != m) {
      throw Error(ErrorCode::ParseError, "cache size does not match feature dimension");
    }
    return model;
  });
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tqff
