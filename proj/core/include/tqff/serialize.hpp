#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tqff/feature_map.hpp"
#include "tqff/gp.hpp"
#include "tqff/quadrature.hpp"

namespace tqff {

/// Frequencies and weights of the rule behind a feature map. For trig rules these are the
/// half-space nodes with the factor 2 folded into the weights; for Legendre and Hermite they
/// are the halved, density-weighted nodes in standardized frequency units.
struct RuleDocument {
  RuleKind kind = RuleKind::Trig;
  int L = 0;
  double gamma = 1.15;
  int dim = 1;
  Eigen::MatrixXd nodes;  // S x dim
  std::vector<double> weights;
  int exactness_degree = 0;
  double mu0 = 0.0;
};

RuleDocument rule_document(const FeatureMap& map);
TensorRule to_tensor_rule(const RuleDocument& doc);
FeatureMap to_feature_map(const RuleDocument& doc, const KernelSpec& spec);

std::string to_json(const RuleDocument& doc);
RuleDocument rule_document_from_json(const std::string& text);

std::string to_json(const FeatureMap& map);
FeatureMap feature_map_from_json(const std::string& text);

/// Includes the cached factorization so prediction needs no training data.
std::string to_json(const GPModel& model);
GPModel model_from_json(const std::string& text);

std::string read_text_file(const std::string& path);

}  // namespace tqff
