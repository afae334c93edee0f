#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "fleethealth/core_model.hpp"

namespace fleethealth {

struct ForestParams {
  std::size_t n_trees = 200;
  std::size_t max_depth = 12;
  std::size_t min_leaf = 5;
  std::size_t mtry = 0;  // 0 selects ceil(sqrt(K))
  std::uint64_t seed = 0;

  std::size_t resolved_mtry(std::size_t n_features) const;
  void validate(std::size_t n_features) const;
};

// Feature names, kinds and category vocabularies seen at training time.
// Categorical cells are encoded as their index in the sorted vocabulary.
struct FeatureSchema {
  std::vector<FeatureSpec> features;
  std::vector<std::vector<std::string>> categories;

  static FeatureSchema from_matrix(const FeatureMatrix& matrix);
  std::vector<bool> categorical_mask() const;
  // Unknown categories encode as -1; missing cells as NaN.
  Eigen::MatrixXd encode(const FeatureMatrix& matrix) const;
};

struct TreeNode {
  int feature = -1;         // -1 marks a leaf
  double threshold = 0.0;   // numeric: x <= threshold goes left; categorical: x == code goes left
  bool categorical = false;
  bool majority_left = true;  // route for unseen categories
  int left = -1;
  int right = -1;
  double negatives = 0.0;   // bootstrap class counts reaching the node
  double positives = 0.0;
  double weighted_decrease = 0.0;  // (n_node / n_root) * Gini decrease of the split

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> row) const;
  double positive_fraction(std::span<const double> row) const;
  std::size_t depth() const;
};

struct TrainedComponentModel {
  ComponentId component = 1;
  FeatureSchema schema;
  ForestParams params;
  std::vector<DecisionTree> trees;
  double threshold = 0.5;
  std::vector<double> importances;
  bool importances_normalized = false;  // false when the forest has no informative split
};

double gini(std::span<const double> counts);

// Fits on pre-encoded rows. Throws on empty input or a single class.
TrainedComponentModel fit_forest(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y,
                                 const FeatureSchema& schema, const ForestParams& params);
// Uses the matrix's own target column.
TrainedComponentModel fit_forest(const FeatureMatrix& matrix, const ForestParams& params);

std::vector<double> predict_proba(const TrainedComponentModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x);
// Checks the matrix columns against the training schema before encoding.
std::vector<double> predict_proba(const TrainedComponentModel& model, const FeatureMatrix& matrix);

struct Importances {
  std::vector<double> values;
  bool normalized = false;
};

// Mean decrease in Gini impurity, weighted by node sample fraction, averaged
// over trees and normalized to sum to 1 when any split reduced impurity.
Importances feature_importances(const TrainedComponentModel& model);

void to_json(nlohmann::json& j, const TrainedComponentModel& model);
void from_json(const nlohmann::json& j, TrainedComponentModel& model);

}  // namespace fleethealth
