#include "fleethealth/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "fleethealth/errors.hpp"
#include "fleethealth/rng.hpp"

namespace fleethealth {

namespace {

constexpr int kFormatVersion = 1;

bool goes_left(const TreeNode& node, double v) {
  if (std::isnan(v)) return node.majority_left;
  if (node.categorical) {
    if (v < 0.0) return node.majority_left;
    return v == node.threshold;
  }
  return v <= node.threshold;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  bool categorical = false;
  double gain = -std::numeric_limits<double>::infinity();
  std::size_t left_count = 0;
  std::size_t right_count = 0;
};

double gini2(double neg, double pos) {
  const double n = neg + pos;
  if (n <= 0.0) return 0.0;
  const double a = neg / n, b = pos / n;
  return 1.0 - a * a - b * b;
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const int> y, const std::vector<bool>& categorical,
              const ForestParams& params, std::size_t mtry, Rng& rng)
      : x_(x), y_(y), categorical_(categorical), params_(params), mtry_(mtry), rng_(rng) {
    features_.resize(categorical.size());
    std::iota(features_.begin(), features_.end(), 0);
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    DecisionTree tree;
    root_size_ = static_cast<double>(rows.size());
    grow(tree, std::move(rows), 0);
    return tree;
  }

 private:
  int grow(DecisionTree& tree, std::vector<std::size_t> rows, std::size_t depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double pos = 0.0;
    for (auto r : rows) pos += y_[r];
    const double n = static_cast<double>(rows.size());
    tree.nodes[id].positives = pos;
    tree.nodes[id].negatives = n - pos;

    const bool pure = pos == 0.0 || pos == n;
    if (pure || depth >= params_.max_depth || rows.size() < 2 * params_.min_leaf) return id;

    Split best = find_split(rows, n - pos, pos);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    left.reserve(best.left_count);
    right.reserve(best.right_count);
    TreeNode probe;
    probe.feature = best.feature;
    probe.threshold = best.threshold;
    probe.categorical = best.categorical;
    for (auto r : rows) {
      (goes_left(probe, x_(static_cast<Eigen::Index>(r), best.feature)) ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    {
      TreeNode& node = tree.nodes[id];
      node.feature = best.feature;
      node.threshold = best.threshold;
      node.categorical = best.categorical;
      node.majority_left = left.size() >= right.size();
      node.weighted_decrease = n / root_size_ * best.gain;
    }
    const int l = grow(tree, std::move(left), depth + 1);
    const int r = grow(tree, std::move(right), depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }

  Split find_split(const std::vector<std::size_t>& rows, double neg, double pos) {
    // Partial Fisher-Yates draw of mtry features, then visit them in index order.
    for (std::size_t i = 0; i < mtry_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, features_.size() - 1);
      std::swap(features_[i], features_[pick(rng_)]);
    }
    std::vector<int> chosen(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(mtry_));
    std::sort(chosen.begin(), chosen.end());

    const double n = neg + pos;
    const double parent = gini2(neg, pos);
    const std::size_t min_leaf = params_.min_leaf;
    Split best;

    std::vector<std::pair<double, int>> values(rows.size());
    for (int f : chosen) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        values[i] = {x_(static_cast<Eigen::Index>(rows[i]), f), y_[rows[i]]};
      }
      std::sort(values.begin(), values.end());

      if (!categorical_[static_cast<std::size_t>(f)]) {
        double lpos = 0.0;
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
          lpos += values[i].second;
          const std::size_t nl = i + 1, nr = values.size() - nl;
          if (values[i].first == values[i + 1].first) continue;
          if (nl < min_leaf || nr < min_leaf) continue;
          const double dl = static_cast<double>(nl), dr = static_cast<double>(nr);
          const double gain =
              parent - dl / n * gini2(dl - lpos, lpos) - dr / n * gini2(dr - (pos - lpos), pos - lpos);
          if (gain > best.gain) {
            best = {f, 0.5 * (values[i].first + values[i + 1].first), false, gain, nl, nr};
          }
        }
      } else {
        // One-vs-rest over the categories present, ascending by code.
        std::size_t i = 0;
        while (i < values.size()) {
          std::size_t j = i;
          double cpos = 0.0;
          while (j < values.size() && values[j].first == values[i].first) cpos += values[j++].second;
          const std::size_t nl = j - i, nr = values.size() - nl;
          if (nl >= min_leaf && nr >= min_leaf && values[i].first >= 0.0) {
            const double dl = static_cast<double>(nl), dr = static_cast<double>(nr);
            const double gain =
                parent - dl / n * gini2(dl - cpos, cpos) - dr / n * gini2(dr - (pos - cpos), pos - cpos);
            if (gain > best.gain) best = {f, values[i].first, true, gain, nl, nr};
          }
          i = j;
        }
      }
    }
    if (best.feature >= 0 && best.gain < 0.0) best.gain = 0.0;
    return best;
  }

  const Eigen::MatrixXd& x_;
  std::span<const int> y_;
  const std::vector<bool>& categorical_;
  const ForestParams& params_;
  std::size_t mtry_;
  Rng& rng_;
  std::vector<int> features_;
  double root_size_ = 1.0;
};

}  // namespace

std::size_t ForestParams::resolved_mtry(std::size_t n_features) const {
  if (mtry != 0) return mtry;
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features))));
}

void ForestParams::validate(std::size_t n_features) const {
  if (n_trees < 1) throw ConfigError("forest n_trees must be >= 1");
  if (max_depth < 1) throw ConfigError("forest max_depth must be >= 1");
  if (min_leaf < 1) throw ConfigError("forest min_leaf must be >= 1");
  if (n_features == 0) throw Error("forest needs at least one feature");
  const std::size_t m = resolved_mtry(n_features);
  if (m < 1 || m > n_features) throw ConfigError("forest mtry must be in [1, K]");
}

FeatureSchema FeatureSchema::from_matrix(const FeatureMatrix& matrix) {
  FeatureSchema s;
  for (const auto& col : matrix.columns()) {
    s.features.push_back(col.spec);
    std::vector<std::string> vocab;
    if (col.spec.kind == FeatureKind::categorical) {
      for (const auto& v : col.categorical) {
        if (v) vocab.push_back(*v);
      }
      std::sort(vocab.begin(), vocab.end());
      vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    }
    s.categories.push_back(std::move(vocab));
  }
  return s;
}

std::vector<bool> FeatureSchema::categorical_mask() const {
  std::vector<bool> mask;
  for (const auto& f : features) mask.push_back(f.kind == FeatureKind::categorical);
  return mask;
}

Eigen::MatrixXd FeatureSchema::encode(const FeatureMatrix& matrix) const {
  if (matrix.cols() != features.size()) throw Error("feature schema mismatch: column count differs");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(matrix.rows()), static_cast<Eigen::Index>(features.size()));
  for (std::size_t c = 0; c < features.size(); ++c) {
    const auto& col = matrix.column(c);
    if (col.spec.name != features[c].name || col.spec.kind != features[c].kind) {
      throw Error("feature schema mismatch at column '" + col.spec.name + "', expected '" + features[c].name + "'");
    }
    const auto ci = static_cast<Eigen::Index>(c);
    if (features[c].kind == FeatureKind::numeric) {
      for (std::size_t r = 0; r < matrix.rows(); ++r) x(static_cast<Eigen::Index>(r), ci) = col.numeric[r];
    } else {
      const auto& vocab = categories[c];
      for (std::size_t r = 0; r < matrix.rows(); ++r) {
        const auto& v = col.categorical[r];
        double code = std::numeric_limits<double>::quiet_NaN();
        if (v) {
          auto it = std::lower_bound(vocab.begin(), vocab.end(), *v);
          code = (it != vocab.end() && *it == *v) ? static_cast<double>(it - vocab.begin()) : -1.0;
        }
        x(static_cast<Eigen::Index>(r), ci) = code;
      }
    }
  }
  return x;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> row) const {
  const TreeNode* node = &nodes.at(0);
  while (!node->is_leaf()) {
    node = &nodes[static_cast<std::size_t>(goes_left(*node, row[static_cast<std::size_t>(node->feature)]) ? node->left
                                                                                                          : node->right)];
  }
  return *node;
}

double DecisionTree::positive_fraction(std::span<const double> row) const {
  const TreeNode& leaf = leaf_for(row);
  return leaf.positives / (leaf.positives + leaf.negatives);
}

std::size_t DecisionTree::depth() const {
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const auto& node = nodes[static_cast<std::size_t>(id)];
    if (!node.is_leaf()) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return deepest;
}

double gini(std::span<const double> counts) {
  double n = 0.0;
  for (double c : counts) {
    if (c < 0.0) throw Error("gini: negative class count");
    n += c;
  }
  if (n <= 0.0) throw Error("gini: all class counts are zero");
  double sum = 0.0;
  for (double c : counts) sum += (c / n) * (c / n);
  return 1.0 - sum;
}

TrainedComponentModel fit_forest(const Eigen::Ref<const Eigen::MatrixXd>& x_in, std::span<const int> y,
                                 const FeatureSchema& schema, const ForestParams& params) {
  const auto n = static_cast<std::size_t>(x_in.rows());
  const auto k = static_cast<std::size_t>(x_in.cols());
  if (n == 0) throw Error("fit_forest: empty matrix");
  if (y.size() != n) throw Error("fit_forest: target length does not match rows");
  if (schema.features.size() != k) throw Error("fit_forest: schema does not match columns");
  params.validate(k);
  if (!x_in.allFinite()) throw Error("fit_forest: matrix has missing cells");
  std::size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw Error("fit_forest: targets must be 0 or 1");
    pos += static_cast<std::size_t>(v);
  }
  if (pos == 0 || pos == n) throw Error("fit_forest: both classes must be present");

  const Eigen::MatrixXd x = x_in;
  const auto mask = schema.categorical_mask();
  const std::size_t mtry = params.resolved_mtry(k);

  TrainedComponentModel model;
  model.schema = schema;
  model.params = params;
  model.trees.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(params.seed, t));
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = draw(rng);
    TreeBuilder builder(x, y, mask, params, mtry, rng);
    model.trees.push_back(builder.build(std::move(rows)));
  }
  auto imp = feature_importances(model);
  model.importances = std::move(imp.values);
  model.importances_normalized = imp.normalized;
  return model;
}

TrainedComponentModel fit_forest(const FeatureMatrix& matrix, const ForestParams& params) {
  if (!matrix.target()) throw Error("fit_forest: matrix has no target column");
  if (matrix.missing_count() != 0) throw Error("fit_forest: matrix has missing cells");
  auto schema = FeatureSchema::from_matrix(matrix);
  return fit_forest(schema.encode(matrix), *matrix.target(), schema, params);
}

std::vector<double> predict_proba(const TrainedComponentModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (static_cast<std::size_t>(x.cols()) != model.schema.features.size()) {
    throw Error("predict_proba: column count does not match the training schema");
  }
  if (model.trees.empty()) throw Error("predict_proba: model has no trees");
  std::vector<double> p(static_cast<std::size_t>(x.rows()), 0.0);
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.positive_fraction(row);
    p[static_cast<std::size_t>(r)] = sum / static_cast<double>(model.trees.size());
  }
  return p;
}

std::vector<double> predict_proba(const TrainedComponentModel& model, const FeatureMatrix& matrix) {
  return predict_proba(model, model.schema.encode(matrix));
}

Importances feature_importances(const TrainedComponentModel& model) {
  const std::size_t k = model.schema.features.size();
  Importances out;
  out.values.assign(k, 0.0);
  if (model.trees.empty()) return out;
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) out.values[static_cast<std::size_t>(node.feature)] += node.weighted_decrease;
    }
  }
  for (auto& v : out.values) v /= static_cast<double>(model.trees.size());
  const double total = std::accumulate(out.values.begin(), out.values.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : out.values) v /= total;
    out.normalized = true;
  }
  return out;
}

// ---------------------------------------------------------------- JSON

void to_json(nlohmann::json& j, const TrainedComponentModel& model) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t c = 0; c < model.schema.features.size(); ++c) {
    const auto& f = model.schema.features[c];
    features.push_back({{"name", f.name},
                        {"kind", f.kind == FeatureKind::numeric ? "numeric" : "categorical"},
                        {"unit", f.unit},
                        {"categories", model.schema.categories[c]}});
  }
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
      // [feature, threshold, categorical, majority_left, left, right, negatives, positives, weighted_decrease]
      nodes.push_back(nlohmann::json::array({n.feature, n.threshold, n.categorical, n.majority_left, n.left, n.right,
                                             n.negatives, n.positives, n.weighted_decrease}));
    }
    trees.push_back(std::move(nodes));
  }
  j = nlohmann::json{{"format", "fleethealth.forest"},
                     {"version", kFormatVersion},
                     {"component_id", model.component},
                     {"params",
                      {{"n_trees", model.params.n_trees},
                       {"max_depth", model.params.max_depth},
                       {"min_leaf", model.params.min_leaf},
                       {"mtry", model.params.mtry},
                       {"seed", model.params.seed}}},
                     {"threshold", model.threshold},
                     {"schema", features},
                     {"importances", model.importances},
                     {"importances_normalized", model.importances_normalized},
                     {"trees", trees}};
}

void from_json(const nlohmann::json& j, TrainedComponentModel& model) {
  if (j.value("format", std::string()) != "fleethealth.forest") throw Error("not a forest model document");
  if (j.at("version").get<int>() != kFormatVersion) throw Error("unsupported forest model version");
  model = TrainedComponentModel{};
  model.component = j.at("component_id").get<ComponentId>();
  const auto& p = j.at("params");
  model.params.n_trees = p.at("n_trees").get<std::size_t>();
  model.params.max_depth = p.at("max_depth").get<std::size_t>();
  model.params.min_leaf = p.at("min_leaf").get<std::size_t>();
  model.params.mtry = p.at("mtry").get<std::size_t>();
  model.params.seed = p.at("seed").get<std::uint64_t>();
  model.threshold = j.at("threshold").get<double>();
  for (const auto& f : j.at("schema")) {
    FeatureSpec spec{f.at("name").get<std::string>(),
                     f.at("kind").get<std::string>() == "categorical" ? FeatureKind::categorical : FeatureKind::numeric,
                     f.value("unit", std::string())};
    model.schema.features.push_back(std::move(spec));
    model.schema.categories.push_back(f.at("categories").get<std::vector<std::string>>());
  }
  model.importances = j.at("importances").get<std::vector<double>>();
  model.importances_normalized = j.at("importances_normalized").get<bool>();
  const auto k = static_cast<int>(model.schema.features.size());
  for (const auto& t : j.at("trees")) {
    DecisionTree tree;
    for (const auto& a : t) {
      TreeNode n;
      n.feature = a.at(0).get<int>();
      n.threshold = a.at(1).get<double>();
      n.categorical = a.at(2).get<bool>();
      n.majority_left = a.at(3).get<bool>();
      n.left = a.at(4).get<int>();
      n.right = a.at(5).get<int>();
      n.negatives = a.at(6).get<double>();
      n.positives = a.at(7).get<double>();
      n.weighted_decrease = a.at(8).get<double>();
      tree.nodes.push_back(n);
    }
    const auto size = static_cast<int>(tree.nodes.size());
    if (size == 0) throw Error("forest model has an empty tree");
    for (const auto& n : tree.nodes) {
      if (n.feature >= k || (!n.is_leaf() && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size))) {
        throw Error("forest model tree is malformed");
      }
    }
    model.trees.push_back(std::move(tree));
  }
}

}  // namespace fleethealth
