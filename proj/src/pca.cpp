#include "fleethealth/pca.hpp"

namespace fleethealth {

std::string pca_feature_name(Eigen::Index k) { return "pca_" + std::to_string(k + 1); }

namespace {

std::vector<std::size_t> subset_columns(const FeatureMatrix& matrix, const std::vector<std::string>& subset) {
  std::vector<std::size_t> cols;
  for (const auto& name : subset) {
    auto c = matrix.index_of(name);
    if (matrix.spec(c).kind != FeatureKind::numeric) throw Error("PCA feature '" + name + "' is not numeric");
    cols.push_back(c);
  }
  return cols;
}

FeatureMatrix append_scores(const FeatureMatrix& matrix, const Eigen::MatrixXd& scores,
                            const std::vector<std::string>& subset, bool keep_originals) {
  FeatureMatrix out = keep_originals ? matrix : matrix.drop_columns(subset);
  for (Eigen::Index k = 0; k < scores.cols(); ++k) {
    std::vector<double> col(scores.col(k).data(), scores.col(k).data() + scores.rows());
    out.add_numeric({pca_feature_name(k), FeatureKind::numeric, "score"}, std::move(col));
  }
  return out;
}

}  // namespace

PcaFit fit_project(const FeatureMatrix& matrix, const std::vector<std::string>& feature_subset, Eigen::Index m,
                   bool keep_originals) {
  if (feature_subset.empty()) throw Error("PCA: feature subset is empty");
  if (m < 1 || m > static_cast<Eigen::Index>(feature_subset.size())) {
    throw Error("PCA: retained components must be in [1, " + std::to_string(feature_subset.size()) + "]");
  }
  auto cols = subset_columns(matrix, feature_subset);
  Eigen::MatrixXd x = matrix.numeric_block(cols);
  PcaFit fit;
  fit.model = fit_pca(x, m);
  fit.model.feature_subset = feature_subset;
  fit.model.keep_originals = keep_originals;
  fit.matrix = append_scores(matrix, fit.model.transform(x), feature_subset, keep_originals);
  return fit;
}

FeatureMatrix apply_pca(const PcaModel<double>& model, const FeatureMatrix& matrix) {
  auto cols = subset_columns(matrix, model.feature_subset);
  Eigen::MatrixXd x = matrix.numeric_block(cols);
  if (!x.allFinite()) throw Error("PCA: subset columns must be complete");
  return append_scores(matrix, model.transform(x), model.feature_subset, model.keep_originals);
}

void to_json(nlohmann::json& j, const PcaModel<double>& model) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  std::vector<std::vector<double>> comps;
  for (Eigen::Index k = 0; k < model.m(); ++k) comps.push_back(vec(model.components.col(k)));
  j = nlohmann::json{{"feature_subset", model.feature_subset},
                     {"m", model.m()},
                     {"keep_originals", model.keep_originals},
                     {"means", vec(model.means)},
                     {"stds", vec(model.stds)},
                     {"eigenvalues", vec(model.eigenvalues)},
                     {"components", comps}};
}

void from_json(const nlohmann::json& j, PcaModel<double>& model) {
  auto vec = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  model.feature_subset = j.at("feature_subset").get<std::vector<std::string>>();
  model.keep_originals = j.value("keep_originals", true);
  model.means = vec(j.at("means").get<std::vector<double>>());
  model.stds = vec(j.at("stds").get<std::vector<double>>());
  model.eigenvalues = vec(j.at("eigenvalues").get<std::vector<double>>());
  auto comps = j.at("components").get<std::vector<std::vector<double>>>();
  const auto m = j.at("m").get<Eigen::Index>();
  const auto d = static_cast<Eigen::Index>(model.feature_subset.size());
  if (static_cast<Eigen::Index>(comps.size()) != m || model.means.size() != d || model.stds.size() != d ||
      model.eigenvalues.size() != m) {
    throw Error("PCA model JSON has inconsistent dimensions");
  }
  model.components.resize(d, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (static_cast<Eigen::Index>(comps[static_cast<std::size_t>(k)].size()) != d) {
      throw Error("PCA model JSON has inconsistent dimensions");
    }
    model.components.col(k) = vec(comps[static_cast<std::size_t>(k)]);
  }
}

}  // namespace fleethealth
