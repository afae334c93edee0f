#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fleethealth/core_model.hpp"
#include "fleethealth/csv.hpp"
#include "fleethealth/errors.hpp"

namespace fleethealth {

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> normalize_weights(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  if (w.size() == 0) throw Error("component weights are empty");
  if (!w.allFinite()) throw Error("component weights must be finite");
  if ((w.array() < Scalar(0)).any()) throw Error("component weights must be non-negative");
  const Scalar total = w.sum();
  if (!(total > Scalar(0))) throw Error("component weights must not all be zero");
  return w / total;
}

// HR = sum_i w_i p_i. A NaN probability marks a component the railcar does
// not have; the weights are then renormalized over the present components.
template <typename DerivedW, typename DerivedP>
typename DerivedW::Scalar health_score(const Eigen::MatrixBase<DerivedW>& w, const Eigen::MatrixBase<DerivedP>& p) {
  using Scalar = typename DerivedW::Scalar;
  if (w.size() != p.size()) throw Error("health_score: weights and probabilities differ in length");
  Scalar weighted(0), present(0);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) < Scalar(0)) throw Error("health_score: negative weight");
    if (std::isnan(p(i))) continue;
    if (p(i) < Scalar(0) || p(i) > Scalar(1)) throw Error("health_score: probability outside [0, 1]");
    weighted += w(i) * p(i);
    present += w(i);
  }
  if (!(present > Scalar(0))) return Scalar(0);
  return weighted / present;
}

struct ComponentWeights {
  std::vector<ComponentId> components;
  Eigen::VectorXd w;  // normalized, same order as components

  static ComponentWeights uniform(std::vector<ComponentId> components);
  static ComponentWeights normalized(std::vector<ComponentId> components, const Eigen::VectorXd& raw);
};

struct HealthRow {
  std::string railcar_id;
  Eigen::VectorXd probabilities;  // one per component, NaN when absent
  double score = 0.0;
  std::size_t rank = 0;           // 1 = least healthy
};

struct HealthReport {
  ComponentWeights weights;
  std::vector<HealthRow> rows;
  std::map<ComponentId, std::string> model_versions;
};

HealthReport score_fleet(const ComponentWeights& weights,
                         const std::map<std::string, Eigen::VectorXd>& probabilities);

// Sorts by descending score, ties by railcar_id ascending, and assigns ranks 1..J.
void rank_fleet(HealthReport& report);

// railcar_id,p_c1,...,health_score,rank
csv::Table health_table(const HealthReport& report);

}  // namespace fleethealth
