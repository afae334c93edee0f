#include "fleethealth/health.hpp"

#include <algorithm>
#include <set>

namespace fleethealth {

ComponentWeights ComponentWeights::uniform(std::vector<ComponentId> components) {
  Eigen::VectorXd raw = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(components.size()));
  return normalized(std::move(components), raw);
}

ComponentWeights ComponentWeights::normalized(std::vector<ComponentId> components, const Eigen::VectorXd& raw) {
  if (static_cast<Eigen::Index>(components.size()) != raw.size()) {
    throw Error("component weights do not match the component list");
  }
  return {std::move(components), normalize_weights(raw)};
}

HealthReport score_fleet(const ComponentWeights& weights, const std::map<std::string, Eigen::VectorXd>& probabilities) {
  HealthReport report;
  report.weights = weights;
  report.rows.reserve(probabilities.size());
  for (const auto& [id, p] : probabilities) {
    report.rows.push_back({id, p, health_score(weights.w, p), 0});
  }
  rank_fleet(report);
  return report;
}

void rank_fleet(HealthReport& report) {
  std::set<std::string_view> seen;
  for (const auto& row : report.rows) {
    if (!seen.insert(row.railcar_id).second) throw Error("duplicate railcar_id " + row.railcar_id);
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const HealthRow& a, const HealthRow& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.railcar_id < b.railcar_id;
  });
  for (std::size_t i = 0; i < report.rows.size(); ++i) report.rows[i].rank = i + 1;
}

csv::Table health_table(const HealthReport& report) {
  csv::Table t;
  t.header.push_back("railcar_id");
  for (auto c : report.weights.components) t.header.push_back("p_c" + std::to_string(c));
  t.header.push_back("health_score");
  t.header.push_back("rank");
  for (const auto& row : report.rows) {
    std::vector<std::string> cells{row.railcar_id};
    for (Eigen::Index i = 0; i < row.probabilities.size(); ++i) {
      const double p = row.probabilities(i);
      cells.push_back(std::isnan(p) ? std::string() : csv::format_number(p));
    }
    cells.push_back(csv::format_number(row.score));
    cells.push_back(std::to_string(row.rank));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace fleethealth
