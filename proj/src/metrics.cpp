#include "fleethealth/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "fleethealth/errors.hpp"

namespace fleethealth {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error("scores and labels differ in length");
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error("labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  if (pos == 0 || pos == labels.size()) throw Error("both classes must be present");
}

std::vector<std::size_t> by_descending_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const auto order = by_descending_score(scores);
  double total_pos = 0.0;
  for (int y : labels) total_pos += y;
  const double total_neg = static_cast<double>(labels.size()) - total_pos;

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double tp = 0.0, fp = 0.0, area = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    const double tp0 = tp, fp0 = fp;
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? tp : fp) += 1.0;
      ++i;
    }
    area += (fp - fp0) * (tp + tp0) / 2.0;
    curve.points.push_back({fp / total_neg, tp / total_pos, s});
  }
  curve.auc = area / (total_pos * total_neg);
  return curve;
}

double select_threshold(const RocCurve& curve) {
  if (curve.points.size() < 2) throw Error("ROC curve has no score thresholds");
  const RocPoint* best = nullptr;
  double best_j = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& p = curve.points[k];
    const double j = p.tpr - p.fpr;
    const bool better = j > best_j ||
                        (j == best_j && (p.fpr < best->fpr || (p.fpr == best->fpr && p.threshold < best->threshold)));
    if (better) {
      best = &p;
      best_j = j;
    }
  }
  return best->threshold;
}

GainCurve gain_curve(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const auto order = by_descending_score(scores);
  double total_pos = 0.0;
  for (int y : labels) total_pos += y;
  const double n = static_cast<double>(order.size());

  GainCurve curve;
  curve.points.reserve(order.size() + 1);
  curve.points.push_back({0.0, 0.0});
  double captured = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    captured += labels[order[k]];
    curve.points.push_back({static_cast<double>(k + 1) / n, captured / total_pos});
  }
  return curve;
}

double capture_at(const GainCurve& curve, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error("capture_at: fraction must be in [0, 1]");
  double value = 0.0;
  for (const auto& p : curve.points) {
    if (p.fraction <= fraction + 1e-12) {
      value = p.gain;
    } else {
      break;
    }
  }
  return value;
}

csv::Table roc_table(const RocCurve& curve) {
  csv::Table t;
  t.header = {"fpr", "tpr", "threshold"};
  for (const auto& p : curve.points) {
    t.rows.push_back({csv::format_number(p.fpr), csv::format_number(p.tpr), csv::format_number(p.threshold)});
  }
  return t;
}

csv::Table gain_table(const GainCurve& curve) {
  csv::Table t;
  t.header = {"fraction", "gain"};
  for (const auto& p : curve.points) t.rows.push_back({csv::format_number(p.fraction), csv::format_number(p.gain)});
  return t;
}

}  // namespace fleethealth
