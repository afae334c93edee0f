#pragma once

#include <span>
#include <vector>

#include "fleethealth/csv.hpp"

namespace fleethealth {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // rows with score >= threshold are predicted positive
};

// Points run from (0,0) (threshold +inf) to (1,1), one per distinct score.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

struct GainPoint {
  double fraction = 0.0;  // share of rows inspected, highest score first
  double gain = 0.0;      // share of positives captured
};

struct GainCurve {
  std::vector<GainPoint> points;
};

// Tied scores share one threshold; the area is trapezoidal, which equals
// P(s+ > s-) + P(s+ = s-)/2. Throws if only one class is present.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

// Threshold maximizing TPR - FPR; ties prefer smaller FPR, then smaller threshold.
double select_threshold(const RocCurve& curve);

// Rows ordered by descending score, ties kept in input order.
GainCurve gain_curve(std::span<const double> scores, std::span<const int> labels);

// Step interpolation: gain at the largest fraction not above `fraction`.
double capture_at(const GainCurve& curve, double fraction);

csv::Table roc_table(const RocCurve& curve);
csv::Table gain_table(const GainCurve& curve);

}  // namespace fleethealth
