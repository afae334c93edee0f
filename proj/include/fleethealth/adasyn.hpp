#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fleethealth {

struct AdasynParams {
  double beta = 1.0;  // 1 requests full balance
  std::size_t k = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

// Where a synthetic row came from: base + lambda * (neighbor - base).
struct SyntheticOrigin {
  std::size_t base = 0;
  std::size_t neighbor = 0;
  double lambda = 0.0;
};

struct AdasynResult {
  Eigen::MatrixXd x;  // original rows first, then synthetic rows
  std::vector<int> y;
  int minority_label = 1;
  std::size_t requested = 0;  // G
  std::vector<SyntheticOrigin> origins;  // one per synthetic row, in output order
};

// Adaptive synthetic oversampling of the minority class. Neighbors are found
// by Euclidean distance on column-standardized data; interpolation happens in
// the original units. Columns flagged in `categorical` copy the nearer
// endpoint instead of interpolating.
AdasynResult adasyn(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y, const AdasynParams& params,
                    const std::vector<bool>& categorical = {});

}  // namespace fleethealth
