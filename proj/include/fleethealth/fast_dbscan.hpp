#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fleethealth/core_model.hpp"
#include "fleethealth/errors.hpp"
#include "fleethealth/rng.hpp"

namespace fleethealth {

struct DbscanParams {
  double eps = 0.15;
  std::size_t min_points = 5;
  // The operational set has radius n_factor * eps around its center.
  double n_factor = 3.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(eps > 0.0)) throw ConfigError("dbscan eps must be > 0");
    if (min_points < 1) throw ConfigError("dbscan min_points must be >= 1");
    if (!(n_factor >= 1.0)) throw ConfigError("dbscan n_factor must be >= 1");
  }
};

inline constexpr int kNoise = -1;

struct ClusterAssignment {
  std::vector<int> labels;  // cluster index >= 0 or kNoise
  int cluster_count = 0;
  std::vector<bool> core;   // point had >= min_points neighbors (itself included)
};

struct ClusterStats {
  std::uint64_t distance_calls = 0;
  std::size_t op_rebuilds = 0;
};

// Anything that measures distance between points 0..size()-1 by index.
template <typename M>
concept PointMetric = requires(const M& m, std::size_t i, std::size_t j) {
  { m.size() } -> std::convertible_to<std::size_t>;
  { m(i, j) } -> std::convertible_to<double>;
};

// Euclidean distance between rows of a dense matrix.
template <typename Scalar>
class EuclideanMetric {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  explicit EuclideanMetric(Matrix points) : points_(std::move(points)) {}

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return static_cast<double>(
        (points_.row(static_cast<Eigen::Index>(i)) - points_.row(static_cast<Eigen::Index>(j))).norm());
  }

 private:
  Matrix points_;
};

// ---------------------------------------------------------------- Gower distance

// Column types and numeric ranges used by the Gower distance. Categorical
// cells are encoded as integer-valued doubles; NaN marks a missing cell.
struct GowerSchema {
  std::vector<FeatureKind> kinds;
  std::vector<double> ranges;  // max - min over observed values; unused for categorical
};

struct GowerResult {
  double value = 1.0;
  bool no_overlap = true;  // no feature observed in both rows
};

GowerResult gower_distance(std::span<const double> a, std::span<const double> b, const GowerSchema& schema);

// Encoded view of a FeatureMatrix for repeated Gower evaluation.
class GowerSpace {
 public:
  explicit GowerSpace(const FeatureMatrix& matrix);

  std::size_t size() const { return static_cast<std::size_t>(encoded_.rows()); }
  const GowerSchema& schema() const { return schema_; }
  std::span<const double> row(std::size_t i) const {
    return {encoded_.data() + static_cast<Eigen::Index>(i) * encoded_.cols(),
            static_cast<std::size_t>(encoded_.cols())};
  }

  GowerResult distance(std::size_t i, std::size_t j) const { return gower_distance(row(i), row(j), schema_); }
  double operator()(std::size_t i, std::size_t j) const { return distance(i, j).value; }

 private:
  GowerSchema schema_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> encoded_;
};

// ---------------------------------------------------------------- clustering

// Seeded permutation deciding which point is tried next as a cluster seed.
// The first entry is the initial operational-set center.
std::vector<std::size_t> visiting_order(std::size_t n, std::uint64_t seed);

struct OperationalSet {
  std::vector<std::size_t> op;  // dist(x, center) <= n_factor * eps, ascending
  std::vector<std::size_t> pd;  // the rest, ascending
};

template <PointMetric M>
OperationalSet build_operational_set(const M& metric, std::size_t center, const DbscanParams& params) {
  params.validate();
  const std::size_t n = metric.size();
  if (center >= n) throw Error("operational set center out of range");
  const double radius = params.n_factor * params.eps;
  OperationalSet out;
  for (std::size_t x = 0; x < n; ++x) {
    double d = x == center ? 0.0 : static_cast<double>(metric(center, x));
    (d <= radius ? out.op : out.pd).push_back(x);
  }
  return out;
}

namespace detail {

// Neighbor queries are answered from the current operational set when the
// query point sits deep enough inside it that its whole eps-ball is covered
// (distance to center <= (n_factor - 1) * eps). Otherwise the set is rebuilt
// around the query point, which costs one full pass over the data.
template <PointMetric M>
class OperationalNeighborhood {
 public:
  OperationalNeighborhood(const M& metric, const DbscanParams& params, ClusterStats& stats)
      : metric_(metric),
        eps_(params.eps),
        radius_(params.n_factor * params.eps),
        // Guard against rounding in the triangle inequality.
        safe_(params.n_factor * params.eps - params.eps - 1e-9 * params.n_factor * params.eps),
        stats_(stats),
        center_dist_(metric.size(), std::numeric_limits<double>::infinity()),
        in_op_(metric.size(), 0) {}

  bool covers(std::size_t p) const {
    return has_center_ && (p == center_ || (in_op_[p] && center_dist_[p] <= safe_));
  }

  void neighbors(std::size_t p, std::vector<std::size_t>& out) {
    out.clear();
    if (!covers(p)) rebuild(p);
    if (p == center_) {
      for (std::size_t x : members_) {
        if (center_dist_[x] <= eps_) out.push_back(x);
      }
      return;
    }
    for (std::size_t y : members_) {
      if (y == p) {
        out.push_back(y);
        continue;
      }
      ++stats_.distance_calls;
      if (static_cast<double>(metric_(p, y)) <= eps_) out.push_back(y);
    }
  }

  std::size_t rebuilds() const { return stats_.op_rebuilds; }

 private:
  void rebuild(std::size_t p) {
    const std::size_t n = metric_.size();
    members_.clear();
    for (std::size_t x = 0; x < n; ++x) {
      double d = 0.0;
      if (x != p) {
        ++stats_.distance_calls;
        d = static_cast<double>(metric_(p, x));
      }
      center_dist_[x] = d;
      in_op_[x] = d <= radius_ ? 1 : 0;
      if (in_op_[x]) members_.push_back(x);
    }
    center_ = p;
    has_center_ = true;
    ++stats_.op_rebuilds;
  }

  const M& metric_;
  double eps_;
  double radius_;
  double safe_;
  ClusterStats& stats_;
  std::vector<double> center_dist_;
  std::vector<char> in_op_;
  std::vector<std::size_t> members_;
  std::size_t center_ = 0;
  bool has_center_ = false;
};

}  // namespace detail

// Density-based clustering with neighbor scans confined to an operational
// set. Produces exactly the DBSCAN partition for the same eps/min_points
// when the distance is a metric; border points reachable from several
// clusters go to the cluster whose seed comes first in visiting_order().
template <PointMetric M>
ClusterAssignment cluster(const M& metric, const DbscanParams& params, ClusterStats* stats_out = nullptr) {
  params.validate();
  const std::size_t n = metric.size();
  if (n == 0) throw Error("cannot cluster an empty dataset");

  constexpr int kUnclaimed = -2;
  ClusterStats stats;
  detail::OperationalNeighborhood<M> hood(metric, params, stats);

  ClusterAssignment out;
  out.labels.assign(n, kUnclaimed);
  out.core.assign(n, false);
  std::vector<char> visited(n, 0);
  std::vector<std::size_t> nbrs;
  std::vector<std::size_t> inside, outside;  // pending expansion, split by OP coverage

  auto claim = [&](std::size_t r, int cid) {
    int& label = out.labels[r];
    if (label == kUnclaimed) {
      label = cid;
      (hood.covers(r) ? inside : outside).push_back(r);
    } else if (label == kNoise) {
      label = cid;  // border point; already known to be non-core
    }
  };

  for (std::size_t p : visiting_order(n, params.seed)) {
    if (visited[p]) continue;
    visited[p] = 1;
    hood.neighbors(p, nbrs);
    if (nbrs.size() < params.min_points) {
      out.labels[p] = kNoise;
      continue;
    }
    const int cid = out.cluster_count++;
    out.core[p] = true;
    out.labels[p] = cid;
    for (std::size_t r : nbrs) claim(r, cid);

    while (!inside.empty() || !outside.empty()) {
      std::size_t q;
      if (!inside.empty()) {
        q = inside.back();
        inside.pop_back();
      } else {
        q = outside.back();
        outside.pop_back();
      }
      visited[q] = 1;
      const std::size_t before = hood.rebuilds();
      hood.neighbors(q, nbrs);
      if (hood.rebuilds() != before) {
        // New operational set: move newly covered points to the cheap queue.
        auto split = std::stable_partition(outside.begin(), outside.end(),
                                           [&](std::size_t x) { return !hood.covers(x); });
        inside.insert(inside.end(), split, outside.end());
        outside.erase(split, outside.end());
      }
      if (nbrs.size() >= params.min_points) {
        out.core[q] = true;
        for (std::size_t r : nbrs) claim(r, cid);
      }
    }
  }
  if (stats_out) *stats_out = stats;
  return out;
}

// Gower-distance clustering over all feature columns; missing cells are
// skipped pairwise. With missing cells the distance is not a metric, so the
// operational-set shortcut can differ from exhaustive DBSCAN at the margins.
ClusterAssignment cluster(const FeatureMatrix& dataset, const DbscanParams& params,
                          ClusterStats* stats_out = nullptr);

// Fills missing cells from the row's cluster: median for numeric features,
// mode (lexicographically smallest on ties) for categorical ones. Noise rows
// and clusters without an observed value fall back to the global statistic.
FeatureMatrix impute(const FeatureMatrix& matrix, const ClusterAssignment& assignment);

}  // namespace fleethealth
