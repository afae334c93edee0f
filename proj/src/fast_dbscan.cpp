#include "fleethealth/fast_dbscan.hpp"

#include <cmath>
#include <map>
#include <optional>

namespace fleethealth {

GowerResult gower_distance(std::span<const double> a, std::span<const double> b, const GowerSchema& schema) {
  const std::size_t k = schema.kinds.size();
  if (a.size() != k || b.size() != k || schema.ranges.size() != k) {
    throw Error("gower_distance: rows do not conform to the schema");
  }
  double sum = 0.0;
  std::size_t observed = 0;
  for (std::size_t f = 0; f < k; ++f) {
    if (std::isnan(a[f]) || std::isnan(b[f])) continue;
    ++observed;
    if (schema.kinds[f] == FeatureKind::categorical) {
      sum += a[f] == b[f] ? 0.0 : 1.0;
    } else if (schema.ranges[f] > 0.0) {
      sum += std::min(1.0, std::abs(a[f] - b[f]) / schema.ranges[f]);
    }
  }
  if (observed == 0) return {1.0, true};
  return {sum / static_cast<double>(observed), false};
}

GowerSpace::GowerSpace(const FeatureMatrix& matrix) {
  const auto n = static_cast<Eigen::Index>(matrix.rows());
  const auto k = static_cast<Eigen::Index>(matrix.cols());
  encoded_.resize(n, k);
  schema_.kinds.resize(matrix.cols());
  schema_.ranges.assign(matrix.cols(), 0.0);
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    const auto& col = matrix.column(c);
    const auto ci = static_cast<Eigen::Index>(c);
    schema_.kinds[c] = col.spec.kind;
    if (col.spec.kind == FeatureKind::numeric) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t r = 0; r < matrix.rows(); ++r) {
        double v = col.numeric[r];
        encoded_(static_cast<Eigen::Index>(r), ci) = v;
        if (!std::isnan(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      schema_.ranges[c] = hi > lo ? hi - lo : 0.0;
    } else {
      std::map<std::string, double> codes;
      for (const auto& v : col.categorical) {
        if (v) codes.emplace(*v, 0.0);
      }
      double next = 0.0;
      for (auto& [_, code] : codes) code = next++;
      for (std::size_t r = 0; r < matrix.rows(); ++r) {
        const auto& v = col.categorical[r];
        encoded_(static_cast<Eigen::Index>(r), ci) = v ? codes.at(*v) : std::numeric_limits<double>::quiet_NaN();
      }
    }
  }
}

std::vector<std::size_t> visiting_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0x0dbc));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

ClusterAssignment cluster(const FeatureMatrix& dataset, const DbscanParams& params, ClusterStats* stats_out) {
  if (dataset.rows() == 0) throw Error("cannot cluster an empty dataset");
  GowerSpace space(dataset);
  return cluster(space, params, stats_out);
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string mode(const std::vector<const std::string*>& v) {
  std::map<std::string_view, std::size_t> counts;
  for (const auto* s : v) ++counts[*s];
  std::string_view best;
  std::size_t best_count = 0;
  for (const auto& [value, count] : counts) {  // ascending, so ties keep the smallest
    if (count > best_count) {
      best = value;
      best_count = count;
    }
  }
  return std::string(best);
}

}  // namespace

FeatureMatrix impute(const FeatureMatrix& matrix, const ClusterAssignment& assignment) {
  const std::size_t n = matrix.rows();
  if (assignment.labels.size() != n) throw Error("impute: assignment does not match the matrix rows");
  for (int label : assignment.labels) {
    if (label != kNoise && (label < 0 || label >= assignment.cluster_count)) {
      throw Error("impute: invalid cluster label");
    }
  }
  const auto clusters = static_cast<std::size_t>(assignment.cluster_count);

  FeatureMatrix out = matrix;
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    std::vector<std::size_t> holes;
    for (std::size_t r = 0; r < n; ++r) {
      if (matrix.is_missing(r, c)) holes.push_back(r);
    }
    if (holes.empty()) continue;
    if (holes.size() == n) {
      throw Error("impute: feature '" + matrix.spec(c).name + "' is missing in every row");
    }

    if (matrix.spec(c).kind == FeatureKind::numeric) {
      std::vector<double> global;
      std::vector<std::vector<double>> per(clusters);
      for (std::size_t r = 0; r < n; ++r) {
        if (matrix.is_missing(r, c)) continue;
        double v = matrix.numeric(r, c);
        global.push_back(v);
        if (assignment.labels[r] != kNoise) per[static_cast<std::size_t>(assignment.labels[r])].push_back(v);
      }
      const double global_fill = median(global);
      std::vector<std::optional<double>> fill(clusters);
      for (std::size_t k = 0; k < clusters; ++k) {
        if (!per[k].empty()) fill[k] = median(std::move(per[k]));
      }
      for (std::size_t r : holes) {
        int label = assignment.labels[r];
        double v = label != kNoise && fill[static_cast<std::size_t>(label)] ? *fill[static_cast<std::size_t>(label)]
                                                                              : global_fill;
        out.set_numeric(r, c, v);
      }
    } else {
      std::vector<const std::string*> global;
      std::vector<std::vector<const std::string*>> per(clusters);
      for (std::size_t r = 0; r < n; ++r) {
        const auto& v = matrix.category(r, c);
        if (!v) continue;
        global.push_back(&*v);
        if (assignment.labels[r] != kNoise) per[static_cast<std::size_t>(assignment.labels[r])].push_back(&*v);
      }
      const std::string global_fill = mode(global);
      std::vector<std::optional<std::string>> fill(clusters);
      for (std::size_t k = 0; k < clusters; ++k) {
        if (!per[k].empty()) fill[k] = mode(per[k]);
      }
      for (std::size_t r : holes) {
        int label = assignment.labels[r];
        const auto& f = label != kNoise ? fill[static_cast<std::size_t>(label)] : std::optional<std::string>{};
        out.set_category(r, c, f ? *f : global_fill);
      }
    }
  }
  return out;
}

}  // namespace fleethealth
