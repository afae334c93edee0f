#include "fleethealth/adasyn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fleethealth/errors.hpp"
#include "fleethealth/rng.hpp"

namespace fleethealth {

void AdasynParams::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("adasyn beta must be in (0, 1]");
  if (k < 1) throw ConfigError("adasyn k must be >= 1");
}

namespace {

// Indices of the k nearest candidates to `query` (self excluded); ties by index.
std::vector<std::size_t> nearest(const Eigen::MatrixXd& z, std::size_t query, std::span<const std::size_t> candidates,
                                 std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(candidates.size());
  const auto q = z.row(static_cast<Eigen::Index>(query));
  for (std::size_t c : candidates) {
    if (c == query) continue;
    d.emplace_back((z.row(static_cast<Eigen::Index>(c)) - q).squaredNorm(), c);
  }
  k = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
  return out;
}

}  // namespace

AdasynResult adasyn(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y, const AdasynParams& params,
                    const std::vector<bool>& categorical) {
  params.validate();
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0) throw Error("adasyn: empty input");
  if (y.size() != n) throw Error("adasyn: target length does not match rows");
  if (!categorical.empty() && categorical.size() != static_cast<std::size_t>(x.cols())) {
    throw Error("adasyn: categorical mask has the wrong length");
  }
  if (!x.allFinite()) throw Error("adasyn: input must be complete and numeric");

  std::size_t n_pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw Error("adasyn: targets must be 0 or 1");
    n_pos += v == 1 ? 1 : 0;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error("adasyn: both classes must be present");

  AdasynResult out;
  out.minority_label = n_pos <= n_neg ? 1 : 0;
  const std::size_t n_min = std::min(n_pos, n_neg);
  const std::size_t n_maj = n - n_min;
  out.requested = static_cast<std::size_t>(std::floor(static_cast<double>(n_maj - n_min) * params.beta));
  out.x = x;
  out.y.assign(y.begin(), y.end());
  if (out.requested == 0) return out;

  // Standardized copy for neighbor search.
  Eigen::MatrixXd z = x;
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const double mean = z.col(c).mean();
    z.col(c).array() -= mean;
    const double sd = n > 1 ? std::sqrt(z.col(c).squaredNorm() / static_cast<double>(n - 1)) : 0.0;
    if (sd > 0.0) z.col(c) /= sd;
  }

  std::vector<std::size_t> all(n), minority;
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] == out.minority_label) minority.push_back(i);
  }

  const std::size_t k_all = std::min(params.k, n - 1);
  std::vector<double> ratio(n_min, 0.0);
  double ratio_sum = 0.0;
  for (std::size_t m = 0; m < n_min; ++m) {
    auto nb = nearest(z, minority[m], all, k_all);
    std::size_t majority = 0;
    for (std::size_t j : nb) majority += y[j] != out.minority_label ? 1 : 0;
    ratio[m] = k_all ? static_cast<double>(majority) / static_cast<double>(k_all) : 0.0;
    ratio_sum += ratio[m];
  }

  std::vector<std::size_t> quota(n_min);
  const double g = static_cast<double>(out.requested);
  for (std::size_t m = 0; m < n_min; ++m) {
    const double weight = ratio_sum > 0.0 ? ratio[m] / ratio_sum : 1.0 / static_cast<double>(n_min);
    quota[m] = static_cast<std::size_t>(std::llround(weight * g));
  }

  const std::size_t k_min = std::min(params.k, n_min - 1);
  const std::size_t total = std::accumulate(quota.begin(), quota.end(), std::size_t{0});
  out.x.conservativeResize(static_cast<Eigen::Index>(n + total), Eigen::NoChange);
  out.y.reserve(n + total);
  out.origins.reserve(total);

  Rng rng(derive_seed(params.seed, 0xada5));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto row = static_cast<Eigen::Index>(n);
  for (std::size_t m = 0; m < n_min; ++m) {
    if (quota[m] == 0) continue;
    const std::size_t base = minority[m];
    const auto nb = nearest(z, base, minority, k_min);
    std::uniform_int_distribution<std::size_t> pick(0, nb.empty() ? 0 : nb.size() - 1);
    for (std::size_t s = 0; s < quota[m]; ++s, ++row) {
      const std::size_t other = nb.empty() ? base : nb[pick(rng)];
      const double lambda = unit(rng);
      const auto xb = x.row(static_cast<Eigen::Index>(base));
      const auto xo = x.row(static_cast<Eigen::Index>(other));
      out.x.row(row) = xb + lambda * (xo - xb);
      for (std::size_t c = 0; c < categorical.size(); ++c) {
        if (categorical[c]) out.x(row, static_cast<Eigen::Index>(c)) = lambda < 0.5 ? xb(static_cast<Eigen::Index>(c)) : xo(static_cast<Eigen::Index>(c));
      }
      out.y.push_back(out.minority_label);
      out.origins.push_back({base, other, lambda});
    }
  }
  return out;
}

}  // namespace fleethealth
