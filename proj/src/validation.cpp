#include "fleethealth/validation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include "fleethealth/errors.hpp"
#include "fleethealth/rng.hpp"

namespace fleethealth {

namespace {

// Railcar ids split into [negative groups, positive groups], each shuffled.
std::array<std::vector<std::string>, 2> shuffled_strata(std::span<const SampleId> ids, std::span<const int> y,
                                                        std::uint64_t seed) {
  if (ids.size() != y.size()) throw Error("split: ids and targets differ in length");
  std::map<std::string, int> group_label;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    int& g = group_label[ids[i].railcar_id];
    g = std::max(g, y[i]);
  }
  std::array<std::vector<std::string>, 2> strata;
  for (const auto& [id, label] : group_label) strata[static_cast<std::size_t>(label)].push_back(id);
  Rng rng(derive_seed(seed, 0x5b1));
  for (auto& s : strata) std::shuffle(s.begin(), s.end(), rng);
  return strata;
}

}  // namespace

std::vector<bool> holdout_split(std::span<const SampleId> ids, std::span<const int> y, double test_fraction,
                                std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must be in (0, 1)");
  auto strata = shuffled_strata(ids, y, seed);
  std::map<std::string, bool> is_test;
  for (const auto& s : strata) {
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(s.size())));
    for (std::size_t i = 0; i < s.size(); ++i) is_test[s[i]] = i < n_test;
  }
  std::vector<bool> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out[i] = is_test.at(ids[i].railcar_id);
  return out;
}

std::vector<int> stratified_group_folds(std::span<const SampleId> ids, std::span<const int> y, int k,
                                        std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
  auto strata = shuffled_strata(ids, y, seed);
  std::map<std::string, int> fold_of;
  int next = 0;
  for (const auto& s : strata) {
    for (const auto& id : s) {
      fold_of[id] = next;
      next = (next + 1) % k;
    }
  }
  std::vector<int> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out[i] = fold_of.at(ids[i].railcar_id);
  return out;
}

}  // namespace fleethealth
