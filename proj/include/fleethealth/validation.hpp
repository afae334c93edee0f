#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fleethealth/core_model.hpp"

namespace fleethealth {

// Train/test split that keeps all samples of one railcar together and
// stratifies railcars by whether any of their samples is positive.
// Returns true for rows assigned to the test side.
std::vector<bool> holdout_split(std::span<const SampleId> ids, std::span<const int> y, double test_fraction,
                                std::uint64_t seed);

// k folds with the same grouping and stratification; returns a fold index per row.
std::vector<int> stratified_group_folds(std::span<const SampleId> ids, std::span<const int> y, int k,
                                        std::uint64_t seed);

}  // namespace fleethealth
