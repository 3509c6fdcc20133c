// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace coexpress {

/// One row of the expanded (oversampled) sample list.
struct FoldEntry {
  std::size_t sample = 0;   ///< original sample index
  std::size_t fold = 0;
  std::size_t replica = 0;  ///< 0 for the original, 1.. for copies

  bool operator==(const FoldEntry&) const = default;
};

/// Stratified fold assignment plus any within-fold replication.
struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::string> labels;       ///< site per original sample
  std::vector<std::size_t> assignment;   ///< fold per original sample
  std::map<std::string, int> replication;  ///< extra copies per site
  std::vector<FoldEntry> expanded;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  bool operator==(const FoldPlan&) const = default;
};

/// Seeded shuffle inside each class, then round-robin over folds. The
/// round-robin cursor carries over between classes so fold sizes also stay
/// within one of each other.
FoldPlan stratified_folds(const std::vector<std::string>& labels, std::size_t k, std::uint64_t seed);

/// Each sample of site s appears 1 + extra_copies[s] times, always in its own
/// fold. Sites missing from the map get no copies.
FoldPlan oversample(const FoldPlan& plan, const std::map<std::string, int>& extra_copies);

struct CvSplit {
  std::vector<std::size_t> train;       ///< positions in plan.expanded
  std::vector<std::size_t> validation;  ///< positions in plan.expanded
};

CvSplit cv_split(const FoldPlan& plan, std::size_t validation_fold);

/// Original sample index for each expanded position.
std::vector<std::size_t> samples_at(const FoldPlan& plan, const std::vector<std::size_t>& positions);

/// Parse "LN:1,Bone:2,Liver:5".
std::map<std::string, int> parse_copy_factors(const std::string& text);

nlohmann::json to_json(const FoldPlan& plan);
FoldPlan fold_plan_from_json(const nlohmann::json& j);

}  // namespace coexpress
