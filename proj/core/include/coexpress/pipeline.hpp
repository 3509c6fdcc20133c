// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coexpress/boosted_trees.hpp"
#include "coexpress/error.hpp"
#include "coexpress/gcn.hpp"
#include "coexpress/mask_selection.hpp"
#include "coexpress/normalization.hpp"

namespace coexpress {

inline constexpr const char* kVersion = "0.1.0";

/// Raised when a pipeline stage fails; `stage()` names it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  std::filesystem::path matrix;
  std::filesystem::path labels;
  std::vector<std::string> keep_sites;  ///< empty keeps all
  std::vector<std::string> site_order;  ///< empty uses first appearance

  NormalizationScheme scheme;

  double t_broad = 0.15;
  double t_intersect = 0.2;
  double t_pair = 0.2;
  SitePair pair;

  std::size_t folds = 10;
  std::map<std::string, int> extra_copies;

  BoosterConfig booster;

  std::size_t repeats = 3;
  std::size_t drop_per_step = 1;
  std::size_t min_genes = 3;
  ImportanceKind importance = ImportanceKind::gain;

  SweepRange sweep;
  std::map<std::string, double> threshold_override;  ///< per cohort
  std::vector<std::string> cohorts;                 ///< empty: "all" plus every site

  std::uint64_t seed = 42;
  std::filesystem::path out = "out";
  std::size_t threads = 1;
};

/// INI-style sections. Relative paths resolve against the config's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct PipelineResult {
  std::filesystem::path out;
  nlohmann::json manifest;
};

/// Runs every stage into config.out and writes manifest.json. On failure
/// leaves a `.partial` marker and throws StageError.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Content hashes of every regular file under `dir` except the manifest,
/// keyed by forward-slash relative path.
std::map<std::string, std::string> hash_tree(const std::filesystem::path& dir);

}  // namespace coexpress
