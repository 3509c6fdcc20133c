// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coexpress/boosted_trees.hpp"
#include "coexpress/expression.hpp"
#include "coexpress/gene_set.hpp"
#include "coexpress/resampling.hpp"

namespace coexpress {

using Confusion = std::vector<std::vector<std::size_t>>;  ///< rows = true, cols = predicted

struct ClassMetrics {
  std::optional<double> precision;  ///< nullopt for 0/0
  std::optional<double> recall;
  std::optional<double> f1;
};

std::vector<ClassMetrics> metrics(const Confusion& confusion);

/// Accuracy of always predicting the most frequent label.
double majority_baseline_accuracy(const std::vector<std::string>& labels);

struct CvReport {
  std::vector<std::string> classes;
  double mean_accuracy = 0.0;            ///< over folds, then over repeats
  std::vector<double> repeat_accuracy;   ///< mean over folds, per repeat
  Confusion confusion;                   ///< summed over folds of the final repeat
  std::vector<ClassMetrics> class_metrics;
  std::size_t folds = 0;
  std::size_t repeats = 0;
  std::size_t skipped_folds = 0;
  std::vector<std::string> gene_ids;  ///< feature order
  std::vector<double> importance;     ///< mean normalized importance over trained folds
  std::vector<std::string> warnings;
};

struct CvOptions {
  std::size_t repeats = 10;
  ImportanceKind importance = ImportanceKind::gain;
};

/// Repeated k-fold cross-validation of the booster on `genes`.
///
/// Repeat 0 uses `plan`; later repeats reshuffle with seeds derived from
/// plan.seed and reapply plan.replication. Folds whose training split holds a
/// single class are skipped with a warning.
CvReport cross_validate(const ExpressionMatrix& m, const GeneSet& genes, const FoldPlan& plan,
                        const BoosterConfig& config, const CvOptions& options = {});

struct EliminationStep {
  std::size_t dropped = 0;  ///< genes removed so far
  GeneSet genes;
  CvReport report;
};

struct EliminationTrace {
  std::vector<EliminationStep> steps;
  std::size_t best = 0;
  std::uint64_t seed = 0;
};

struct RfeOptions {
  std::size_t drop_per_step = 1;
  std::size_t min_genes = 3;
  CvOptions cv;
};

/// Best step: highest mean accuracy; accuracies within this of the maximum
/// count as tied and the step with fewer genes wins.
inline constexpr double kAccuracyTie = 1e-9;

/// Cross-validate, drop the lowest-importance genes (ties: lexicographically
/// smallest ID first), repeat while more than `min_genes` remain.
EliminationTrace recursive_eliminate(const ExpressionMatrix& m, const GeneSet& start, const FoldPlan& plan,
                                     const BoosterConfig& config, const RfeOptions& options = {});

nlohmann::json to_json(const CvReport& r);

/// trace.csv (step, dropped, surviving, accuracy) and steps.json.
void export_trace(const EliminationTrace& trace, const std::filesystem::path& dir);

}  // namespace coexpress
