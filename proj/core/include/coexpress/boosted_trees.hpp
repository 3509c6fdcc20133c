// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coexpress/matrix.hpp"

namespace coexpress {

/// Booster hyperparameters. Defaults follow the reference configuration.
struct BoosterConfig {
  double learning_rate = 0.1;
  int max_depth = 3;
  int n_estimators = 100;
  double reg_lambda = 1.0;
  double gamma = 0.0;
  double min_child_weight = 1.0;
  double subsample = 1.0;
  double colsample = 1.0;
  double base_score = 0.5;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;

  bool operator==(const BoosterConfig&) const = default;
};

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  double threshold = 0.0;  ///< x[feature] < threshold goes left
  int left = -1;
  int right = -1;
  double weight = 0.0;  ///< leaf value -G / (H + lambda), before learning rate
  double gain = 0.0;    ///< split loss reduction (before gamma)
  double cover = 0.0;   ///< sum of Hessians reaching the node

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  ///< nodes[0] is the root

  double predict(std::span<const double> x) const;
  int depth() const;

  bool operator==(const RegressionTree&) const = default;
};

/// Inputs to one tree fit. Rows outside `rows` do not participate.
struct TreeFitInput {
  const Matrix* x = nullptr;
  std::span<const double> grad;
  std::span<const double> hess;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> features;  ///< candidate features, ascending
  /// Optional per-feature row order of `x` sorted by value; built when null.
  const std::vector<std::vector<std::size_t>>* sorted = nullptr;
};

/// Row indices of `x` sorted by each column (stable).
std::vector<std::vector<std::size_t>> presort_columns(const Matrix& x);

/// Exact greedy growth of one second-order regression tree.
///
/// Split candidates are midpoints between consecutive distinct values. The
/// first maximal gain wins, scanning features and thresholds in ascending
/// order. A split is made only when gain - gamma exceeds kMinSplitGain and
/// both children carry at least min_child_weight of Hessian.
RegressionTree fit_tree(const TreeFitInput& input, const BoosterConfig& config);

inline constexpr double kMinSplitGain = 1e-6;

struct BoostedEnsemble {
  BoosterConfig config;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;
  std::size_t n_features = 0;
  /// Round-major: trees[round * n_classes + class].
  std::vector<RegressionTree> trees;
  /// Mean training log-loss before the first round and after every round.
  std::vector<double> loss_trace;

  std::size_t n_classes() const noexcept { return class_names.size(); }
  std::size_t n_rounds() const noexcept { return n_classes() ? trees.size() / n_classes() : 0; }
  double base_margin() const;

  bool operator==(const BoostedEnsemble&) const = default;
};

/// Newton boosting on the softmax cross-entropy. X is samples x features and
/// y holds class indices into `class_names`.
BoostedEnsemble train(const Matrix& x, std::span<const std::size_t> y, std::vector<std::string> class_names,
                      const BoosterConfig& config, std::vector<std::string> feature_names = {});

struct Prediction {
  std::vector<std::size_t> labels;  ///< argmax, ties to the lowest class index
  Matrix probabilities;             ///< samples x classes
};

Prediction predict(const BoostedEnsemble& e, const Matrix& x);

/// Softmax in place with max subtraction.
void softmax(std::span<double> margins);

/// Mean -log p(true class).
double log_loss(const Matrix& probabilities, std::span<const std::size_t> y);

enum class ImportanceKind { gain, weight };

/// Per-feature share of total split gain (gain) or of split count (weight).
/// All zeros when the ensemble has no splits.
std::vector<double> feature_importance(const BoostedEnsemble& e, ImportanceKind kind = ImportanceKind::gain);

nlohmann::json to_json(const BoostedEnsemble& e);
BoostedEnsemble ensemble_from_json(const nlohmann::json& j);

}  // namespace coexpress
