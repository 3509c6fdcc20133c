// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "coexpress/boosted_trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "coexpress/error.hpp"
#include "coexpress/rng.hpp"

namespace coexpress {
namespace {

constexpr double kMinHessian = 1e-16;

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
};

struct BestSplit {
  double gain = -std::numeric_limits<double>::infinity();
  int feature = -1;
  double threshold = 0.0;
};

struct ScanState {
  double gl = 0.0;
  double hl = 0.0;
  double last = 0.0;
  bool has_last = false;
};

double split_threshold(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid > lo ? mid : hi;
}

}  // namespace

void BoosterConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be at least 1");
  if (n_estimators < 0) throw std::invalid_argument("n_estimators must be non-negative");
  if (!(reg_lambda >= 0.0)) throw std::invalid_argument("reg_lambda must be non-negative");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be non-negative");
  if (!(min_child_weight >= 0.0)) throw std::invalid_argument("min_child_weight must be non-negative");
  if (!(subsample > 0.0 && subsample <= 1.0)) throw std::invalid_argument("subsample must lie in (0, 1]");
  if (!(colsample > 0.0 && colsample <= 1.0)) throw std::invalid_argument("colsample must lie in (0, 1]");
  if (!(base_score > 0.0 && base_score < 1.0)) throw std::invalid_argument("base_score must lie in (0, 1)");
}

double RegressionTree::predict(std::span<const double> x) const {
  int n = 0;
  while (!nodes[n].is_leaf()) n = x[nodes[n].feature] < nodes[n].threshold ? nodes[n].left : nodes[n].right;
  return nodes[n].weight;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes[i].is_leaf()) {
      d[nodes[i].left] = d[i] + 1;
      d[nodes[i].right] = d[i] + 1;
    }
  }
  return deepest;
}

std::vector<std::vector<std::size_t>> presort_columns(const Matrix& x) {
  std::vector<std::vector<std::size_t>> sorted(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& order = sorted[f];
    order.resize(x.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
  }
  return sorted;
}

RegressionTree fit_tree(const TreeFitInput& input, const BoosterConfig& config) {
  const Matrix& x = *input.x;
  const double lambda = config.reg_lambda;

  std::vector<std::vector<std::size_t>> local_sorted;
  const auto* sorted = input.sorted;
  if (!sorted) {
    local_sorted = presort_columns(x);
    sorted = &local_sorted;
  }

  RegressionTree tree;
  std::vector<NodeStats> stats(1);
  std::vector<int> node_of(x.rows(), -1);
  for (std::size_t r : input.rows) {
    node_of[r] = 0;
    stats[0].g += input.grad[r];
    stats[0].h += input.hess[r];
  }
  tree.nodes.emplace_back();

  auto score = [lambda](double g, double h) { return g * g / (h + lambda); };

  std::vector<int> frontier{0};
  for (int depth = 0; depth < config.max_depth && !frontier.empty(); ++depth) {
    std::vector<BestSplit> best(tree.nodes.size());
    std::vector<ScanState> scan(tree.nodes.size());
    std::vector<char> active(tree.nodes.size(), 0);
    for (int n : frontier) active[n] = 1;

    for (std::size_t f : input.features) {
      for (int n : frontier) scan[n] = ScanState{};
      for (std::size_t r : (*sorted)[f]) {
        const int n = node_of[r];
        if (n < 0 || !active[n]) continue;
        auto& st = scan[n];
        const double v = x(r, f);
        if (st.has_last && v > st.last) {
          const double gr = stats[n].g - st.gl;
          const double hr = stats[n].h - st.hl;
          if (st.hl >= config.min_child_weight && hr >= config.min_child_weight) {
            const double gain =
                0.5 * (score(st.gl, st.hl) + score(gr, hr) - score(stats[n].g, stats[n].h));
            if (gain > best[n].gain) best[n] = {gain, static_cast<int>(f), split_threshold(st.last, v)};
          }
        }
        st.gl += input.grad[r];
        st.hl += input.hess[r];
        st.last = v;
        st.has_last = true;
      }
    }

    std::vector<int> next;
    for (int n : frontier) {
      const auto& b = best[n];
      if (b.feature < 0 || !(b.gain - config.gamma > kMinSplitGain)) continue;
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stats.resize(tree.nodes.size());
      auto& node = tree.nodes[n];
      node.feature = b.feature;
      node.threshold = b.threshold;
      node.left = left;
      node.right = left + 1;
      node.gain = b.gain;
      next.push_back(left);
      next.push_back(left + 1);
    }
    if (next.empty()) break;
    for (std::size_t r : input.rows) {
      const int n = node_of[r];
      const auto& node = tree.nodes[n];
      if (node.is_leaf()) continue;
      const int child = x(r, node.feature) < node.threshold ? node.left : node.right;
      node_of[r] = child;
      stats[child].g += input.grad[r];
      stats[child].h += input.hess[r];
    }
    frontier = std::move(next);
  }

  for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
    auto& node = tree.nodes[n];
    node.cover = stats[n].h;
    if (node.is_leaf()) node.weight = -stats[n].g / (stats[n].h + lambda);
  }
  return tree;
}

double BoostedEnsemble::base_margin() const { return std::log(config.base_score / (1.0 - config.base_score)); }

void softmax(std::span<double> margins) {
  const double top = *std::max_element(margins.begin(), margins.end());
  double sum = 0.0;
  for (double& m : margins) {
    m = std::exp(m - top);
    sum += m;
  }
  for (double& m : margins) m /= sum;
}

double log_loss(const Matrix& probabilities, std::span<const std::size_t> y) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    total -= std::log(std::max(probabilities(i, y[i]), std::numeric_limits<double>::min()));
  return total / static_cast<double>(y.size());
}

namespace {

Matrix probabilities_from(const Matrix& margins) {
  Matrix p = margins;
  for (std::size_t i = 0; i < p.rows(); ++i) softmax(p.row(i));
  return p;
}

}  // namespace

BoostedEnsemble train(const Matrix& x, std::span<const std::size_t> y, std::vector<std::string> class_names,
                      const BoosterConfig& config, std::vector<std::string> feature_names) {
  config.validate();
  if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("training matrix is empty");
  if (y.size() != x.rows()) throw std::invalid_argument("label count differs from sample count");
  if (class_names.size() < 2) throw std::invalid_argument("need at least two classes");
  if (!feature_names.empty() && feature_names.size() != x.cols())
    throw std::invalid_argument("feature name count differs from feature count");
  for (double v : x.data())
    if (!std::isfinite(v)) throw std::invalid_argument("training matrix has non-finite values");
  std::vector<char> seen(class_names.size(), 0);
  for (std::size_t label : y) {
    if (label >= class_names.size()) throw std::invalid_argument("label index out of range");
    seen[label] = 1;
  }
  if (std::count(seen.begin(), seen.end(), 1) < 2) throw std::invalid_argument("training labels hold a single class");

  const std::size_t n = x.rows();
  const std::size_t k = class_names.size();

  BoostedEnsemble e;
  e.config = config;
  e.class_names = std::move(class_names);
  e.feature_names = std::move(feature_names);
  e.n_features = x.cols();

  const auto sorted = presort_columns(x);
  Matrix margins(n, k, e.base_margin());
  Matrix prob = probabilities_from(margins);
  e.loss_trace.push_back(log_loss(prob, y));

  Rng rng(config.seed);
  std::vector<double> grad(n), hess(n);
  std::vector<std::size_t> all_features(x.cols());
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});

  for (int round = 0; round < config.n_estimators; ++round) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (config.subsample >= 1.0 || rng.uniform() < config.subsample) rows.push_back(i);

    std::vector<RegressionTree> round_trees;
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = prob(i, c);
        grad[i] = p - (y[i] == c ? 1.0 : 0.0);
        hess[i] = std::max(p * (1.0 - p), kMinHessian);
      }
      TreeFitInput input{&x, grad, hess, rows, all_features, &sorted};
      if (config.colsample < 1.0) {
        auto shuffled = all_features;
        rng.shuffle(std::span<std::size_t>(shuffled));
        const auto keep = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(config.colsample * static_cast<double>(x.cols()))));
        shuffled.resize(keep);
        std::sort(shuffled.begin(), shuffled.end());
        input.features = std::move(shuffled);
      }
      round_trees.push_back(fit_tree(input, config));
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < n; ++i) margins(i, c) += config.learning_rate * round_trees[c].predict(x.row(i));
      e.trees.push_back(std::move(round_trees[c]));
    }
    prob = probabilities_from(margins);
    e.loss_trace.push_back(log_loss(prob, y));
  }
  return e;
}

Prediction predict(const BoostedEnsemble& e, const Matrix& x) {
  if (x.cols() != e.n_features) throw std::invalid_argument("feature count differs from the trained model");
  const std::size_t k = e.n_classes();
  Prediction out;
  out.probabilities = Matrix(x.rows(), k, e.base_margin());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = out.probabilities.row(i);
    for (std::size_t t = 0; t < e.trees.size(); ++t) row[t % k] += e.config.learning_rate * e.trees[t].predict(x.row(i));
    softmax(row);
    out.labels.push_back(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return out;
}

std::vector<double> feature_importance(const BoostedEnsemble& e, ImportanceKind kind) {
  std::vector<double> score(e.n_features, 0.0);
  for (const auto& tree : e.trees)
    for (const auto& node : tree.nodes)
      if (!node.is_leaf()) score[node.feature] += kind == ImportanceKind::gain ? node.gain : 1.0;
  const double total = std::accumulate(score.begin(), score.end(), 0.0);
  if (total > 0.0)
    for (double& s : score) s /= total;
  return score;
}

nlohmann::json to_json(const BoostedEnsemble& e) {
  nlohmann::json j;
  j["schema_version"] = 1;
  const auto& c = e.config;
  j["config"] = {{"learning_rate", c.learning_rate}, {"max_depth", c.max_depth},
                 {"n_estimators", c.n_estimators},   {"reg_lambda", c.reg_lambda},
                 {"gamma", c.gamma},                 {"min_child_weight", c.min_child_weight},
                 {"subsample", c.subsample},         {"colsample", c.colsample},
                 {"base_score", c.base_score},       {"seed", c.seed},
                 {"objective", "multi:softmax"}};
  j["class_names"] = e.class_names;
  j["feature_names"] = e.feature_names;
  j["n_features"] = e.n_features;
  auto& trees = j["trees"] = nlohmann::json::array();
  for (const auto& t : e.trees) {
    auto nodes = nlohmann::json::array();
    for (const auto& node : t.nodes) {
      if (node.is_leaf()) {
        nodes.push_back({{"leaf", node.weight}, {"cover", node.cover}});
      } else {
        nodes.push_back({{"feature", node.feature},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right},
                         {"gain", node.gain},
                         {"cover", node.cover}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  j["loss_trace"] = e.loss_trace;
  j["importance_gain"] = feature_importance(e, ImportanceKind::gain);
  j["importance_weight"] = feature_importance(e, ImportanceKind::weight);
  return j;
}

BoostedEnsemble ensemble_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != 1) throw ParseError("unsupported model schema");
  BoostedEnsemble e;
  const auto& c = j.at("config");
  e.config.learning_rate = c.at("learning_rate").get<double>();
  e.config.max_depth = c.at("max_depth").get<int>();
  e.config.n_estimators = c.at("n_estimators").get<int>();
  e.config.reg_lambda = c.at("reg_lambda").get<double>();
  e.config.gamma = c.at("gamma").get<double>();
  e.config.min_child_weight = c.at("min_child_weight").get<double>();
  e.config.subsample = c.at("subsample").get<double>();
  e.config.colsample = c.at("colsample").get<double>();
  e.config.base_score = c.at("base_score").get<double>();
  e.config.seed = c.at("seed").get<std::uint64_t>();
  e.class_names = j.at("class_names").get<std::vector<std::string>>();
  e.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  e.n_features = j.at("n_features").get<std::size_t>();
  for (const auto& tj : j.at("trees")) {
    RegressionTree t;
    for (const auto& nj : tj) {
      TreeNode node;
      node.cover = nj.at("cover").get<double>();
      if (nj.contains("leaf")) {
        node.weight = nj.at("leaf").get<double>();
      } else {
        node.feature = nj.at("feature").get<int>();
        node.threshold = nj.at("threshold").get<double>();
        node.left = nj.at("left").get<int>();
        node.right = nj.at("right").get<int>();
        node.gain = nj.at("gain").get<double>();
      }
      t.nodes.push_back(node);
    }
    e.trees.push_back(std::move(t));
  }
  e.loss_trace = j.at("loss_trace").get<std::vector<double>>();
  return e;
}

}  // namespace coexpress
