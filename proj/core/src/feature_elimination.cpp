// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "coexpress/feature_elimination.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "coexpress/error.hpp"
#include "coexpress/parallel.hpp"
#include "coexpress/rng.hpp"
#include "coexpress/text.hpp"

namespace coexpress {
namespace {

struct FoldOutcome {
  bool skipped = false;
  std::string warning;
  double accuracy = 0.0;
  Confusion confusion;
  std::vector<double> importance;
};

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = x.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

std::vector<ClassMetrics> metrics(const Confusion& confusion) {
  const std::size_t k = confusion.size();
  std::vector<ClassMetrics> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (confusion[c].size() != k) throw std::invalid_argument("confusion matrix must be square");
    const double tp = static_cast<double>(confusion[c][c]);
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row += static_cast<double>(confusion[c][j]);
      col += static_cast<double>(confusion[j][c]);
    }
    auto& m = out[c];
    if (col > 0.0) m.precision = tp / col;
    if (row > 0.0) m.recall = tp / row;
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
      m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  return out;
}

double majority_baseline_accuracy(const std::vector<std::string>& labels) {
  if (labels.empty()) throw std::invalid_argument("no labels");
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  std::size_t top = 0;
  for (const auto& [_, n] : counts) top = std::max(top, n);
  return static_cast<double>(top) / static_cast<double>(labels.size());
}

CvReport cross_validate(const ExpressionMatrix& m, const GeneSet& genes, const FoldPlan& plan,
                        const BoosterConfig& config, const CvOptions& options) {
  if (plan.labels != m.labels) throw ValidationError("fold plan was built for different sample labels");
  if (options.repeats == 0) throw std::invalid_argument("at least one repeat is required");
  if (genes.gene_ids.empty()) throw std::invalid_argument("cross-validation needs at least one gene");

  const auto sub = select_genes(m, genes.gene_ids);
  Matrix x(sub.samples(), sub.genes());
  for (std::size_t g = 0; g < sub.genes(); ++g)
    for (std::size_t s = 0; s < sub.samples(); ++s) x(s, g) = sub.values(g, s);

  CvReport report;
  report.classes = m.sites();
  report.gene_ids = genes.gene_ids;
  report.folds = plan.k;
  report.repeats = options.repeats;
  const std::size_t k_classes = report.classes.size();
  std::vector<std::size_t> y(m.samples());
  for (std::size_t s = 0; s < m.samples(); ++s)
    y[s] = std::find(report.classes.begin(), report.classes.end(), m.labels[s]) - report.classes.begin();

  std::vector<FoldPlan> plans{plan};
  for (std::size_t r = 1; r < options.repeats; ++r) {
    auto fresh = stratified_folds(plan.labels, plan.k, derive_seed(plan.seed, "cv-repeat-" + std::to_string(r)));
    plans.push_back(oversample(fresh, plan.replication));
  }

  std::vector<FoldOutcome> outcomes(options.repeats * plan.k);
  parallel_for(outcomes.size(), [&](std::size_t task) {
    const auto& p = plans[task / plan.k];
    const std::size_t fold = task % plan.k;
    auto& out = outcomes[task];
    const auto split = cv_split(p, fold);
    const auto train_rows = samples_at(p, split.train);
    const auto valid_rows = samples_at(p, split.validation);

    std::vector<std::size_t> train_y;
    for (std::size_t s : train_rows) train_y.push_back(y[s]);
    const auto distinct = std::set<std::size_t>(train_y.begin(), train_y.end()).size();
    if (valid_rows.empty() || distinct < 2) {
      out.skipped = true;
      out.warning = "fold " + std::to_string(fold) + " of repeat " + std::to_string(task / plan.k) +
                    (valid_rows.empty() ? " has no validation samples" : " trains on a single class");
      return;
    }

    const auto model = train(gather_rows(x, train_rows), train_y, report.classes, config, genes.gene_ids);
    const auto pred = predict(model, gather_rows(x, valid_rows));
    out.confusion.assign(k_classes, std::vector<std::size_t>(k_classes, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < valid_rows.size(); ++i) {
      const std::size_t truth = y[valid_rows[i]];
      ++out.confusion[truth][pred.labels[i]];
      correct += truth == pred.labels[i];
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(valid_rows.size());
    out.importance = feature_importance(model, options.importance);
  });

  report.confusion.assign(k_classes, std::vector<std::size_t>(k_classes, 0));
  report.importance.assign(genes.size(), 0.0);
  std::size_t trained = 0;
  for (std::size_t r = 0; r < options.repeats; ++r) {
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t f = 0; f < plan.k; ++f) {
      const auto& o = outcomes[r * plan.k + f];
      if (o.skipped) {
        ++report.skipped_folds;
        report.warnings.push_back(o.warning);
        continue;
      }
      sum += o.accuracy;
      ++used;
      ++trained;
      for (std::size_t g = 0; g < genes.size(); ++g) report.importance[g] += o.importance[g];
      if (r + 1 == options.repeats)
        for (std::size_t a = 0; a < k_classes; ++a)
          for (std::size_t b = 0; b < k_classes; ++b) report.confusion[a][b] += o.confusion[a][b];
    }
    if (used == 0) throw ValidationError("every fold of repeat " + std::to_string(r) + " was skipped");
    report.repeat_accuracy.push_back(sum / static_cast<double>(used));
  }
  for (double& v : report.importance) v /= static_cast<double>(trained);
  report.mean_accuracy = std::accumulate(report.repeat_accuracy.begin(), report.repeat_accuracy.end(), 0.0) /
                         static_cast<double>(report.repeat_accuracy.size());
  report.class_metrics = metrics(report.confusion);
  return report;
}

EliminationTrace recursive_eliminate(const ExpressionMatrix& m, const GeneSet& start, const FoldPlan& plan,
                                     const BoosterConfig& config, const RfeOptions& options) {
  if (options.drop_per_step == 0) throw std::invalid_argument("drop_per_step must be positive");
  if (start.size() <= options.min_genes)
    throw std::invalid_argument("elimination needs more than " + std::to_string(options.min_genes) + " genes");

  EliminationTrace trace;
  trace.seed = plan.seed;
  GeneSet current = start;
  std::size_t dropped = 0;
  while (true) {
    current.name = start.name + "_step" + std::to_string(trace.steps.size());
    current.provenance = "rfe from " + start.name + ";dropped=" + std::to_string(dropped);
    auto report = cross_validate(m, current, plan, config, options.cv);
    const auto importance = report.importance;
    trace.steps.push_back({dropped, current, std::move(report)});
    if (current.size() <= options.min_genes) break;

    std::vector<std::size_t> idx(current.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (importance[a] != importance[b]) return importance[a] < importance[b];
      return current.gene_ids[a] < current.gene_ids[b];
    });
    const std::size_t n_drop = std::min(options.drop_per_step, current.size() - options.min_genes);
    std::vector<char> remove(current.size(), 0);
    for (std::size_t i = 0; i < n_drop; ++i) remove[idx[i]] = 1;
    GeneSet next;
    for (std::size_t i = 0; i < current.size(); ++i)
      if (!remove[i]) next.gene_ids.push_back(current.gene_ids[i]);
    dropped += n_drop;
    current = std::move(next);
  }

  double top = trace.steps.front().report.mean_accuracy;
  for (const auto& s : trace.steps) top = std::max(top, s.report.mean_accuracy);
  for (std::size_t i = 0; i < trace.steps.size(); ++i)
    if (trace.steps[i].report.mean_accuracy >= top - kAccuracyTie) trace.best = i;
  return trace;
}

nlohmann::json to_json(const CvReport& r) {
  nlohmann::json j;
  j["classes"] = r.classes;
  j["mean_accuracy"] = r.mean_accuracy;
  j["repeat_accuracy"] = r.repeat_accuracy;
  j["confusion"] = r.confusion;
  auto& mj = j["metrics"] = nlohmann::json::array();
  for (std::size_t c = 0; c < r.class_metrics.size(); ++c) {
    const auto& m = r.class_metrics[c];
    mj.push_back({{"class", r.classes[c]},
                  {"precision", optional_json(m.precision)},
                  {"recall", optional_json(m.recall)},
                  {"f1", optional_json(m.f1)}});
  }
  j["folds"] = r.folds;
  j["repeats"] = r.repeats;
  j["skipped_folds"] = r.skipped_folds;
  j["gene_ids"] = r.gene_ids;
  j["importance"] = r.importance;
  j["warnings"] = r.warnings;
  return j;
}

void export_trace(const EliminationTrace& trace, const std::filesystem::path& dir) {
  {
    auto out = open_output(dir / "trace.csv");
    out << "step,dropped,surviving,accuracy\n";
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
      const auto& s = trace.steps[i];
      out << i << ',' << s.dropped << ',' << s.genes.size() << ',' << format_double(s.report.mean_accuracy) << '\n';
    }
    if (!out) throw IoError("failed writing trace.csv");
  }
  nlohmann::json j;
  j["seed"] = trace.seed;
  j["best_step"] = trace.best;
  auto& steps = j["steps"] = nlohmann::json::array();
  for (const auto& s : trace.steps)
    steps.push_back({{"dropped", s.dropped}, {"genes", s.genes.gene_ids}, {"report", to_json(s.report)}});
  auto out = open_output(dir / "steps.json");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing steps.json");
}

}  // namespace coexpress
