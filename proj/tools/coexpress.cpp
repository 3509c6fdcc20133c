// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

// Command line front end. Every subcommand writes under --out.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coexpress/community_atlas.hpp"
#include "coexpress/correlation.hpp"
#include "coexpress/expression.hpp"
#include "coexpress/feature_elimination.hpp"
#include "coexpress/gcn.hpp"
#include "coexpress/mask_selection.hpp"
#include "coexpress/normalization.hpp"
#include "coexpress/parallel.hpp"
#include "coexpress/pipeline.hpp"
#include "coexpress/resampling.hpp"
#include "coexpress/rng.hpp"
#include "coexpress/synth.hpp"
#include "coexpress/text.hpp"

namespace fs = std::filesystem;
using namespace coexpress;

namespace {

struct Globals {
  std::uint64_t seed = 42;
  std::string out;
  unsigned threads = 1;
};

struct Inputs {
  std::string matrix;
  std::string labels;
};

void add_inputs(CLI::App* cmd, Inputs& in, bool labels_required = true) {
  cmd->add_option("--matrix,--in", in.matrix, "Expression matrix (genes x samples, CSV or TSV)")->required()->check(CLI::ExistingFile);
  auto* l = cmd->add_option("--labels", in.labels, "Sample to site table");
  if (labels_required) l->required();
}

ExpressionMatrix load(const Inputs& in) {
  return in.labels.empty() ? load_matrix_unlabeled(in.matrix) : load_matrix(in.matrix, in.labels, {});
}

void add_booster(CLI::App* cmd, BoosterConfig& b) {
  cmd->add_option("--learning-rate", b.learning_rate)->capture_default_str();
  cmd->add_option("--max-depth", b.max_depth)->capture_default_str();
  cmd->add_option("--n-estimators", b.n_estimators)->capture_default_str();
  cmd->add_option("--lambda", b.reg_lambda)->capture_default_str();
  cmd->add_option("--gamma", b.gamma)->capture_default_str();
  cmd->add_option("--min-child-weight", b.min_child_weight)->capture_default_str();
  cmd->add_option("--subsample", b.subsample)->capture_default_str();
  cmd->add_option("--colsample", b.colsample)->capture_default_str();
  cmd->add_option("--base-score", b.base_score)->capture_default_str();
}

ImportanceKind importance_kind(const std::string& s) {
  if (s == "gain") return ImportanceKind::gain;
  if (s == "weight") return ImportanceKind::weight;
  throw std::invalid_argument("importance must be gain or weight");
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

FoldPlan load_or_build_plan(const std::string& path, const ExpressionMatrix& m, std::size_t k, std::uint64_t seed) {
  if (path.empty()) return stratified_folds(m.labels, k, derive_seed(seed, "folds"));
  auto in = open_input(path);
  return fold_plan_from_json(nlohmann::json::parse(in));
}

void require_out(const Globals& g) {
  if (g.out.empty()) throw std::invalid_argument("--out is required");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-expression analysis of labelled expression matrices"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Root seed")->capture_default_str();
  app.add_option("--out", g.out, "Output path");
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware)")->capture_default_str();
  app.set_version_flag("--version", kVersion);

  // ingest
  Inputs ingest_in;
  std::vector<std::string> keep, site_order;
  auto* ingest = app.add_subcommand("ingest", "Load, cleanse and summarise a matrix");
  add_inputs(ingest, ingest_in);
  ingest->add_option("--keep-sites", keep, "Sites to retain")->delimiter(',');
  ingest->add_option("--site-order", site_order, "Column grouping order")->delimiter(',');
  ingest->callback([&] {
    require_out(g);
    auto m = load(ingest_in);
    if (!keep.empty()) m = keep_sites(m, keep);
    const auto c = cleanse(m, site_order.empty() ? m.sites() : site_order);
    const fs::path dir = g.out;
    write_matrix(c.matrix, dir / "cleansed.tsv");
    write_labels(c.matrix, dir / "labels.tsv");
    const auto stats = gene_stats(c.matrix);
    export_stats(stats, StatsOrder::by_mean, dir / "stats_by_mean.csv");
    export_stats(stats, StatsOrder::by_sensitivity, dir / "stats_by_sensitivity.csv");
    std::cout << "kept " << c.matrix.genes() << " genes x " << c.matrix.samples() << " samples; removed "
              << c.report.removed_all_zero << " all-zero and " << c.report.removed_duplicates << " duplicate rows\n";
  });

  // normalize
  Inputs norm_in;
  std::string scheme = "rank";
  double epsilon = 1e-6;
  auto* normalize = app.add_subcommand("normalize", "Row-wise normalization");
  add_inputs(normalize, norm_in, false);
  normalize->add_option("--scheme", scheme, "origin|range|log|rank|logit|logit_log")->capture_default_str();
  normalize->add_option("--epsilon", epsilon, "logit clamp")->capture_default_str();
  normalize->callback([&] {
    require_out(g);
    const NormalizationScheme s{parse_scheme(scheme), epsilon};
    const auto n = normalize_matrix(load(norm_in), s);
    write_matrix(n.matrix, g.out);
    for (const auto& id : n.dropped) std::cerr << "warning: dropped constant gene " << id << '\n';
  });

  // corr
  Inputs corr_in;
  std::string axis = "samples", genes_path, csv_path, svg_path;
  auto* corr = app.add_subcommand("corr", "Pairwise Pearson correlation and heatmap; --out receives group means");
  add_inputs(corr, corr_in);
  corr->add_option("--axis", axis, "samples|genes")->capture_default_str();
  corr->add_option("--genes", genes_path, "Restrict to a gene set file");
  corr->add_option("--csv", csv_path, "Reordered correlation matrix CSV")->required();
  corr->add_option("--heatmap", svg_path, "SVG heatmap (skipped above the size cap)");
  corr->callback([&] {
    const auto m = load(corr_in);
    std::optional<GeneSet> subset;
    if (!genes_path.empty()) subset = read_gene_set(genes_path);
    const Axis a = axis == "genes" ? Axis::genes : Axis::samples;
    if (axis != "genes" && axis != "samples") throw std::invalid_argument("--axis must be samples or genes");
    const auto c = pairwise(m, a, subset ? &*subset : nullptr);
    std::vector<std::string> groups;
    if (a == Axis::samples) {
      for (const auto& id : c.ids) {
        const auto it = std::find(m.sample_ids.begin(), m.sample_ids.end(), id);
        groups.push_back(m.labels[static_cast<std::size_t>(it - m.sample_ids.begin())]);
      }
    } else {
      groups.assign(c.ids.size(), "genes");
    }
    const bool wrote = export_heatmap(c, groups, csv_path,
                                      svg_path.empty() ? std::nullopt : std::optional<fs::path>(svg_path));
    if (!svg_path.empty() && !wrote) std::cerr << "warning: matrix too large for SVG; wrote CSV only\n";
    if (a == Axis::samples && !g.out.empty()) write_group_means(group_mean(c, groups), g.out);
    for (const auto& id : c.excluded) std::cerr << "warning: excluded constant entity " << id << '\n';
  });

  // select
  Inputs sel_in;
  std::string rule = "combined", pair_text = "LN,Bone", sweep_path;
  double t = 0.2;
  std::optional<double> t_pair;
  auto* select = app.add_subcommand("select", "Mask-correlation gene selection");
  add_inputs(select, sel_in);
  select->add_option("--rule", rule, "any|intersect|combined")->capture_default_str();
  select->add_option("--threshold,--t-intersect", t, "|C| threshold")->capture_default_str();
  select->add_option("--t-pair", t_pair, "Pair threshold for the combined rule (defaults to --threshold)");
  select->add_option("--pair", pair_text, "Opposite-sign site pair")->capture_default_str();
  select->add_option("--sweep", sweep_path, "Write a threshold sweep CSV here");
  select->callback([&] {
    require_out(g);
    const auto m = load(sel_in);
    const auto mc = mask_correlations(m, build_masks(m.labels));
    const auto p = split(pair_text, ',');
    if (p.size() != 2) throw std::invalid_argument("--pair must name two sites");
    const SitePair pair{std::string(trim(p[0])), std::string(trim(p[1]))};
    GeneSet s;
    if (rule == "any") s = select_by_any_mask(mc, t);
    else if (rule == "intersect") s = select_three_mask_intersect(mc, t);
    else if (rule == "combined") s = select_combined(mc, t, t_pair.value_or(t), pair);
    else throw std::invalid_argument("--rule must be any, intersect or combined");
    write_gene_set(s, g.out);
    if (!sweep_path.empty()) write_sweep_report(sweep_report(mc, threshold_grid(0.05, 0.5, 0.05), pair), sweep_path);
    std::cout << s.size() << " genes selected\n";
  });

  // folds
  std::string folds_labels, copies;
  std::size_t k = 10;
  auto* folds = app.add_subcommand("folds", "Stratified fold assignment with optional oversampling");
  folds->add_option("--labels", folds_labels, "Sample to site table")->required()->check(CLI::ExistingFile);
  folds->add_option("--k", k, "Fold count")->capture_default_str();
  folds->add_option("--extra-copies", copies, "SITE:N,... extra copies per sample");
  folds->callback([&] {
    require_out(g);
    std::vector<std::string> labels;
    for (const auto& [id, site] : load_labels(folds_labels)) labels.push_back(site);
    auto plan = stratified_folds(labels, k, derive_seed(g.seed, "folds"));
    if (!copies.empty()) plan = oversample(plan, parse_copy_factors(copies));
    for (const auto& w : plan.warnings) std::cerr << "warning: " << w << '\n';
    write_json(g.out, to_json(plan));
  });

  // train
  Inputs train_in;
  std::string train_genes, train_plan, train_importance = "gain";
  std::size_t train_k = 10, train_repeats = 10;
  BoosterConfig train_cfg;
  auto* train_cmd = app.add_subcommand("train", "Cross-validated boosted-tree accuracy on a gene set");
  add_inputs(train_cmd, train_in);
  train_cmd->add_option("--genes", train_genes, "Gene set file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--folds", train_plan, "Fold plan JSON (default: stratified with --k)");
  train_cmd->add_option("--k", train_k)->capture_default_str();
  train_cmd->add_option("--repeats", train_repeats)->capture_default_str();
  train_cmd->add_option("--importance", train_importance, "gain|weight")->capture_default_str();
  add_booster(train_cmd, train_cfg);
  train_cmd->callback([&] {
    require_out(g);
    const auto m = load(train_in);
    const auto plan = load_or_build_plan(train_plan, m, train_k, g.seed);
    train_cfg.seed = derive_seed(g.seed, "booster");
    const auto r = cross_validate(m, read_gene_set(train_genes), plan, train_cfg,
                                  {train_repeats, importance_kind(train_importance)});
    write_json(g.out, to_json(r));
    std::cout << "mean accuracy " << format_double(r.mean_accuracy) << '\n';
  });

  // rfe
  Inputs rfe_in;
  std::string rfe_genes, rfe_plan, rfe_importance = "gain";
  std::size_t rfe_k = 10;
  RfeOptions rfe_opts;
  BoosterConfig rfe_cfg;
  auto* rfe = app.add_subcommand("rfe", "Recursive feature elimination");
  add_inputs(rfe, rfe_in);
  rfe->add_option("--genes", rfe_genes, "Starting gene set")->required()->check(CLI::ExistingFile);
  rfe->add_option("--folds", rfe_plan, "Fold plan JSON (default: stratified with --k)");
  rfe->add_option("--k", rfe_k)->capture_default_str();
  rfe->add_option("--repeats", rfe_opts.cv.repeats)->capture_default_str();
  rfe->add_option("--drop", rfe_opts.drop_per_step, "Genes dropped per step")->capture_default_str();
  rfe->add_option("--min-genes", rfe_opts.min_genes)->capture_default_str();
  rfe->add_option("--importance", rfe_importance, "gain|weight")->capture_default_str();
  add_booster(rfe, rfe_cfg);
  rfe->callback([&] {
    require_out(g);
    const auto m = load(rfe_in);
    const auto plan = load_or_build_plan(rfe_plan, m, rfe_k, g.seed);
    rfe_cfg.seed = derive_seed(g.seed, "booster");
    rfe_opts.cv.importance = importance_kind(rfe_importance);
    const auto trace = recursive_eliminate(m, read_gene_set(rfe_genes), plan, rfe_cfg, rfe_opts);
    export_trace(trace, g.out);
    const auto& best = trace.steps[trace.best];
    write_gene_set(best.genes, fs::path(g.out) / "best.genes");
    std::cout << "best step " << trace.best << ": " << best.genes.size() << " genes, accuracy "
              << format_double(best.report.mean_accuracy) << '\n';
  });

  // gcn
  Inputs gcn_in;
  std::string gcn_genes, cohort = kAllCohort, sweep_text = "0.4:0.9:0.02";
  std::optional<double> fixed;
  auto* gcn = app.add_subcommand("gcn", "Threshold a co-expression network and detect communities");
  add_inputs(gcn, gcn_in);
  gcn->add_option("--genes", gcn_genes, "Gene set file")->required()->check(CLI::ExistingFile);
  gcn->add_option("--cohort", cohort, "Site or 'all'")->capture_default_str();
  gcn->add_option("--sweep", sweep_text, "lo:hi:step")->capture_default_str();
  gcn->add_option("--threshold", fixed, "Fixed threshold; skips the sweep");
  gcn->callback([&] {
    require_out(g);
    const auto wg = build_weighted(load(gcn_in), read_gene_set(gcn_genes), cohort);
    const auto sel = select_threshold(wg, parse_sweep(sweep_text), fixed, derive_seed(g.seed, "gcn:" + cohort));
    const fs::path dir = g.out;
    write_edge_list(sel.graph, dir / "edges.tsv");
    write_communities(sel.graph, sel.partition, dir / "communities.tsv");
    if (!sel.overridden) write_threshold_sweep(sel.sweep, dir / "sweep.csv");
    NodeAttribute community{"community", "int", {}};
    for (std::size_t c : sel.partition.community) community.values.push_back(std::to_string(c));
    write_graphml(sel.graph, {community}, dir / "network.graphml");
    const auto s = network_summary(sel.graph, sel.partition);
    std::cout << "threshold " << format_double(sel.threshold) << ": " << s.nodes << " nodes, " << s.edges
              << " edges, " << sel.partition.count << " communities, Q = " << format_double(s.modularity) << '\n';
  });

  // atlas
  std::string run_dir;
  std::vector<std::string> atlas_cohorts;
  auto* atlas = app.add_subcommand("atlas", "Community atlas from a pipeline output directory");
  atlas->add_option("--run", run_dir, "Pipeline output directory")->required()->check(CLI::ExistingDirectory);
  atlas->add_option("--cohorts", atlas_cohorts, "Cohorts to include (default: every gcn/ entry)")->delimiter(',');
  atlas->callback([&] {
    require_out(g);
    const fs::path run = run_dir;
    std::vector<GeneSet> sets;
    for (const char* name : {"set13", "set34", "set133", "set559"})
      sets.push_back(read_gene_set(run / "sets" / (std::string(name) + ".genes")));
    const auto tiers = tier_genes(sets);

    std::ifstream steps_in(run / "rfe" / "balanced" / "steps.json");
    if (!steps_in) throw IoError("cannot open " + (run / "rfe" / "balanced" / "steps.json").string());
    const auto steps = nlohmann::json::parse(steps_in);
    const auto& best = steps.at("steps").at(steps.at("best_step").get<std::size_t>());
    EliminationStep step;
    step.genes.gene_ids = best.at("genes").get<std::vector<std::string>>();
    step.report.importance = best.at("report").at("importance").get<std::vector<double>>();
    const auto key_index = key_gene_indices(step);

    if (atlas_cohorts.empty()) {
      for (const auto& e : fs::directory_iterator(run / "gcn"))
        if (e.is_directory()) atlas_cohorts.push_back(e.path().filename().string());
      std::sort(atlas_cohorts.begin(), atlas_cohorts.end(), [](const auto& a, const auto& b) {
        return (a == kAllCohort) != (b == kAllCohort) ? a == kAllCohort : a < b;
      });
    }
    std::vector<CohortNetwork> networks;
    for (const auto& c : atlas_cohorts) {
      auto [graph, partition] = read_network(run / "gcn" / c / "communities.tsv", run / "gcn" / c / "edges.tsv");
      networks.push_back({c, std::move(graph), std::move(partition)});
    }
    export_atlas(build_atlas(networks, tiers, key_index), networks, tiers, key_index, g.out);
  });

  // synth
  std::string spec_path;
  auto* synth = app.add_subcommand("synth", "Generate a planted-signal dataset");
  synth->add_option("--spec", spec_path, "Generator spec JSON (default settings when omitted)")->check(CLI::ExistingFile);
  synth->callback([&] {
    require_out(g);
    SynthSpec spec;
    if (!spec_path.empty()) {
      std::ifstream in(spec_path);
      spec = synth_spec_from_json(nlohmann::json::parse(in));
    } else {
      spec.seed = g.seed;
    }
    write_synth(generate(spec), g.out);
  });

  // pipeline
  std::string config_path;
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage from a config file");
  pipeline->add_option("--config", config_path, "INI config")->required();
  pipeline->callback([&] {
    auto cfg = load_pipeline_config(config_path);
    if (app.count("--seed")) cfg.seed = g.seed;
    if (app.count("--threads")) cfg.threads = g.threads;
    if (!g.out.empty()) cfg.out = g.out;
    const auto r = run_pipeline(cfg);
    std::cout << "wrote " << r.manifest.at("outputs").size() << " artifacts to " << r.out.string() << '\n';
  });

  app.parse_complete_callback([&] { set_thread_count(g.threads); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
