// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "coexpress/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "coexpress/community_atlas.hpp"
#include "coexpress/expression.hpp"
#include "coexpress/feature_elimination.hpp"
#include "coexpress/hash.hpp"
#include "coexpress/parallel.hpp"
#include "coexpress/resampling.hpp"
#include "coexpress/rng.hpp"
#include "coexpress/text.hpp"

namespace coexpress {
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kConfigKeys{
    {"input", {"matrix", "labels", "keep_sites", "site_order"}},
    {"normalize", {"scheme", "epsilon"}},
    {"select", {"t_broad", "t_intersect", "t_pair", "pair"}},
    {"folds", {"k", "extra_copies"}},
    {"booster",
     {"learning_rate", "max_depth", "n_estimators", "reg_lambda", "gamma", "min_child_weight", "subsample",
      "colsample", "base_score"}},
    {"rfe", {"repeats", "drop_per_step", "min_genes", "importance"}},
    {"gcn", {"sweep", "cohorts", "thresholds"}},
    {"run", {"seed", "out", "threads"}},
};

double number(const std::string& key, const std::string& text) {
  const auto v = parse_double(trim(text));
  if (!v) throw ParseError("config key '" + key + "' is not a number: '" + text + "'");
  return *v;
}

template <class Int>
Int integer(const std::string& key, const std::string& text) {
  const auto s = trim(text);
  Int v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError("config key '" + key + "' is not a non-negative integer: '" + text + "'");
  return v;
}

std::vector<std::string> list(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& item : split(text, ','))
    if (const auto t = trim(item); !t.empty()) out.emplace_back(t);
  return out;
}

std::map<std::string, double> cohort_thresholds(const std::string& text) {
  std::map<std::string, double> out;
  for (const auto& item : list(text)) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) throw ParseError("threshold override '" + item + "' is not COHORT:T");
    out[std::string(trim(item.substr(0, colon)))] = number("gcn.thresholds", item.substr(colon + 1));
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& text) {
  const fs::path p(text);
  return p.is_absolute() ? p : base / p;
}

void write_text(const fs::path& path, const std::string& body) {
  auto out = open_output(path);
  out << body;
  if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void write_mask_correlations(const MaskCorrelations& mc, const fs::path& path) {
  auto out = open_output(path);
  out << "gene_id";
  for (const auto& s : mc.sites) out << ',' << s;
  out << '\n';
  for (std::size_t g = 0; g < mc.gene_ids.size(); ++g) {
    out << mc.gene_ids[g];
    for (double v : mc.values[g]) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

GeneSet renamed(GeneSet s, std::string name) {
  s.name = std::move(name);
  return s;
}

/// Runs elimination when the start set is large enough, otherwise a single
/// cross-validation so downstream stages still get a best step.
EliminationTrace eliminate_or_evaluate(const ExpressionMatrix& m, const GeneSet& start, const FoldPlan& plan,
                                       const BoosterConfig& booster, const RfeOptions& opts) {
  if (start.size() > opts.min_genes) return recursive_eliminate(m, start, plan, booster, opts);
  EliminationTrace trace;
  trace.seed = plan.seed;
  trace.steps.push_back({0, start, cross_validate(m, start, plan, booster, opts.cv)});
  return trace;
}

std::vector<NodeAttribute> node_attributes(const GeneGraph& g, const Partition& p, const TierMap& tiers,
                                           const std::map<std::string, int>& key_index) {
  NodeAttribute community{"community", "int", {}};
  NodeAttribute tier{"tier", "string", {}};
  NodeAttribute key{"key_index", "int", {}};
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    community.values.push_back(std::to_string(p.community[v]));
    const auto t = tiers.tier(g.nodes[v]);
    tier.values.push_back(t ? tiers.columns[*t] : "none");
    const auto k = key_index.find(g.nodes[v]);
    key.values.push_back(k == key_index.end() ? "-1" : std::to_string(k->second));
  }
  return {community, tier, key};
}

}  // namespace

PipelineConfig load_pipeline_config(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("config file not found: " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }

  for (const auto& [section, body] : tree) {
    const auto known = kConfigKeys.find(section);
    if (known == kConfigKeys.end()) throw ParseError("unknown config section [" + section + "]");
    for (const auto& [key, _] : body)
      if (!known->second.contains(key)) throw ParseError("unknown config key '" + section + "." + key + "'");
  }

  const fs::path base = path.parent_path();
  PipelineConfig c;
  auto get = [&](const char* key) { return tree.get_optional<std::string>(pt::ptree::path_type(key, '/')); };

  if (auto v = get("input/matrix")) c.matrix = resolve(base, *v);
  if (auto v = get("input/labels")) c.labels = resolve(base, *v);
  if (auto v = get("input/keep_sites")) c.keep_sites = list(*v);
  if (auto v = get("input/site_order")) c.site_order = list(*v);

  if (auto v = get("normalize/scheme")) c.scheme.variant = parse_scheme(trim(*v));
  if (auto v = get("normalize/epsilon")) c.scheme.epsilon = number("normalize.epsilon", *v);

  if (auto v = get("select/t_broad")) c.t_broad = number("select.t_broad", *v);
  if (auto v = get("select/t_intersect")) c.t_intersect = number("select.t_intersect", *v);
  if (auto v = get("select/t_pair")) c.t_pair = number("select.t_pair", *v);
  if (auto v = get("select/pair")) {
    const auto p = list(*v);
    if (p.size() != 2) throw ParseError("select.pair must name two sites");
    c.pair = {p[0], p[1]};
  }

  if (auto v = get("folds/k")) c.folds = integer<std::size_t>("folds.k", *v);
  if (auto v = get("folds/extra_copies")) c.extra_copies = parse_copy_factors(*v);

  auto& b = c.booster;
  if (auto v = get("booster/learning_rate")) b.learning_rate = number("booster.learning_rate", *v);
  if (auto v = get("booster/max_depth")) b.max_depth = integer<int>("booster.max_depth", *v);
  if (auto v = get("booster/n_estimators")) b.n_estimators = integer<int>("booster.n_estimators", *v);
  if (auto v = get("booster/reg_lambda")) b.reg_lambda = number("booster.reg_lambda", *v);
  if (auto v = get("booster/gamma")) b.gamma = number("booster.gamma", *v);
  if (auto v = get("booster/min_child_weight")) b.min_child_weight = number("booster.min_child_weight", *v);
  if (auto v = get("booster/subsample")) b.subsample = number("booster.subsample", *v);
  if (auto v = get("booster/colsample")) b.colsample = number("booster.colsample", *v);
  if (auto v = get("booster/base_score")) b.base_score = number("booster.base_score", *v);

  if (auto v = get("rfe/repeats")) c.repeats = integer<std::size_t>("rfe.repeats", *v);
  if (auto v = get("rfe/drop_per_step")) c.drop_per_step = integer<std::size_t>("rfe.drop_per_step", *v);
  if (auto v = get("rfe/min_genes")) c.min_genes = integer<std::size_t>("rfe.min_genes", *v);
  if (auto v = get("rfe/importance")) {
    const auto s = trim(*v);
    if (s == "gain") c.importance = ImportanceKind::gain;
    else if (s == "weight") c.importance = ImportanceKind::weight;
    else throw ParseError("rfe.importance must be gain or weight");
  }

  if (auto v = get("gcn/sweep")) c.sweep = parse_sweep(std::string(trim(*v)));
  if (auto v = get("gcn/cohorts")) c.cohorts = list(*v);
  if (auto v = get("gcn/thresholds")) c.threshold_override = cohort_thresholds(*v);

  if (auto v = get("run/seed")) c.seed = integer<std::uint64_t>("run.seed", *v);
  if (auto v = get("run/out")) c.out = resolve(base, *v);
  if (auto v = get("run/threads")) c.threads = integer<std::size_t>("run.threads", *v);

  if (c.matrix.empty()) throw ParseError("config is missing input.matrix");
  if (c.labels.empty()) throw ParseError("config is missing input.labels");
  return c;
}

std::map<std::string, std::string> hash_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir).generic_string();
    if (rel == "manifest.json" || rel == ".partial") continue;
    out[rel] = sha256_file(entry.path());
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  const fs::path out = cfg.out;
  fs::create_directories(out);
  fs::remove(out / ".partial");
  fs::remove(out / "manifest.json");
  set_thread_count(static_cast<unsigned>(cfg.threads));

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["root_seed"] = cfg.seed;
  auto& seeds = manifest["seeds"];
  auto& thresholds = manifest["thresholds"];
  auto& sizes = manifest["set_sizes"];
  manifest["warnings"] = nlohmann::json::array();

  std::string stage;
  try {
    stage = "config";
    if (!(cfg.t_broad <= cfg.t_intersect))
      throw ValidationError("t_broad must not exceed t_intersect or the selected sets would not nest");
    cfg.scheme.validate();
    cfg.booster.validate();

    stage = "ingest";
    ExpressionMatrix raw = load_matrix(cfg.matrix, cfg.labels, {});
    manifest["inputs"] = nlohmann::json::array(
        {{{"role", "matrix"}, {"name", cfg.matrix.filename().string()}, {"sha256", sha256_file(cfg.matrix)}},
         {{"role", "labels"}, {"name", cfg.labels.filename().string()}, {"sha256", sha256_file(cfg.labels)}}});
    if (!cfg.keep_sites.empty()) raw = keep_sites(raw, cfg.keep_sites);
    const auto order = cfg.site_order.empty() ? raw.sites() : cfg.site_order;
    const auto cleansed = cleanse(raw, order);
    write_matrix(cleansed.matrix, out / "ingest" / "cleansed.tsv");
    write_labels(cleansed.matrix, out / "ingest" / "labels.tsv");
    const auto stats = gene_stats(cleansed.matrix);
    export_stats(stats, StatsOrder::by_mean, out / "ingest" / "stats_by_mean.csv");
    export_stats(stats, StatsOrder::by_sensitivity, out / "ingest" / "stats_by_sensitivity.csv");
    write_json(out / "ingest" / "cleansing.json",
               {{"removed_all_zero", cleansed.report.removed_all_zero},
                {"removed_duplicates", cleansed.report.removed_duplicates},
                {"duplicate_conflicts", cleansed.report.duplicate_conflicts},
                {"genes", cleansed.matrix.genes()},
                {"samples", cleansed.matrix.samples()}});

    stage = "normalize";
    const auto normalized = normalize_matrix(cleansed.matrix, cfg.scheme);
    const auto& m = normalized.matrix;
    write_matrix(m, out / "normalize" / "normalized.tsv");
    write_text(out / "normalize" / "dropped.txt", join(normalized.dropped, "\n") + (normalized.dropped.empty() ? "" : "\n"));
    manifest["scheme"] = std::string(scheme_name(cfg.scheme.variant));

    stage = "select";
    const auto sites = m.sites();
    std::vector<std::string> site_order;
    for (const auto& s : order)
      if (std::find(sites.begin(), sites.end(), s) != sites.end()) site_order.push_back(s);
    const auto masks = build_masks(m.labels, site_order);
    const auto mc = mask_correlations(m, masks);
    write_mask_correlations(mc, out / "select" / "mask_correlations.csv");
    write_sweep_report(sweep_report(mc, threshold_grid(0.05, 0.5, 0.05), cfg.pair), out / "select" / "sweep.csv");
    const GeneSet set559 = renamed(select_three_mask_intersect(mc, cfg.t_broad), "set559");
    const GeneSet set133 = renamed(select_combined(mc, cfg.t_intersect, cfg.t_pair, cfg.pair), "set133");
    if (set133.gene_ids.empty()) throw ValidationError("combined selection kept no genes");
    thresholds["t_broad"] = cfg.t_broad;
    thresholds["t_intersect"] = cfg.t_intersect;
    thresholds["t_pair"] = cfg.t_pair;
    manifest["pair"] = {cfg.pair.first, cfg.pair.second};

    stage = "folds";
    seeds["folds"] = derive_seed(cfg.seed, "folds");
    const auto plan = stratified_folds(m.labels, cfg.folds, seeds["folds"].get<std::uint64_t>());
    const auto balanced = oversample(plan, cfg.extra_copies);
    write_json(out / "folds" / "plan.json", to_json(plan));
    write_json(out / "folds" / "balanced.json", to_json(balanced));

    stage = "rfe";
    BoosterConfig booster = cfg.booster;
    booster.seed = derive_seed(cfg.seed, "booster");
    seeds["booster"] = booster.seed;
    RfeOptions opts;
    opts.drop_per_step = cfg.drop_per_step;
    opts.min_genes = cfg.min_genes;
    opts.cv = {cfg.repeats, cfg.importance};

    const auto unbalanced_trace = eliminate_or_evaluate(m, set133, plan, booster, opts);
    export_trace(unbalanced_trace, out / "rfe" / "unbalanced");
    write_json(out / "rfe" / "cv_set133.json", to_json(unbalanced_trace.steps.front().report));
    const GeneSet set34 = renamed(unbalanced_trace.steps[unbalanced_trace.best].genes, "set34");

    const auto balanced_trace = eliminate_or_evaluate(m, set34, balanced, booster, opts);
    export_trace(balanced_trace, out / "rfe" / "balanced");
    const auto& best_step = balanced_trace.steps[balanced_trace.best];
    const GeneSet set13 = renamed(best_step.genes, "set13");
    const auto key_index = key_gene_indices(best_step);

    for (const auto* s : {&set559, &set133, &set34, &set13}) {
      write_gene_set(*s, out / "sets" / (s->name + ".genes"));
      sizes[s->name] = s->size();
    }
    manifest["accuracy"] = {{"set133", unbalanced_trace.steps.front().report.mean_accuracy},
                            {"set34", unbalanced_trace.steps[unbalanced_trace.best].report.mean_accuracy},
                            {"set13", best_step.report.mean_accuracy}};

    const auto tiers = tier_genes({set13, set34, set133, set559});

    stage = "gcn";
    std::vector<std::string> cohorts = cfg.cohorts;
    if (cohorts.empty()) {
      cohorts.push_back(kAllCohort);
      cohorts.insert(cohorts.end(), site_order.begin(), site_order.end());
    }
    std::vector<CohortNetwork> networks;
    std::optional<GeneSet> giant_genes;
    for (const auto& cohort : cohorts) {
      const GeneSet& genes = cohort == kAllCohort || !giant_genes ? set559 : *giant_genes;
      const auto wg = build_weighted(m, genes, cohort);
      const auto seed = derive_seed(cfg.seed, "gcn:" + cohort);
      seeds["gcn:" + cohort] = seed;
      const auto it = cfg.threshold_override.find(cohort);
      const auto fixed = it == cfg.threshold_override.end() ? std::nullopt : std::optional<double>(it->second);
      std::optional<ThresholdSelection> picked;
      try {
        picked = select_threshold(wg, cfg.sweep, fixed, seed);
      } catch (const DegenerateGraph& e) {
        if (cohort == kAllCohort) throw;
        manifest["warnings"].push_back("gcn " + cohort + ": skipped, " + e.what());
        continue;
      }
      auto& sel = *picked;
      thresholds["gcn"][cohort] = sel.threshold;
      const fs::path dir = out / "gcn" / cohort;
      write_edge_list(sel.graph, dir / "edges.tsv");
      write_communities(sel.graph, sel.partition, dir / "communities.tsv");
      if (!sel.overridden) write_threshold_sweep(sel.sweep, dir / "sweep.csv");
      write_graphml(sel.graph, node_attributes(sel.graph, sel.partition, tiers, key_index), dir / "network.graphml");
      if (cohort == kAllCohort) {
        const auto giant = giant_component(sel.graph);
        giant_genes = GeneSet{"giant_" + cohort, giant.nodes, "giant component of cohort " + cohort};
        std::sort(giant_genes->gene_ids.begin(), giant_genes->gene_ids.end());
      }
      for (const auto& g : wg.excluded) manifest["warnings"].push_back("gcn " + cohort + ": constant gene " + g);
      networks.push_back({cohort, std::move(sel.graph), std::move(sel.partition)});
    }

    stage = "atlas";
    const auto entries = build_atlas(networks, tiers, key_index);
    export_atlas(entries, networks, tiers, key_index, out / "atlas");

    stage = "manifest";
    auto& outputs = manifest["outputs"] = nlohmann::json::array();
    for (const auto& [rel, hash] : hash_tree(out)) outputs.push_back({{"path", rel}, {"sha256", hash}});
    write_json(out / "manifest.json", manifest);
  } catch (const std::exception& e) {
    try {
      write_text(out / ".partial", "stage: " + stage + "\ncause: " + e.what() + "\n");
    } catch (...) {
    }
    throw StageError(stage, e.what());
  }
  return {out, manifest};
}

}  // namespace coexpress
