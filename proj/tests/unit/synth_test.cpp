// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "coexpress/correlation.hpp"
#include "coexpress/expression.hpp"
#include "coexpress/gene_set.hpp"
#include "coexpress/mask_selection.hpp"
#include "coexpress/synth.hpp"
#include "test_support.hpp"

using namespace coexpress;

namespace {

/// Population correlation between x = noise(sigma = 1) + d * 1[class] and the
/// class indicator, for class proportion p.
double point_biserial(double d, double p) {
  const double v = p * (1.0 - p);
  return d * std::sqrt(v) / std::sqrt(1.0 + d * d * v);
}

std::vector<double> row_of(const ExpressionMatrix& m, const std::string& gene) {
  const auto g = static_cast<std::size_t>(std::find(m.gene_ids.begin(), m.gene_ids.end(), gene) - m.gene_ids.begin());
  std::vector<double> out(m.samples());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = m.values(g, s);
  return out;
}

}  // namespace

TEST(Synth, ShapeIdsAndTruth) {
  const auto d = generate(coexpress::test::planted_spec(3));
  EXPECT_EQ(d.matrix.samples(), 60u);
  EXPECT_EQ(d.matrix.genes(), 80u);
  EXPECT_EQ(d.background.size(), 50u);
  ASSERT_EQ(d.planted.size(), 3u);
  EXPECT_EQ(d.planted.at("LN").gene_ids.front(), "P_LN_00");
  EXPECT_EQ(d.matrix.sample_ids.front(), "S0000");
  std::map<std::string, int> counts;
  for (const auto& l : d.matrix.labels) ++counts[l];
  EXPECT_EQ(counts, (std::map<std::string, int>{{"Bone", 20}, {"LN", 20}, {"Liver", 20}}));
}

TEST(Synth, DeterministicBySeed) {
  const auto a = generate(coexpress::test::planted_spec(11));
  const auto b = generate(coexpress::test::planted_spec(11));
  const auto c = generate(coexpress::test::planted_spec(12));
  EXPECT_EQ(a.matrix.values, b.matrix.values);
  EXPECT_EQ(a.matrix.labels, b.matrix.labels);
  EXPECT_NE(a.matrix.values, c.matrix.values);
}

TEST(Synth, PlantedShiftMatchesEffect) {
  SynthSpec spec;
  spec.samples_per_site = {{"A", 400}, {"B", 400}};
  spec.background_genes = 0;
  spec.planted_per_class = 1;
  spec.effect = 2.0;
  spec.noise_sigma = 0.5;
  const auto d = generate(spec);
  const auto x = row_of(d.matrix, "P_A_00");
  double in = 0, out = 0;
  for (std::size_t s = 0; s < x.size(); ++s) (d.matrix.labels[s] == "A" ? in : out) += x[s] / 400.0;
  EXPECT_NEAR(in - out, spec.effect * spec.noise_sigma, 0.1);
}

TEST(Synth, PointBiserialBoundAtEffectFive) {
  for (const auto& sites : std::vector<std::vector<std::pair<std::string, std::size_t>>>{
           {{"A", 50}, {"B", 50}}, {{"LN", 34}, {"Bone", 33}, {"Liver", 33}}}) {
    SynthSpec spec;
    spec.samples_per_site = sites;
    spec.background_genes = 20;
    spec.planted_per_class = 5;
    spec.effect = 5.0;
    const auto d = generate(spec);
    const auto mc = mask_correlations(d.matrix, build_masks(d.matrix.labels));
    for (std::size_t c = 0; c < sites.size(); ++c) {
      const double p = static_cast<double>(sites[c].second) / 100.0;
      const double bound = point_biserial(5.0, p);
      for (const auto& g : d.planted.at(sites[c].first).gene_ids) {
        const auto gi = static_cast<std::size_t>(std::find(mc.gene_ids.begin(), mc.gene_ids.end(), g) - mc.gene_ids.begin());
        EXPECT_NEAR(mc.values[gi][mc.site_index(sites[c].first)], bound, 0.05) << g;
      }
    }
  }
}

TEST(Synth, NullEffectLeavesPlantedLikeBackground) {
  SynthSpec spec;
  spec.background_genes = 400;
  spec.planted_per_class = 60;
  spec.effect = 0.0;
  spec.seed = 19;
  const auto d = generate(spec);
  const auto picked = select_by_any_mask(mask_correlations(d.matrix, build_masks(d.matrix.labels)), 0.2);
  double planted = 0, background = 0, n_planted = 0;
  for (const auto& [site, set] : d.planted) {
    n_planted += static_cast<double>(set.size());
    for (const auto& g : set.gene_ids) planted += picked.contains(g);
  }
  for (const auto& g : d.background.gene_ids) background += picked.contains(g);
  EXPECT_NEAR(planted / n_planted, background / 400.0, 0.15);
}

TEST(Synth, FullLoadingBlocksApproachPerfectCorrelation) {
  double previous = 0.0;
  for (double sigma : {0.5, 0.1, 0.01, 0.0}) {
    SynthSpec spec;
    spec.samples_per_site = {{"A", 200}, {"B", 200}};
    spec.background_genes = 0;
    spec.planted_per_class = 0;
    spec.noise_sigma = sigma;
    spec.blocks = {{4, 1.0}, {4, 1.0}};
    const auto d = generate(spec);
    const auto within = std::abs(coexpress::test::pearson_oracle(row_of(d.matrix, "B0_00"), row_of(d.matrix, "B0_03")));
    const auto across = std::abs(coexpress::test::pearson_oracle(row_of(d.matrix, "B0_00"), row_of(d.matrix, "B1_00")));
    // One-factor model: r = 1 / (1 + sigma^2).
    EXPECT_NEAR(within, 1.0 / (1.0 + sigma * sigma), 0.08) << sigma;
    EXPECT_GE(within, previous - 1e-12);
    previous = within;
    if (sigma == 0.0) {
      EXPECT_NEAR(within, 1.0, 1e-12);
      EXPECT_NEAR(across, 0.0, 1e-9);
    }
  }
}

TEST(Synth, TruthRoundTripsThroughGeneSetFiles) {
  coexpress::test::TempDir dir("synth");
  SynthSpec spec = coexpress::test::planted_spec(5);
  spec.blocks = {{3, 0.8}};
  const auto d = generate(spec);
  write_synth(d, dir.path());
  for (const auto& [site, set] : d.planted)
    EXPECT_EQ(read_gene_set(dir / "truth" / ("planted_" + site + ".genes")).gene_ids, set.gene_ids);
  EXPECT_EQ(read_gene_set(dir / "truth" / "background.genes").gene_ids, d.background.gene_ids);
  EXPECT_EQ(read_gene_set(dir / "truth" / "block_0.genes").gene_ids, d.blocks[0].gene_ids);
  const auto m = load_matrix(dir / "matrix.tsv", dir / "labels.tsv");
  EXPECT_EQ(m.gene_ids, d.matrix.gene_ids);
  EXPECT_EQ(m.labels, d.matrix.labels);
  for (std::size_t g = 0; g < m.genes(); ++g)
    for (std::size_t s = 0; s < m.samples(); ++s) EXPECT_NEAR(m.values(g, s), d.matrix.values(g, s), 1e-9);
}

TEST(Synth, JsonRoundTrip) {
  SynthSpec spec;
  spec.samples_per_site = {{"X", 4}, {"Y", 6}};
  spec.blocks = {{5, 0.25}};
  spec.seed = 99;
  const auto back = synth_spec_from_json(to_json(spec));
  EXPECT_EQ(back.samples_per_site, spec.samples_per_site);
  EXPECT_EQ(back.blocks.size(), 1u);
  EXPECT_DOUBLE_EQ(back.blocks[0].loading, 0.25);
  EXPECT_EQ(back.seed, 99u);
}

TEST(Synth, ValidationErrors) {
  SynthSpec one;
  one.samples_per_site = {{"A", 10}};
  EXPECT_THROW(generate(one), std::invalid_argument);
  SynthSpec tiny;
  tiny.samples_per_site = {{"A", 1}, {"B", 5}};
  EXPECT_THROW(generate(tiny), std::invalid_argument);
  SynthSpec neg;
  neg.effect = -1.0;
  EXPECT_THROW(generate(neg), std::invalid_argument);
  SynthSpec load;
  load.blocks = {{3, 1.5}};
  EXPECT_THROW(generate(load), std::invalid_argument);
}
