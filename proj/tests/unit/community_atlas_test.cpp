// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "coexpress/community_atlas.hpp"
#include "coexpress/error.hpp"
#include "coexpress/rng.hpp"
#include "test_support.hpp"

using namespace coexpress;

namespace {

GeneSet gs(std::string name, std::vector<std::string> ids) { return {std::move(name), std::move(ids), ""}; }

Partition explicit_partition(const GeneGraph& g, std::vector<std::size_t> comm) {
  Partition p;
  p.community = std::move(comm);
  p.count = *std::max_element(p.community.begin(), p.community.end()) + 1;
  p.modularity = g.edge_count() ? modularity(g, p.community) : 0.0;
  return p;
}

TierMap four_tiers() {
  return tier_genes({gs("set13", {"a"}), gs("set34", {"a", "b"}), gs("set133", {"a", "b", "c", "d"}),
                     gs("set559", {"a", "b", "c", "d", "e", "f", "x"})});
}

}  // namespace

TEST(TierGenes, NestedDefinition) {
  const auto tm = tier_genes({gs("s1", {"a"}), gs("s2", {"a", "b"}), gs("s3", {"a", "b", "c"})});
  EXPECT_EQ(tm.tier("a"), 0u);
  EXPECT_EQ(tm.tier("b"), 1u);
  EXPECT_EQ(tm.tier("c"), 2u);
  EXPECT_FALSE(tm.tier("zz").has_value());
  EXPECT_EQ(tm.populations, (std::vector<std::size_t>{1, 1, 1}));
}

TEST(TierGenes, ColumnsAndPopulations) {
  const auto tm = four_tiers();
  EXPECT_EQ(tm.columns, (std::vector<std::string>{"set13", "set34_minus_13", "set133_minus_34", "set559_minus_133"}));
  EXPECT_EQ(tm.populations, (std::vector<std::size_t>{1, 1, 2, 3}));
}

TEST(TierGenes, RejectsNonNested) {
  EXPECT_THROW(tier_genes({gs("s1", {"a", "q"}), gs("s2", {"a", "b"})}), ValidationError);
  EXPECT_THROW(tier_genes({}), std::invalid_argument);
}

TEST(TierGenesProperty, PopulationsAreSetDifferenceSizes) {
  Rng rng(79);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> pool;
    for (int i = 0; i < 40; ++i) pool.push_back("g" + std::to_string(i));
    rng.shuffle(std::span<std::string>(pool));
    std::vector<std::size_t> cuts{1 + rng.below(5)};
    for (int k = 1; k < 4; ++k) cuts.push_back(cuts.back() + rng.below(10));
    std::vector<GeneSet> sets;
    for (std::size_t k = 0; k < cuts.size(); ++k)
      sets.push_back(gs("s" + std::to_string(k), {pool.begin(), pool.begin() + static_cast<long>(cuts[k])}));
    const auto tm = tier_genes(sets);
    for (std::size_t k = 0; k < cuts.size(); ++k)
      EXPECT_EQ(tm.populations[k], k == 0 ? cuts[0] : set_difference(sets[k], sets[k - 1]).size());
    EXPECT_EQ(tm.tier_of.size(), cuts.back());
  }
}

TEST(KeyGeneIndices, ImportanceDescendingTiesById) {
  EliminationStep step;
  step.genes = gs("best", {"m", "b", "z", "a"});
  step.report.importance = {0.1, 0.4, 0.4, 0.1};
  const auto k = key_gene_indices(step);
  EXPECT_EQ(k.at("b"), 0);
  EXPECT_EQ(k.at("z"), 1);
  EXPECT_EQ(k.at("a"), 2);
  EXPECT_EQ(k.at("m"), 3);
}

TEST(BuildAtlas, SingleCommunityTwoTierZeroGenes) {
  const auto g = GeneGraph::from_edges({"a", "b"}, {{0, 1}});
  const auto tm = tier_genes({gs("set13", {"a", "b"}), gs("set34", {"a", "b", "c"})});
  const auto atlas = build_atlas({{"LN", g, explicit_partition(g, {0, 0})}}, tm, {});
  ASSERT_EQ(atlas.size(), 1u);
  ASSERT_EQ(atlas[0].communities.size(), 1u);
  EXPECT_EQ(atlas[0].communities[0].tier_counts, (std::vector<std::size_t>{2, 0}));
  EXPECT_EQ(atlas[0].communities[0].rank, 1u);
}

TEST(BuildAtlas, RanksTotalsAndGiantRestriction) {
  // Community {c,d,e,f} (4) outranks {a,b,x} (3); {y,z} is a separate component.
  auto g = GeneGraph::from_edges({"a", "b", "x", "c", "d", "e", "f", "y", "z"},
                                 {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {3, 6}, {7, 8}});
  g.threshold = 0.5;
  const auto p = explicit_partition(g, {0, 0, 0, 1, 1, 1, 1, 2, 2});
  const auto atlas = build_atlas({{"Bone", g, p}}, four_tiers(), {{"a", 0}, {"d", 1}, {"f", 2}});
  const auto& e = atlas[0];
  EXPECT_DOUBLE_EQ(e.threshold, 0.5);
  EXPECT_EQ(e.network.nodes, 9u);
  EXPECT_EQ(e.giant.nodes, 7u);
  ASSERT_EQ(e.communities.size(), 2u);
  EXPECT_EQ(e.communities[0].size(), 4u);
  EXPECT_EQ(e.communities[0].rank, 1u);
  EXPECT_EQ(e.communities[0].key_indices, (std::vector<int>{1, 2}));
  EXPECT_EQ(e.communities[1].key_indices, (std::vector<int>{0}));
  EXPECT_EQ(e.communities[1].tier_counts, (std::vector<std::size_t>{1, 1, 0, 1}));
  EXPECT_EQ(e.totals.size(), e.giant.nodes);
  for (std::size_t t = 0; t < 4; ++t) {
    std::size_t sum = 0;
    for (const auto& c : e.communities) sum += c.tier_counts[t];
    EXPECT_EQ(sum, e.totals.tier_counts[t]);
  }
  for (const auto& c : e.communities) {
    std::size_t sum = 0;
    for (auto n : c.tier_counts) sum += n;
    EXPECT_EQ(sum, c.size());
  }
  EXPECT_TRUE(e.untiered.empty());
}

TEST(BuildAtlas, KeyGeneSwitchesCommunityBetweenCohorts) {
  const std::vector<std::string> nodes{"a", "b", "c", "d", "e", "f", "x"};
  const std::vector<std::pair<std::size_t, std::size_t>> edges{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5},
                                                               {3, 5}, {2, 3}, {5, 6}};
  const auto g = GeneGraph::from_edges(nodes, edges);
  // Cohort one: c sits with a,b (rank 2, size 3); x with d,e,f (rank 1, size 4).
  // Cohort two: c joins d,e,f,x (rank 1, size 5).
  const auto p1 = explicit_partition(g, {0, 0, 0, 1, 1, 1, 1});
  const auto p2 = explicit_partition(g, {0, 0, 1, 1, 1, 1, 1});
  const auto atlas = build_atlas({{"LN", g, p1}, {"Liver", g, p2}}, four_tiers(), {{"c", 0}});
  const auto rank_with_key = [](const AtlasEntry& e) {
    for (const auto& c : e.communities)
      if (!c.key_indices.empty()) return c.rank;
    return std::size_t{0};
  };
  EXPECT_EQ(rank_with_key(atlas[0]), 2u);
  EXPECT_EQ(rank_with_key(atlas[1]), 1u);
}

TEST(BuildAtlas, UntieredGenesReported) {
  const auto g = GeneGraph::from_edges({"a", "q"}, {{0, 1}});
  const auto atlas = build_atlas({{"all", g, explicit_partition(g, {0, 0})}}, four_tiers(), {});
  EXPECT_EQ(atlas[0].untiered, std::vector<std::string>{"q"});
}

TEST(CrossColor, IdentityUniformAndNeutral) {
  const auto b = coexpress::test::barbell();
  const auto own = detect_communities(b, 1);
  const auto self = cross_color(b, b, own);
  const auto ranks = community_ranks(b, own);
  for (std::size_t v = 0; v < b.node_count(); ++v) {
    EXPECT_EQ(self.reference_rank[v], ranks[own.community[v]]);
    EXPECT_EQ(self.color[v], kPalette[ranks[own.community[v]] - 1]);
  }
  const auto uniform = cross_color(b, b, explicit_partition(b, std::vector<std::size_t>(6, 0)));
  EXPECT_EQ(std::set<std::string>(uniform.color.begin(), uniform.color.end()).size(), 1u);

  const auto target = GeneGraph::from_edges({"a", "new"}, {{0, 1}});
  const auto mixed = cross_color(target, b, own);
  EXPECT_TRUE(mixed.reference_rank[0].has_value());
  EXPECT_FALSE(mixed.reference_rank[1].has_value());
  EXPECT_EQ(mixed.color[1], kNeutralColor);
}

TEST(CrossColor, OverflowRanksShareGray) {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> comm;
  for (std::size_t c = 0; c < 18; ++c) {
    nodes.push_back("n" + std::to_string(100 + 2 * c));
    nodes.push_back("n" + std::to_string(101 + 2 * c));
    edges.emplace_back(2 * c, 2 * c + 1);
    comm.insert(comm.end(), {c, c});
  }
  const auto g = GeneGraph::from_edges(nodes, edges);
  const auto colors = cross_color(g, g, explicit_partition(g, comm));
  EXPECT_EQ(colors.color.front(), kPalette[0]);
  EXPECT_EQ(colors.color.back(), kOverflowColor);
  EXPECT_EQ(kPalette.size(), 16u);
}

TEST(TierNodeSize, InnermostLargest) {
  EXPECT_GT(tier_node_size(0), tier_node_size(1));
  EXPECT_GT(tier_node_size(1), tier_node_size(2));
  EXPECT_GT(tier_node_size(3), tier_node_size(std::nullopt));
}

TEST(ExportAtlas, TablesAndCrossGraphs) {
  coexpress::test::TempDir dir("atlas");
  const auto b = coexpress::test::barbell();
  std::vector<CohortNetwork> nets{{"all", b, detect_communities(b, 1)}, {"LN", b, detect_communities(b, 2)}};
  const auto tm = tier_genes({gs("set13", {"a"}), gs("set34", {"a", "b"}), gs("set133", {"a", "b", "c"}),
                              gs("set559", b.nodes)});
  const auto atlas = build_atlas(nets, tm, {{"a", 0}});
  export_atlas(atlas, nets, tm, {{"a", 0}}, dir.path());
  const auto csv = coexpress::test::read_file(dir / "all_communities.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "community_rank,size,set13,set34_minus_13,set133_minus_34,set559_minus_133,key_indices");
  EXPECT_NE(csv.find("\ntotal,6,"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.csv"));
  for (const char* name : {"all_in_all", "all_in_LN", "LN_in_all", "LN_in_LN"})
    EXPECT_TRUE(std::filesystem::exists(dir / (std::string(name) + "_colors.graphml"))) << name;
}

TEST(BuildAtlasProperty, Deterministic) {
  const auto g = coexpress::test::random_graph(30, 0.15, 5);
  const std::vector<CohortNetwork> nets{{"all", g, detect_communities(g, 3)}};
  const auto tm = tier_genes({gs("s", g.nodes)});
  const auto a = build_atlas(nets, tm, {});
  const auto c = build_atlas(nets, tm, {});
  ASSERT_EQ(a[0].communities.size(), c[0].communities.size());
  for (std::size_t i = 0; i < a[0].communities.size(); ++i) EXPECT_EQ(a[0].communities[i].members, c[0].communities[i].members);
}
