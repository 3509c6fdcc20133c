// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "coexpress/error.hpp"
#include "coexpress/gcn.hpp"
#include "coexpress/gene_set.hpp"
#include "coexpress/rng.hpp"
#include "test_support.hpp"

using namespace coexpress;
using coexpress::test::barbell;
using coexpress::test::disjoint_triangles;
using coexpress::test::make_matrix;

namespace {

GeneGraph complete(std::size_t n) {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back("k" + std::to_string(i));
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return GeneGraph::from_edges(nodes, e);
}

std::set<std::pair<std::string, std::string>> edge_names(const GeneGraph& g) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& [u, v] : g.edges()) out.emplace(std::min(g.nodes[u], g.nodes[v]), std::max(g.nodes[u], g.nodes[v]));
  return out;
}

}  // namespace

TEST(BuildWeighted, AbsolutePearsonWithinCohort) {
  const auto m = make_matrix({"a", "b", "c", "d"}, {"s1", "s2", "s3", "s4", "s5"}, {"LN", "LN", "LN", "LN", "Bone"},
                             {{1, 2, 3, 5, 100}, {1, 2, 3, 5, -7}, {-1, -2, -3, -5, 0}, {2, 1, 4, 3, 9}});
  const auto wg = build_weighted(m, {"s", m.gene_ids, ""}, "LN");
  EXPECT_NEAR(wg.weights(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(wg.weights(0, 2), 1.0, 1e-15);
  EXPECT_NEAR(wg.weights(0, 3), std::abs(coexpress::test::pearson_oracle({1, 2, 3, 5}, {2, 1, 4, 3})), 1e-12);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(wg.weights(i, i), 0.0);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(wg.weights(i, j), wg.weights(j, i));
  }
  const auto all = build_weighted(m, {"s", m.gene_ids, ""}, kAllCohort);
  EXPECT_LT(all.weights(0, 1), 0.99);
}

TEST(BuildWeighted, ConstantWithinCohortExcluded) {
  const auto m = make_matrix({"a", "b", "c"}, {"s1", "s2", "s3", "s4"}, {"LN", "LN", "LN", "Bone"},
                             {{1, 1, 1, 5}, {1, 2, 3, 4}, {3, 1, 2, 0}});
  const auto wg = build_weighted(m, {"s", m.gene_ids, ""}, "LN");
  EXPECT_EQ(wg.excluded, std::vector<std::string>{"a"});
  EXPECT_EQ(wg.genes, (std::vector<std::string>{"b", "c"}));
}

TEST(BuildWeighted, Errors) {
  const auto m = make_matrix({"a", "b"}, {"s1", "s2", "s3", "s4"}, {"LN", "LN", "Bone", "Bone"},
                             {{1, 2, 3, 4}, {4, 4, 4, 1}});
  EXPECT_THROW(build_weighted(m, {"s", m.gene_ids, ""}, "LN"), ValidationError);
  const auto m3 = make_matrix({"a", "b"}, {"s1", "s2", "s3"}, {"LN", "LN", "LN"}, {{1, 2, 3}, {4, 4, 4}});
  EXPECT_THROW(build_weighted(m3, {"s", m3.gene_ids, ""}, "LN"), ValidationError);
}

TEST(ThresholdGraph, Boundaries) {
  const auto wg = coexpress::test::two_clique_weighted();
  EXPECT_EQ(threshold_graph(wg, 0.0).edge_count(), 28u);
  EXPECT_EQ(threshold_graph(wg, 1.01).edge_count(), 0u);
  EXPECT_EQ(threshold_graph(wg, 0.49).edge_count(), 16u);  // equal weight kept
  EXPECT_EQ(threshold_graph(wg, 0.5).edge_count(), 12u);
  EXPECT_EQ(threshold_graph(wg, 1.01).node_count(), 8u);
  EXPECT_EQ(threshold_graph(wg, 1.01).isolated().size(), 8u);
}

TEST(ThresholdGraph, MonotoneInThreshold) {
  Rng rng(61);
  WeightedGeneGraph wg;
  wg.weights = Matrix(12, 12, 0.0);
  for (std::size_t i = 0; i < 12; ++i) {
    wg.genes.push_back("g" + std::to_string(i));
    for (std::size_t j = i + 1; j < 12; ++j) wg.weights(i, j) = wg.weights(j, i) = rng.uniform();
  }
  for (double t1 = 0.0; t1 < 1.0; t1 += 0.05) {
    const auto lo = edge_names(threshold_graph(wg, t1));
    const auto hi = edge_names(threshold_graph(wg, t1 + 0.05));
    for (const auto& e : hi) EXPECT_TRUE(lo.contains(e));
  }
}

TEST(GiantComponent, Cases) {
  const auto g = GeneGraph::from_edges({"a", "b", "c", "d", "e", "f", "g"},
                                       {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {5, 6}});
  EXPECT_EQ(giant_component(g).node_count(), 5u);
  EXPECT_EQ(giant_component(g).edge_count(), 4u);
  const auto b = barbell();
  EXPECT_EQ(giant_component(b).nodes, b.nodes);
  const auto empty = GeneGraph::from_edges({"z", "b", "m"}, {});
  EXPECT_EQ(giant_component(empty).nodes, std::vector<std::string>{"b"});
  const auto tie = GeneGraph::from_edges({"x", "y", "a", "c"}, {{0, 1}, {2, 3}});
  EXPECT_EQ(giant_component(tie).nodes, (std::vector<std::string>{"a", "c"}));
}

TEST(Modularity, Examples) {
  const std::vector<std::size_t> tri{0, 0, 0, 1, 1, 1};
  EXPECT_NEAR(modularity(disjoint_triangles(), tri), 0.5, 1e-15);
  EXPECT_NEAR(modularity(barbell(), tri), 5.0 / 14.0, 1e-15);
  const std::vector<std::size_t> one(6, 0);
  EXPECT_NEAR(modularity(barbell(), one), 0.0, 1e-15);
  const std::vector<std::size_t> none(3, 0);
  EXPECT_THROW(modularity(GeneGraph::from_edges({"a", "b", "c"}, {}), none), DegenerateGraph);
}

TEST(ModularityProperty, MatchesDoubleSumOracleUpToTwentyNodes) {
  Rng rng(67);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(19);
    const auto g = coexpress::test::random_graph(n, 0.1 + rng.uniform() * 0.6, rng.next());
    if (g.edge_count() == 0) continue;
    std::vector<std::size_t> p(n);
    const std::size_t k = 1 + rng.below(n);
    for (auto& c : p) c = rng.below(k);
    const double q = modularity(g, p);
    EXPECT_NEAR(q, coexpress::test::modularity_oracle(g, p), 1e-12);
    EXPECT_GE(q, -0.5 - 1e-12);
    EXPECT_LE(q, 1.0);
  }
}

TEST(Louvain, KnownOptima) {
  const auto t = detect_communities(disjoint_triangles(), 1);
  EXPECT_EQ(t.count, 2u);
  EXPECT_NEAR(t.modularity, 0.5, 1e-12);
  const auto b = detect_communities(barbell(), 1);
  EXPECT_EQ(b.community, (std::vector<std::size_t>{0, 0, 0, 1, 1, 1}));
  EXPECT_NEAR(b.modularity, 5.0 / 14.0, 1e-12);
  EXPECT_NEAR(b.modularity, coexpress::test::max_modularity_oracle(barbell()), 1e-12);
  const auto k5 = detect_communities(complete(5), 1);
  EXPECT_EQ(k5.count, 1u);
  EXPECT_NEAR(coexpress::test::max_modularity_oracle(complete(5)), 0.0, 1e-12);
}

TEST(Louvain, ZeroEdgeGraphIsError) {
  EXPECT_THROW(detect_communities(GeneGraph::from_edges({"a", "b"}, {}), 0), DegenerateGraph);
}

TEST(LouvainProperty, NearExhaustiveOptimumOnSmallGraphs) {
  Rng rng(71);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = coexpress::test::random_graph(3 + rng.below(6), 0.2 + rng.uniform() * 0.5, rng.next());
    if (g.edge_count() == 0) continue;
    const auto p = detect_communities(g, rng.next());
    const double best = coexpress::test::max_modularity_oracle(g);
    EXPECT_GE(p.modularity, 0.95 * best - 1e-12);
    std::vector<std::size_t> singletons(g.node_count());
    std::iota(singletons.begin(), singletons.end(), std::size_t{0});
    EXPECT_GE(p.modularity, modularity(g, singletons) - 1e-12);
    EXPECT_GE(p.modularity, -1e-12);
  }
}

TEST(LouvainProperty, ContiguousDeterministicAndRelabelInvariant) {
  Rng rng(73);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 5 + rng.below(30);
    const auto g = coexpress::test::random_graph(n, 0.15, rng.next());
    if (g.edge_count() == 0) continue;
    const auto seed = rng.next();
    const auto a = detect_communities(g, seed);
    const auto b = detect_communities(g, seed);
    EXPECT_EQ(a.community, b.community);
    EXPECT_NEAR(a.modularity, modularity(g, a.community), 1e-12);
    std::set<std::size_t> used(a.community.begin(), a.community.end());
    EXPECT_EQ(used.size(), a.count);
    EXPECT_EQ(*used.rbegin(), a.count - 1);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    std::vector<std::string> nodes(n);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t v = 0; v < n; ++v) nodes[perm[v]] = g.nodes[v];
    for (const auto& [u, v] : g.edges()) edges.emplace_back(perm[u], perm[v]);
    const auto h = GeneGraph::from_edges(nodes, edges);
    std::vector<std::size_t> moved(n);
    for (std::size_t v = 0; v < n; ++v) moved[perm[v]] = a.community[v];
    EXPECT_NEAR(modularity(h, moved), a.modularity, 1e-12);
  }
}

TEST(SelectThreshold, PicksCleanCliquesAndRecordsSweep) {
  const auto sel = select_threshold(coexpress::test::two_clique_weighted(), {}, std::nullopt, 3);
  EXPECT_DOUBLE_EQ(sel.threshold, 0.5);
  EXPECT_FALSE(sel.overridden);
  EXPECT_EQ(sel.graph.edge_count(), 12u);
  EXPECT_EQ(sel.partition.count, 2u);
  EXPECT_NEAR(sel.partition.modularity, 0.5, 1e-12);
  ASSERT_EQ(sel.sweep.size(), 26u);
  EXPECT_DOUBLE_EQ(sel.sweep.front().threshold, 0.4);
  EXPECT_DOUBLE_EQ(sel.sweep.back().threshold, 0.9);
  EXPECT_FALSE(sel.sweep.back().modularity.has_value());
  for (const auto& p : sel.sweep)
    if (p.modularity) EXPECT_LE(*p.modularity, sel.partition.modularity + 1e-12);
}

TEST(SelectThreshold, OverrideSkipsSweep) {
  const auto wg = coexpress::test::two_clique_weighted();
  const auto sel = select_threshold(wg, {}, 0.45, 3);
  EXPECT_TRUE(sel.overridden);
  EXPECT_TRUE(sel.sweep.empty());
  EXPECT_EQ(edge_names(sel.graph), edge_names(threshold_graph(wg, 0.45)));
  EXPECT_DOUBLE_EQ(sel.threshold, 0.45);
}

TEST(SelectThreshold, NoEdgesAnywhereIsError) {
  auto wg = coexpress::test::two_clique_weighted();
  EXPECT_THROW(select_threshold(wg, {0.7, 0.9, 0.02}, std::nullopt, 1), DegenerateGraph);
}

TEST(SweepRange, Parse) {
  const auto r = parse_sweep("0.4:0.9:0.02");
  EXPECT_DOUBLE_EQ(r.lo, 0.4);
  EXPECT_DOUBLE_EQ(r.step, 0.02);
  EXPECT_THROW(parse_sweep("0.4:0.9"), ParseError);
  EXPECT_THROW(parse_sweep("0.9:0.4:0.02"), ParseError);
}

TEST(NetworkSummary, Examples) {
  const auto b = barbell();
  const auto s = network_summary(b, detect_communities(b, 0));
  EXPECT_EQ(s.nodes, 6u);
  EXPECT_EQ(s.edges, 7u);
  EXPECT_NEAR(s.average_degree, 7.0 / 3.0, 1e-15);
  EXPECT_EQ(s.community_sizes, (std::vector<std::size_t>{3, 3}));
  const auto e = network_summary(GeneGraph{}, Partition{});
  EXPECT_EQ(e.nodes, 0u);
  EXPECT_EQ(e.edges, 0u);
  EXPECT_EQ(e.average_degree, 0.0);
  const auto tri = GeneGraph::from_edges({"a", "b", "c"}, {{0, 1}, {1, 2}, {0, 2}});
  EXPECT_DOUBLE_EQ(network_summary(tri, detect_communities(tri, 0)).average_degree, 2.0);
}

TEST(GcnExport, FilesRoundTrip) {
  coexpress::test::TempDir dir("gcn");
  const auto g = GeneGraph::from_edges({"a", "b", "c", "lonely"}, {{0, 1}, {1, 2}});
  const auto p = detect_communities(g, 4);
  write_edge_list(g, dir / "edges.tsv");
  write_communities(g, p, dir / "communities.tsv");
  EXPECT_EQ(coexpress::test::read_file(dir / "edges.tsv"), "src\tdst\na\tb\nb\tc\n");
  const auto [g2, p2] = read_network(dir / "communities.tsv", dir / "edges.tsv");
  EXPECT_EQ(g2.nodes, g.nodes);
  EXPECT_EQ(g2.adjacency, g.adjacency);
  EXPECT_EQ(p2.community, p.community);
  EXPECT_NEAR(p2.modularity, p.modularity, 1e-15);

  write_graphml(g, {{"community", "int", {"0", "0", "0", "1"}}, {"tier", "string", {"a&b", "x", "y", "z"}}},
                dir / "g.graphml");
  const auto xml = coexpress::test::read_file(dir / "g.graphml");
  EXPECT_NE(xml.find("attr.name=\"community\""), std::string::npos);
  EXPECT_NE(xml.find("a&amp;b"), std::string::npos);
  EXPECT_NE(xml.find("<edge source=\"a\" target=\"b\"/>"), std::string::npos);
  EXPECT_THROW(write_graphml(g, {{"bad", "int", {"0"}}}, dir / "bad.graphml"), std::invalid_argument);
}
