// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coexpress/expression.hpp"
#include "coexpress/gene_set.hpp"
#include "coexpress/matrix.hpp"

namespace coexpress {

/// Cohort name selecting every sample.
inline constexpr const char* kAllCohort = "all";

/// Complete graph over genes weighted by |Pearson| within one cohort.
struct WeightedGeneGraph {
  std::vector<std::string> genes;
  Matrix weights;  ///< symmetric, zero diagonal
  std::string cohort;
  std::vector<std::string> excluded;  ///< constant within the cohort
};

/// `cohort` is a site label or kAllCohort.
WeightedGeneGraph build_weighted(const ExpressionMatrix& m, const GeneSet& genes, const std::string& cohort);

/// Simple undirected unweighted graph.
struct GeneGraph {
  std::vector<std::string> nodes;
  std::vector<std::vector<std::size_t>> adjacency;  ///< sorted neighbour lists
  double threshold = 0.0;

  std::size_t node_count() const noexcept { return nodes.size(); }
  std::size_t edge_count() const noexcept;
  std::size_t degree(std::size_t v) const { return adjacency[v].size(); }
  std::vector<std::size_t> isolated() const;
  /// Edges as (u, v) with u < v, sorted.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  static GeneGraph from_edges(std::vector<std::string> nodes,
                              const std::vector<std::pair<std::size_t, std::size_t>>& edges);
};

/// Keep edges with weight >= t. Isolated nodes stay in the node set.
GeneGraph threshold_graph(const WeightedGeneGraph& wg, double t);

/// Components as node-index lists, each sorted ascending.
std::vector<std::vector<std::size_t>> connected_components(const GeneGraph& g);

/// Induced subgraph on the given node indices (kept in ascending order).
GeneGraph induced_subgraph(const GeneGraph& g, std::vector<std::size_t> keep);

/// Largest component; ties go to the component with the smallest gene ID.
GeneGraph giant_component(const GeneGraph& g);

struct Partition {
  std::vector<std::size_t> community;  ///< contiguous 0..count-1
  std::size_t count = 0;
  double modularity = 0.0;
};

/// Q = sum_c [L_c / m - (d_c / 2m)^2]. Throws DegenerateGraph without edges.
double modularity(const GeneGraph& g, std::span<const std::size_t> community);

/// Relabel communities 0.. in order of first appearance.
std::vector<std::size_t> renumber(std::span<const std::size_t> community);

/// Independent seeded Louvain runs per call; the highest-Q partition wins.
inline constexpr std::size_t kLouvainRestarts = 16;

/// Louvain modularity maximisation. Node visit order is shuffled once per
/// level with a generator seeded from `seed`. Each run ends with a pass of
/// single-node moves and Kernighan-Lin refinement
/// on the original graph.
Partition detect_communities(const GeneGraph& g, std::uint64_t seed);

struct SweepRange {
  double lo = 0.4;
  double hi = 0.9;
  double step = 0.02;
};

/// Parse "lo:hi:step".
SweepRange parse_sweep(const std::string& text);

struct SweepPoint {
  double threshold = 0.0;
  std::size_t edges = 0;
  std::optional<double> modularity;  ///< nullopt when no edges survive
  std::size_t communities = 0;
  std::size_t giant_size = 0;
};

struct ThresholdSelection {
  double threshold = 0.0;
  bool overridden = false;
  GeneGraph graph;
  Partition partition;
  std::vector<SweepPoint> sweep;  ///< empty when overridden
};

/// Threshold the weighted graph at each candidate, detect communities on the
/// full thresholded graph and keep the highest modularity (ties: smallest
/// threshold). `fixed` skips the sweep.
ThresholdSelection select_threshold(const WeightedGeneGraph& wg, const SweepRange& range,
                                    std::optional<double> fixed, std::uint64_t seed);

struct NetworkSummary {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  double average_degree = 0.0;
  double modularity = 0.0;
  std::vector<std::size_t> component_sizes;  ///< descending
  std::vector<std::size_t> community_sizes;  ///< descending
};

NetworkSummary network_summary(const GeneGraph& g, const Partition& p);

void write_edge_list(const GeneGraph& g, const std::filesystem::path& path);
void write_threshold_sweep(const std::vector<SweepPoint>& sweep, const std::filesystem::path& path);

/// "gene_id\tcommunity" in node order, so isolated nodes survive a round trip.
void write_communities(const GeneGraph& g, const Partition& p, const std::filesystem::path& path);

/// Rebuilds a graph and its partition from write_communities + write_edge_list output.
std::pair<GeneGraph, Partition> read_network(const std::filesystem::path& communities,
                                             const std::filesystem::path& edges);

/// Per-node GraphML attribute. `type` is a GraphML type: int, double or string.
struct NodeAttribute {
  std::string name;
  std::string type;
  std::vector<std::string> values;  ///< one per node
};

void write_graphml(const GeneGraph& g, const std::vector<NodeAttribute>& attributes,
                   const std::filesystem::path& path);

}  // namespace coexpress
