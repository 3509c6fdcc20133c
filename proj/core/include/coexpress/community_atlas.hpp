// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "coexpress/feature_elimination.hpp"
#include "coexpress/gcn.hpp"
#include "coexpress/gene_set.hpp"

namespace coexpress {

/// Disjoint tiers from nested gene sets, innermost first.
struct TierMap {
  std::vector<std::string> columns;    ///< e.g. set13, set34_minus_13, ...
  std::vector<std::size_t> populations;
  std::unordered_map<std::string, std::size_t> tier_of;

  std::size_t tier_count() const noexcept { return columns.size(); }
  std::optional<std::size_t> tier(const std::string& gene) const;
};

/// tier(g) = index of the smallest set containing g. Each set must contain
/// the previous one; equal consecutive sets give an empty tier.
TierMap tier_genes(const std::vector<GeneSet>& nested);

/// Key-gene indices 0.. by descending importance at the trace's best step,
/// ties by gene ID.
std::map<std::string, int> key_gene_indices(const EliminationStep& step);

struct CohortNetwork {
  std::string cohort;
  GeneGraph graph;
  Partition partition;
};

struct AtlasCommunity {
  std::size_t rank = 0;  ///< 1-based, by size descending
  std::vector<std::string> members;
  std::vector<std::size_t> tier_counts;
  std::vector<int> key_indices;  ///< ascending

  std::size_t size() const noexcept { return members.size(); }
};

struct AtlasEntry {
  std::string cohort;
  double threshold = 0.0;
  NetworkSummary network;  ///< full thresholded graph
  NetworkSummary giant;    ///< giant component
  std::vector<AtlasCommunity> communities;  ///< giant-component communities
  AtlasCommunity totals;
  std::vector<std::string> untiered;
};

/// Rank (1-based) of every community index: size descending, ties by the
/// smallest member gene ID.
std::vector<std::size_t> community_ranks(const GeneGraph& g, const Partition& p);

std::vector<AtlasEntry> build_atlas(const std::vector<CohortNetwork>& networks, const TierMap& tiers,
                                    const std::map<std::string, int>& key_index);

/// Fixed 16-colour palette; ranks beyond it share kOverflowColor.
extern const std::vector<std::string> kPalette;
inline constexpr const char* kOverflowColor = "#9e9e9e";
inline constexpr const char* kNeutralColor = "#f0f0f0";

struct NodeColoring {
  std::vector<std::optional<std::size_t>> reference_rank;  ///< nullopt = absent from reference
  std::vector<std::string> color;
};

/// Colour each node of `target` by its community in the reference network.
NodeColoring cross_color(const GeneGraph& target, const GeneGraph& reference, const Partition& reference_partition);

/// Node size per tier: innermost tier largest.
int tier_node_size(std::optional<std::size_t> tier) noexcept;

/// <cohort>_communities.csv per entry, summary.csv, and one GraphML per
/// (target, reference) pair, drawn on the target's giant component.
void export_atlas(const std::vector<AtlasEntry>& entries, const std::vector<CohortNetwork>& networks,
                  const TierMap& tiers, const std::map<std::string, int>& key_index,
                  const std::filesystem::path& dir);

}  // namespace coexpress
