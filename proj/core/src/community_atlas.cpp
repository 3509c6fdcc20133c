// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "coexpress/community_atlas.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "coexpress/error.hpp"
#include "coexpress/text.hpp"

namespace coexpress {
namespace {

std::string strip_set_prefix(const std::string& name) {
  return name.size() > 3 && name.compare(0, 3, "set") == 0 ? name.substr(3) : name;
}

std::string key_list(const std::vector<int>& keys) {
  std::string out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(keys[i]);
  }
  return out;
}

void write_communities_csv(const AtlasEntry& e, const TierMap& tiers, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "community_rank,size";
  for (const auto& c : tiers.columns) out << ',' << c;
  out << ",key_indices\n";
  auto row = [&](const std::string& rank, const AtlasCommunity& c) {
    out << rank << ',' << c.size();
    for (std::size_t t : c.tier_counts) out << ',' << t;
    out << ',' << key_list(c.key_indices) << '\n';
  };
  for (const auto& c : e.communities) row(std::to_string(c.rank), c);
  row("total", e.totals);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

const std::vector<std::string> kPalette = {
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#bfef45",
    "#fabed4", "#469990", "#dcbeff", "#9a6324", "#fffac8", "#800000", "#aaffc3", "#000075"};

std::optional<std::size_t> TierMap::tier(const std::string& gene) const {
  const auto it = tier_of.find(gene);
  if (it == tier_of.end()) return std::nullopt;
  return it->second;
}

TierMap tier_genes(const std::vector<GeneSet>& nested) {
  if (nested.empty()) throw std::invalid_argument("no gene sets to tier");
  TierMap tm;
  for (std::size_t k = 0; k < nested.size(); ++k) {
    if (k > 0) {
      const std::unordered_set<std::string> outer(nested[k].gene_ids.begin(), nested[k].gene_ids.end());
      for (const auto& g : nested[k - 1].gene_ids)
        if (!outer.contains(g))
          throw ValidationError("gene set '" + nested[k - 1].name + "' is not contained in '" + nested[k].name + "'");
    }
    tm.columns.push_back(k == 0 ? nested[0].name
                                : nested[k].name + "_minus_" + strip_set_prefix(nested[k - 1].name));
    std::size_t added = 0;
    for (const auto& g : nested[k].gene_ids)
      if (tm.tier_of.emplace(g, k).second) ++added;
    tm.populations.push_back(added);
  }
  return tm;
}

std::map<std::string, int> key_gene_indices(const EliminationStep& step) {
  const auto& ids = step.genes.gene_ids;
  const auto& imp = step.report.importance;
  std::vector<std::size_t> idx(ids.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (imp[a] != imp[b]) return imp[a] > imp[b];
    return ids[a] < ids[b];
  });
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < idx.size(); ++i) out[ids[idx[i]]] = static_cast<int>(i);
  return out;
}

std::vector<std::size_t> community_ranks(const GeneGraph& g, const Partition& p) {
  std::vector<std::size_t> size(p.count, 0);
  std::vector<const std::string*> smallest(p.count, nullptr);
  for (std::size_t v = 0; v < p.community.size(); ++v) {
    const auto c = p.community[v];
    ++size[c];
    if (!smallest[c] || g.nodes[v] < *smallest[c]) smallest[c] = &g.nodes[v];
  }
  std::vector<std::size_t> order(p.count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (size[a] != size[b]) return size[a] > size[b];
    return *smallest[a] < *smallest[b];
  });
  std::vector<std::size_t> rank(p.count);
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i + 1;
  return rank;
}

std::vector<AtlasEntry> build_atlas(const std::vector<CohortNetwork>& networks, const TierMap& tiers,
                                    const std::map<std::string, int>& key_index) {
  std::vector<AtlasEntry> entries;
  for (const auto& net : networks) {
    AtlasEntry e;
    e.cohort = net.cohort;
    e.threshold = net.graph.threshold;
    e.network = network_summary(net.graph, net.partition);

    // Restrict to the giant component; tiny components are not tabulated.
    const auto giant = giant_component(net.graph);
    std::unordered_map<std::string, std::size_t> community_of;
    for (std::size_t v = 0; v < net.graph.node_count(); ++v)
      community_of.emplace(net.graph.nodes[v], net.partition.community[v]);
    std::vector<std::size_t> sub_comm;
    for (const auto& id : giant.nodes) sub_comm.push_back(community_of.at(id));
    Partition sub;
    sub.community = renumber(sub_comm);
    sub.count = sub.community.empty() ? 0 : *std::max_element(sub.community.begin(), sub.community.end()) + 1;
    if (giant.edge_count() > 0) sub.modularity = modularity(giant, sub.community);
    e.giant = network_summary(giant, sub);

    const auto ranks = community_ranks(giant, sub);
    e.communities.resize(sub.count);
    for (std::size_t c = 0; c < sub.count; ++c) {
      e.communities[c].rank = ranks[c];
      e.communities[c].tier_counts.assign(tiers.tier_count(), 0);
    }
    e.totals.tier_counts.assign(tiers.tier_count(), 0);
    for (std::size_t v = 0; v < giant.node_count(); ++v) {
      const auto& id = giant.nodes[v];
      auto& com = e.communities[sub.community[v]];
      com.members.push_back(id);
      e.totals.members.push_back(id);
      if (const auto t = tiers.tier(id)) {
        ++com.tier_counts[*t];
        ++e.totals.tier_counts[*t];
      } else {
        e.untiered.push_back(id);
      }
      if (const auto k = key_index.find(id); k != key_index.end()) {
        com.key_indices.push_back(k->second);
        e.totals.key_indices.push_back(k->second);
      }
    }
    for (auto& c : e.communities) std::sort(c.key_indices.begin(), c.key_indices.end());
    std::sort(e.totals.key_indices.begin(), e.totals.key_indices.end());
    std::sort(e.communities.begin(), e.communities.end(),
              [](const AtlasCommunity& a, const AtlasCommunity& b) { return a.rank < b.rank; });
    entries.push_back(std::move(e));
  }
  return entries;
}

NodeColoring cross_color(const GeneGraph& target, const GeneGraph& reference, const Partition& reference_partition) {
  if (reference_partition.community.size() != reference.node_count())
    throw std::invalid_argument("reference partition does not cover the reference graph");
  const auto ranks = community_ranks(reference, reference_partition);
  std::unordered_map<std::string, std::size_t> rank_of;
  for (std::size_t v = 0; v < reference.node_count(); ++v)
    rank_of.emplace(reference.nodes[v], ranks[reference_partition.community[v]]);

  NodeColoring out;
  for (const auto& id : target.nodes) {
    const auto it = rank_of.find(id);
    if (it == rank_of.end()) {
      out.reference_rank.emplace_back();
      out.color.emplace_back(kNeutralColor);
    } else {
      out.reference_rank.emplace_back(it->second);
      out.color.push_back(it->second <= kPalette.size() ? kPalette[it->second - 1] : kOverflowColor);
    }
  }
  return out;
}

int tier_node_size(std::optional<std::size_t> tier) noexcept {
  if (!tier) return 5;
  switch (*tier) {
    case 0: return 40;
    case 1: return 30;
    case 2: return 20;
    default: return 10;
  }
}

void export_atlas(const std::vector<AtlasEntry>& entries, const std::vector<CohortNetwork>& networks,
                  const TierMap& tiers, const std::map<std::string, int>& key_index,
                  const std::filesystem::path& dir) {
  for (const auto& e : entries) write_communities_csv(e, tiers, dir / (e.cohort + "_communities.csv"));

  {
    auto out = open_output(dir / "summary.csv");
    out << "cohort,threshold,nodes,edges,average_degree,modularity,giant_size,giant_edges,giant_average_degree,"
           "communities\n";
    for (const auto& e : entries) {
      out << e.cohort << ',' << format_double(e.threshold) << ',' << e.network.nodes << ',' << e.network.edges << ','
          << format_double(e.network.average_degree) << ',' << format_double(e.network.modularity) << ','
          << e.giant.nodes << ',' << e.giant.edges << ',' << format_double(e.giant.average_degree) << ','
          << e.communities.size() << '\n';
    }
    if (!out) throw IoError("failed writing summary.csv");
  }

  for (const auto& target : networks) {
    const auto giant = giant_component(target.graph);
    const auto own = cross_color(giant, target.graph, target.partition);
    for (const auto& reference : networks) {
      const auto colors = cross_color(giant, reference.graph, reference.partition);
      NodeAttribute community{"community", "int", {}}, ref_community{"reference_community", "int", {}},
          color{"color", "string", {}}, size{"size", "int", {}}, tier{"tier", "int", {}},
          key{"key_index", "int", {}};
      for (std::size_t v = 0; v < giant.node_count(); ++v) {
        const auto& id = giant.nodes[v];
        community.values.push_back(std::to_string(*own.reference_rank[v]));
        ref_community.values.push_back(colors.reference_rank[v] ? std::to_string(*colors.reference_rank[v]) : "-1");
        color.values.push_back(colors.color[v]);
        const auto t = tiers.tier(id);
        size.values.push_back(std::to_string(tier_node_size(t)));
        tier.values.push_back(t ? std::to_string(*t) : "-1");
        const auto k = key_index.find(id);
        key.values.push_back(k == key_index.end() ? "-1" : std::to_string(k->second));
      }
      write_graphml(giant, {community, ref_community, color, size, tier, key},
                    dir / (target.cohort + "_in_" + reference.cohort + "_colors.graphml"));
    }
  }
}

}  // namespace coexpress
