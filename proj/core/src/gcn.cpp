// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "coexpress/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "coexpress/correlation.hpp"
#include "coexpress/error.hpp"
#include "coexpress/mask_selection.hpp"
#include "coexpress/parallel.hpp"
#include "coexpress/rng.hpp"
#include "coexpress/text.hpp"

namespace coexpress {
namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Weighted graph used inside Louvain. Self-loop weight `self[i]` counts
/// both endpoints, so degree[i] = sum of neighbour weights + self[i].
struct LevelGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;
  std::vector<double> self;
  std::vector<double> degree;
  double total = 0.0;  ///< 2m

  std::size_t size() const { return adj.size(); }
};

LevelGraph level_from(const GeneGraph& g) {
  LevelGraph lg;
  const std::size_t n = g.node_count();
  lg.adj.resize(n);
  lg.self.assign(n, 0.0);
  lg.degree.assign(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u : g.adjacency[v]) lg.adj[v].emplace_back(u, 1.0);
    lg.degree[v] = static_cast<double>(g.adjacency[v].size());
    lg.total += lg.degree[v];
  }
  return lg;
}

/// One round of local moves. Returns true if any node changed community.
bool local_moves(const LevelGraph& lg, std::vector<std::size_t>& comm, Rng& rng) {
  const std::size_t n = lg.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) tot[comm[v]] += lg.degree[v];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<double> link(n, 0.0);
  std::vector<char> touched_flag(n, 0);
  std::vector<std::size_t> touched;
  bool any_move = false;
  while (true) {
    std::size_t moves = 0;
    for (std::size_t v : order) {
      const std::size_t own = comm[v];
      const double k = lg.degree[v];
      touched.clear();
      for (const auto& [u, w] : lg.adj[v]) {
        const std::size_t c = comm[u];
        if (!touched_flag[c]) {
          touched_flag[c] = 1;
          touched.push_back(c);
        }
        link[c] += w;
      }
      tot[own] -= k;
      std::size_t best = own;
      double best_gain = link[own] - tot[own] * k / lg.total;
      for (std::size_t c : touched) {
        const double gain = link[c] - tot[c] * k / lg.total;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best = c;
        }
      }
      tot[best] += k;
      comm[v] = best;
      if (best != own) ++moves;
      for (std::size_t c : touched) {
        link[c] = 0.0;
        touched_flag[c] = 0;
      }
      link[own] = 0.0;
    }
    if (moves == 0) break;
    any_move = true;
  }
  return any_move;
}

/// Kernighan-Lin refinement: each pass moves every node once, always taking
/// the best available move even when it lowers Q, then keeps the best prefix
/// of that move sequence. A pass ends early after kKlPatience moves without a
/// new best prefix. Stops when a pass yields no gain.
constexpr std::size_t kKlPatience = 32;

void kl_refine(const LevelGraph& lg, std::vector<std::size_t>& comm) {
  const std::size_t n = lg.size();
  const double total = lg.total;
  std::vector<double> link(n, 0.0);
  std::vector<char> touched_flag(n, 0);
  std::vector<std::size_t> touched;

  while (true) {
    std::vector<double> tot(n, 0.0);
    std::vector<std::size_t> members(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
      tot[comm[v]] += lg.degree[v];
      ++members[comm[v]];
    }
    std::vector<char> moved(n, 0);
    std::vector<std::pair<std::size_t, std::size_t>> undo;  // node, previous community
    double gain = 0.0;
    double best_gain = 0.0;
    std::size_t best_len = 0;

    for (std::size_t step = 0; step < n && step < best_len + kKlPatience; ++step) {
      double step_best = -std::numeric_limits<double>::infinity();
      std::size_t step_v = n;
      std::size_t step_c = n;
      for (std::size_t v = 0; v < n; ++v) {
        if (moved[v] || lg.degree[v] == 0.0) continue;
        const std::size_t own = comm[v];
        const double k = lg.degree[v];
        touched.clear();
        for (const auto& [u, w] : lg.adj[v]) {
          const std::size_t c = comm[u];
          if (!touched_flag[c]) {
            touched_flag[c] = 1;
            touched.push_back(c);
          }
          link[c] += w;
        }
        const auto delta = [&](double link_c, double tot_c) {
          return 2.0 * (link_c - link[own]) / total - 2.0 * k * (tot_c - tot[own] + k) / (total * total);
        };
        std::sort(touched.begin(), touched.end());
        for (std::size_t c : touched) {
          if (c == own) continue;
          const double d = delta(link[c], tot[c]);
          if (d > step_best + 1e-12) {
            step_best = d;
            step_v = v;
            step_c = c;
          }
        }
        if (members[own] > 1) {
          const double d = delta(0.0, 0.0);
          if (d > step_best + 1e-12) {
            step_best = d;
            step_v = v;
            step_c = n;
          }
        }
        for (std::size_t c : touched) {
          link[c] = 0.0;
          touched_flag[c] = 0;
        }
      }
      if (step_v == n) break;
      if (step_c == n) step_c = static_cast<std::size_t>(std::find(members.begin(), members.end(), 0) - members.begin());
      const std::size_t own = comm[step_v];
      tot[own] -= lg.degree[step_v];
      --members[own];
      tot[step_c] += lg.degree[step_v];
      ++members[step_c];
      comm[step_v] = step_c;
      moved[step_v] = 1;
      undo.emplace_back(step_v, own);
      gain += step_best;
      if (gain > best_gain + 1e-12) {
        best_gain = gain;
        best_len = undo.size();
      }
    }
    while (undo.size() > best_len) {
      comm[undo.back().first] = undo.back().second;
      undo.pop_back();
    }
    if (best_len == 0) break;
  }
}

LevelGraph aggregate(const LevelGraph& lg, const std::vector<std::size_t>& comm, std::size_t count) {
  LevelGraph out;
  out.adj.resize(count);
  out.self.assign(count, 0.0);
  out.degree.assign(count, 0.0);
  out.total = lg.total;
  std::vector<std::unordered_map<std::size_t, double>> links(count);
  for (std::size_t v = 0; v < lg.size(); ++v) {
    const std::size_t cv = comm[v];
    out.self[cv] += lg.self[v];
    out.degree[cv] += lg.degree[v];
    for (const auto& [u, w] : lg.adj[v]) {
      if (comm[u] == cv) out.self[cv] += w;
      else links[cv][comm[u]] += w;
    }
  }
  for (std::size_t c = 0; c < count; ++c) {
    out.adj[c].assign(links[c].begin(), links[c].end());
    std::sort(out.adj[c].begin(), out.adj[c].end());
  }
  return out;
}

}  // namespace

WeightedGeneGraph build_weighted(const ExpressionMatrix& m, const GeneSet& genes, const std::string& cohort) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < m.samples(); ++c)
    if (cohort == kAllCohort || m.labels[c] == cohort) cols.push_back(c);
  if (cols.size() < 3)
    throw ValidationError("cohort '" + cohort + "' has " + std::to_string(cols.size()) + " samples; need 3");

  std::vector<std::vector<double>> rows;
  std::vector<std::string> names;
  for (const auto& id : genes.gene_ids) {
    const auto r = m.gene_index(id);
    if (!r) throw ValidationError("gene '" + id + "' is not in the matrix");
    std::vector<double> v;
    for (std::size_t c : cols) v.push_back(m.values(*r, c));
    rows.push_back(std::move(v));
    names.push_back(id);
  }
  auto z = standardize_rows(rows);

  WeightedGeneGraph wg;
  wg.cohort = cohort;
  std::vector<std::vector<double>> usable;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (z[i]) {
      wg.genes.push_back(names[i]);
      usable.push_back(std::move(*z[i]));
    } else {
      wg.excluded.push_back(names[i]);
    }
  }
  if (usable.size() < 2) throw ValidationError("fewer than two usable genes in cohort '" + cohort + "'");

  const std::size_t n = usable.size();
  wg.weights = Matrix(n, n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < usable[i].size(); ++k) s += usable[i][k] * usable[j][k];
      wg.weights(i, j) = std::min(1.0, std::abs(s));
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) wg.weights(j, i) = wg.weights(i, j);
  return wg;
}

std::size_t GeneGraph::edge_count() const noexcept {
  std::size_t sum = 0;
  for (const auto& a : adjacency) sum += a.size();
  return sum / 2;
}

std::vector<std::size_t> GeneGraph::isolated() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < adjacency.size(); ++v)
    if (adjacency[v].empty()) out.push_back(v);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> GeneGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t v = 0; v < adjacency.size(); ++v)
    for (std::size_t u : adjacency[v])
      if (v < u) out.emplace_back(v, u);
  return out;
}

GeneGraph GeneGraph::from_edges(std::vector<std::string> nodes,
                                const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  GeneGraph g;
  g.adjacency.resize(nodes.size());
  g.nodes = std::move(nodes);
  for (const auto& [u, v] : edges) {
    if (u == v || u >= g.nodes.size() || v >= g.nodes.size()) throw std::invalid_argument("bad edge");
    g.adjacency[u].push_back(v);
    g.adjacency[v].push_back(u);
  }
  for (auto& a : g.adjacency) {
    std::sort(a.begin(), a.end());
    if (std::adjacent_find(a.begin(), a.end()) != a.end()) throw std::invalid_argument("duplicate edge");
  }
  return g;
}

GeneGraph threshold_graph(const WeightedGeneGraph& wg, double t) {
  GeneGraph g;
  g.nodes = wg.genes;
  g.threshold = t;
  g.adjacency.resize(wg.genes.size());
  for (std::size_t i = 0; i < wg.genes.size(); ++i)
    for (std::size_t j = 0; j < wg.genes.size(); ++j)
      if (i != j && wg.weights(i, j) >= t) g.adjacency[i].push_back(j);
  return g;
}

std::vector<std::vector<std::size_t>> connected_components(const GeneGraph& g) {
  std::vector<char> seen(g.node_count(), 0);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < g.node_count(); ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp;
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      comp.push_back(v);
      for (std::size_t u : g.adjacency[v])
        if (!seen[u]) {
          seen[u] = 1;
          q.push(u);
        }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

GeneGraph induced_subgraph(const GeneGraph& g, std::vector<std::size_t> keep) {
  std::sort(keep.begin(), keep.end());
  std::vector<std::size_t> remap(g.node_count(), std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < keep.size(); ++i) remap[keep[i]] = i;
  GeneGraph out;
  out.threshold = g.threshold;
  out.adjacency.resize(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.nodes.push_back(g.nodes[keep[i]]);
    for (std::size_t u : g.adjacency[keep[i]])
      if (remap[u] != std::numeric_limits<std::size_t>::max()) out.adjacency[i].push_back(remap[u]);
  }
  return out;
}

GeneGraph giant_component(const GeneGraph& g) {
  if (g.node_count() == 0) return g;
  const auto comps = connected_components(g);
  auto min_id = [&](const std::vector<std::size_t>& c) {
    return *std::min_element(c.begin(), c.end(),
                             [&](std::size_t a, std::size_t b) { return g.nodes[a] < g.nodes[b]; });
  };
  const auto* best = &comps.front();
  for (const auto& c : comps) {
    if (c.size() > best->size() || (c.size() == best->size() && g.nodes[min_id(c)] < g.nodes[min_id(*best)]))
      best = &c;
  }
  return induced_subgraph(g, *best);
}

double modularity(const GeneGraph& g, std::span<const std::size_t> community) {
  if (community.size() != g.node_count()) throw std::invalid_argument("partition does not cover the graph");
  const double m = static_cast<double>(g.edge_count());
  if (m == 0.0) throw DegenerateGraph("modularity is undefined for a graph without edges");
  const std::size_t count =
      community.empty() ? 0 : *std::max_element(community.begin(), community.end()) + 1;
  std::vector<double> internal(count, 0.0), degree(count, 0.0);
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    degree[community[v]] += static_cast<double>(g.degree(v));
    for (std::size_t u : g.adjacency[v])
      if (v < u && community[u] == community[v]) internal[community[v]] += 1.0;
  }
  double q = 0.0;
  for (std::size_t c = 0; c < count; ++c) {
    const double share = degree[c] / (2.0 * m);
    q += internal[c] / m - share * share;
  }
  return q;
}

std::vector<std::size_t> renumber(std::span<const std::size_t> community) {
  std::unordered_map<std::size_t, std::size_t> ids;
  std::vector<std::size_t> out(community.size());
  for (std::size_t v = 0; v < community.size(); ++v) {
    const auto [it, _] = ids.emplace(community[v], ids.size());
    out[v] = it->second;
  }
  return out;
}

namespace {

/// One seeded Louvain run followed by single-node moves and Kernighan-Lin
/// refinement on the original graph.
std::vector<std::size_t> louvain_pass(const GeneGraph& g, const LevelGraph& base, std::uint64_t seed) {
  Rng rng(seed);
  LevelGraph level = base;
  std::vector<std::size_t> membership(g.node_count());
  std::iota(membership.begin(), membership.end(), std::size_t{0});

  while (true) {
    std::vector<std::size_t> comm(level.size());
    std::iota(comm.begin(), comm.end(), std::size_t{0});
    if (!local_moves(level, comm, rng)) break;
    comm = renumber(comm);
    const std::size_t count = *std::max_element(comm.begin(), comm.end()) + 1;
    for (auto& m : membership) m = comm[m];
    if (count == level.size()) break;
    level = aggregate(level, comm, count);
  }
  local_moves(base, membership, rng);
  kl_refine(base, membership);
  return renumber(membership);
}

}  // namespace

Partition detect_communities(const GeneGraph& g, std::uint64_t seed) {
  if (g.edge_count() == 0) throw DegenerateGraph("community detection needs at least one edge");

  const LevelGraph base = level_from(g);
  Partition best;
  best.modularity = -1.0;
  for (std::size_t r = 0; r < kLouvainRestarts; ++r) {
    auto community = louvain_pass(g, base, derive_seed(seed, "louvain:" + std::to_string(r)));
    const double q = modularity(g, community);
    if (q > best.modularity + 1e-12) {
      best.community = std::move(community);
      best.modularity = q;
    }
  }
  best.count = *std::max_element(best.community.begin(), best.community.end()) + 1;
  return best;
}

SweepRange parse_sweep(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ParseError("sweep must be lo:hi:step, got '" + text + "'");
  SweepRange r;
  const auto lo = parse_double(parts[0]), hi = parse_double(parts[1]), step = parse_double(parts[2]);
  if (!lo || !hi || !step || !(*step > 0.0) || *hi < *lo) throw ParseError("invalid sweep '" + text + "'");
  r.lo = *lo;
  r.hi = *hi;
  r.step = *step;
  return r;
}

ThresholdSelection select_threshold(const WeightedGeneGraph& wg, const SweepRange& range, std::optional<double> fixed,
                                    std::uint64_t seed) {
  ThresholdSelection out;
  if (fixed) {
    out.threshold = *fixed;
    out.overridden = true;
    out.graph = threshold_graph(wg, *fixed);
    if (out.graph.edge_count() > 0) out.partition = detect_communities(out.graph, seed);
    else {
      out.partition.community.resize(out.graph.node_count());
      std::iota(out.partition.community.begin(), out.partition.community.end(), std::size_t{0});
      out.partition.count = out.graph.node_count();
    }
    return out;
  }

  const auto grid = threshold_grid(range.lo, range.hi, range.step);
  std::vector<SweepPoint> points(grid.size());
  std::vector<Partition> partitions(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const auto g = threshold_graph(wg, grid[i]);
    auto& pt = points[i];
    pt.threshold = grid[i];
    pt.edges = g.edge_count();
    pt.giant_size = giant_component(g).node_count();
    if (pt.edges == 0) return;
    partitions[i] = detect_communities(g, seed);
    pt.modularity = partitions[i].modularity;
    pt.communities = partitions[i].count;
  });

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].modularity && (!best || *points[i].modularity > *points[*best].modularity)) best = i;
  if (!best) throw DegenerateGraph("no sweep threshold leaves any edge in cohort '" + wg.cohort + "'");

  out.threshold = grid[*best];
  out.graph = threshold_graph(wg, out.threshold);
  out.partition = std::move(partitions[*best]);
  out.sweep = std::move(points);
  return out;
}

NetworkSummary network_summary(const GeneGraph& g, const Partition& p) {
  NetworkSummary s;
  s.nodes = g.node_count();
  s.edges = g.edge_count();
  if (s.nodes == 0) return s;
  s.average_degree = 2.0 * static_cast<double>(s.edges) / static_cast<double>(s.nodes);
  s.modularity = s.edges > 0 && p.community.size() == s.nodes ? modularity(g, p.community) : 0.0;
  for (const auto& c : connected_components(g)) s.component_sizes.push_back(c.size());
  std::sort(s.component_sizes.rbegin(), s.component_sizes.rend());
  if (p.community.size() == s.nodes) {
    std::vector<std::size_t> sizes(p.count, 0);
    for (std::size_t c : p.community) ++sizes[c];
    std::sort(sizes.rbegin(), sizes.rend());
    s.community_sizes = std::move(sizes);
  }
  return s;
}

void write_edge_list(const GeneGraph& g, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "src\tdst\n";
  for (const auto& [u, v] : g.edges()) out << g.nodes[u] << '\t' << g.nodes[v] << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

void write_threshold_sweep(const std::vector<SweepPoint>& sweep, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "threshold,edges,modularity,communities,giant_size\n";
  for (const auto& p : sweep) {
    out << format_double(p.threshold) << ',' << p.edges << ',' << (p.modularity ? format_double(*p.modularity) : "NA")
        << ',' << p.communities << ',' << p.giant_size << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_communities(const GeneGraph& g, const Partition& p, const std::filesystem::path& path) {
  if (p.community.size() != g.node_count()) throw std::invalid_argument("partition does not cover the graph");
  auto out = open_output(path);
  out << "gene_id\tcommunity\n";
  for (std::size_t v = 0; v < g.node_count(); ++v) out << g.nodes[v] << '\t' << p.community[v] << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::pair<GeneGraph, Partition> read_network(const std::filesystem::path& communities,
                                             const std::filesystem::path& edges) {
  std::vector<std::string> nodes;
  std::vector<std::size_t> membership;
  std::unordered_map<std::string, std::size_t> index;
  {
    auto in = open_input(communities);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (lineno == 1 || trim(line).empty()) continue;
      const auto f = split(line, '\t');
      const auto c = f.size() == 2 ? parse_double(f[1]) : std::nullopt;
      if (!c || *c < 0.0 || *c != std::floor(*c)) throw ParseError("expected gene_id<TAB>community", lineno);
      if (!index.emplace(f[0], nodes.size()).second) throw ParseError("duplicate node '" + f[0] + "'", lineno);
      nodes.push_back(f[0]);
      membership.push_back(static_cast<std::size_t>(*c));
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> list;
  {
    auto in = open_input(edges);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (lineno == 1 || trim(line).empty()) continue;
      const auto f = split(line, '\t');
      if (f.size() != 2) throw ParseError("expected src<TAB>dst", lineno);
      const auto a = index.find(f[0]);
      const auto b = index.find(f[1]);
      if (a == index.end() || b == index.end()) throw ParseError("edge names an unknown node", lineno);
      list.emplace_back(a->second, b->second);
    }
  }
  GeneGraph g = GeneGraph::from_edges(std::move(nodes), list);
  Partition p;
  p.community = renumber(membership);
  p.count = p.community.empty() ? 0 : *std::max_element(p.community.begin(), p.community.end()) + 1;
  p.modularity = g.edge_count() > 0 ? modularity(g, p.community) : 0.0;
  return {std::move(g), std::move(p)};
}

void write_graphml(const GeneGraph& g, const std::vector<NodeAttribute>& attributes,
                   const std::filesystem::path& path) {
  for (const auto& a : attributes)
    if (a.values.size() != g.node_count()) throw std::invalid_argument("attribute '" + a.name + "' size mismatch");
  auto out = open_output(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" "
         "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
         "xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
         "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n";
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    out << "  <key id=\"d" << i << "\" for=\"node\" attr.name=\"" << xml_escape(attributes[i].name)
        << "\" attr.type=\"" << attributes[i].type << "\"/>\n";
  }
  out << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    out << "    <node id=\"" << xml_escape(g.nodes[v]) << "\">";
    for (std::size_t i = 0; i < attributes.size(); ++i)
      out << "<data key=\"d" << i << "\">" << xml_escape(attributes[i].values[v]) << "</data>";
    out << "</node>\n";
  }
  for (const auto& [u, v] : g.edges())
    out << "    <edge source=\"" << xml_escape(g.nodes[u]) << "\" target=\"" << xml_escape(g.nodes[v]) << "\"/>\n";
  out << "  </graph>\n</graphml>\n";
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace coexpress
