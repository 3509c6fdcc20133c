// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "coexpress/gcn.hpp"
#include "coexpress/rng.hpp"

namespace {

/// Erdos-Renyi graph with n nodes and edge probability p.
coexpress::GeneGraph random_graph(std::size_t n, double p, std::uint64_t seed) {
  coexpress::Rng rng(seed);
  std::vector<std::string> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back("g" + std::to_string(i));
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.emplace_back(i, j);
  }
  return coexpress::GeneGraph::from_edges(nodes, edges);
}

void BM_Louvain(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_graph(n, static_cast<double>(state.range(1)) / 1000.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(coexpress::detect_communities(g, 1));
  state.counters["edges"] = static_cast<double>(g.edge_count());
}
BENCHMARK(BM_Louvain)->Args({100, 50})->Args({559, 10})->Args({559, 50})->Unit(benchmark::kMillisecond);

void BM_Modularity(benchmark::State& state) {
  const auto g = random_graph(559, 0.05, 4);
  const auto p = coexpress::detect_communities(g, 1);
  for (auto _ : state) benchmark::DoNotOptimize(coexpress::modularity(g, p.community));
}
BENCHMARK(BM_Modularity)->Unit(benchmark::kMicrosecond);

}  // namespace
