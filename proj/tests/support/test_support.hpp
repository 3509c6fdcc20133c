// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures and brute-force oracles. Oracles here deliberately avoid
// calling the library routine they check.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "coexpress/expression.hpp"
#include "coexpress/gcn.hpp"
#include "coexpress/matrix.hpp"
#include "coexpress/pipeline.hpp"
#include "coexpress/synth.hpp"

namespace coexpress::test {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& body) const;

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

ExpressionMatrix make_matrix(std::vector<std::string> genes, std::vector<std::string> samples,
                             std::vector<std::string> labels, const std::vector<std::vector<double>>& rows);

/// Naive two-pass Pearson in long double.
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y);

/// Σ_ij [A_ij − k_i k_j / 2m] δ(c_i, c_j) / 2m over the dense adjacency.
double modularity_oracle(const GeneGraph& g, const std::vector<std::size_t>& community);

/// Every set partition of n nodes as restricted growth strings.
std::vector<std::vector<std::size_t>> all_partitions(std::size_t n);

/// Exhaustive maximum modularity over all set partitions.
double max_modularity_oracle(const GeneGraph& g);

struct SplitOracle {
  double gain = 0.0;  ///< before gamma
  int feature = -1;
  double threshold = 0.0;
};

/// Best single split over all features x all midpoints, recomputing sums
/// from scratch for every candidate.
SplitOracle best_split_oracle(const Matrix& x, const std::vector<double>& grad, const std::vector<double>& hess,
                              double lambda, double min_child_weight);

GeneGraph random_graph(std::size_t n, double p, std::uint64_t seed);
GeneGraph barbell();
GeneGraph disjoint_triangles();

/// Two 4-gene cliques with internal weight 0.6 and cross weight 0.49 on a
/// perfect matching. The cross edges vanish at t = 0.5 and everything at 0.62.
WeightedGeneGraph two_clique_weighted();

/// The planted-recovery fixture: 3 classes x 20 samples, 50 background and
/// 10 planted genes per class at 3 sigma.
SynthSpec planted_spec(std::uint64_t seed = 7);

/// Writes the planted fixture (with one co-expression block) into `data` and
/// returns a pipeline config small enough to run in a few seconds.
PipelineConfig quick_pipeline(const std::filesystem::path& data, const std::filesystem::path& out);

}  // namespace coexpress::test
