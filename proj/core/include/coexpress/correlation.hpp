// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coexpress/expression.hpp"
#include "coexpress/matrix.hpp"

namespace coexpress {

struct GeneSet;

/// Sample Pearson coefficient, clamped to [-1, 1]. Throws ZeroVariance.
double pearson(std::span<const double> x, std::span<const double> y);

enum class Axis { samples, genes };

struct CorrelationMatrix {
  std::vector<std::string> ids;
  Matrix values;  ///< symmetric, unit diagonal
  Axis entity_kind = Axis::samples;
  std::vector<std::string> excluded;  ///< zero-variance entities left out
};

/// Centre and scale rows to unit length so that a dot product is a Pearson
/// coefficient. Rows with zero variance come back as nullopt.
std::vector<std::optional<std::vector<double>>> standardize_rows(const std::vector<std::vector<double>>& rows);

/// Correlate every pair of samples (columns) or genes (rows).
///
/// With `subset`, only those genes contribute: as coordinates for the sample
/// axis, as entities for the gene axis.
CorrelationMatrix pairwise(const ExpressionMatrix& m, Axis axis, const GeneSet* subset = nullptr);

/// Class x class table of mean correlations.
struct GroupMeans {
  std::vector<std::string> classes;
  std::vector<std::vector<std::optional<double>>> cells;  ///< nullopt = undefined
};

/// Within-class cells average pairs i < j of that class; between-class cells
/// average all cross pairs. `groups` is aligned with c.ids. Classes appear in
/// first-appearance order unless `class_order` is given.
GroupMeans group_mean(const CorrelationMatrix& c, std::span<const std::string> groups,
                      const std::vector<std::string>& class_order = {});

void write_group_means(const GroupMeans& g, const std::filesystem::path& path);

/// Entity order used by the heatmap: grouped by class, and inside a class by
/// descending mean correlation with the other members of that class.
std::vector<std::size_t> heatmap_order(const CorrelationMatrix& c, std::span<const std::string> groups,
                                       const std::vector<std::string>& class_order = {});

/// Largest matrix dimension rendered to SVG.
inline constexpr std::size_t kMaxSvgCells = 1000;

/// Write the reordered matrix as CSV and, when `svg_path` is set and the
/// matrix fits in kMaxSvgCells, as an SVG grid. Returns true if SVG was written.
bool export_heatmap(const CorrelationMatrix& c, std::span<const std::string> groups,
                    const std::filesystem::path& csv_path,
                    const std::optional<std::filesystem::path>& svg_path,
                    const std::vector<std::string>& class_order = {});

/// Diverging colour: -1 blue, 0 white, +1 red, as "#rrggbb".
std::string diverging_color(double r);

}  // namespace coexpress
