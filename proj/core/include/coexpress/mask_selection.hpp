// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coexpress/expression.hpp"
#include "coexpress/gene_set.hpp"

namespace coexpress {

/// 0/1 indicator over samples marking one site class.
struct SiteMask {
  std::string site;
  std::vector<double> indicator;
};

/// One mask per site, in first-appearance order. Needs at least two sites.
std::vector<SiteMask> build_masks(std::span<const std::string> labels);

/// One mask per listed site. A site absent from `labels` throws ValidationError.
std::vector<SiteMask> build_masks(std::span<const std::string> labels, const std::vector<std::string>& sites);

/// Correlation of every gene with every site mask.
struct MaskCorrelations {
  std::vector<std::string> sites;
  std::vector<std::string> gene_ids;
  std::vector<std::vector<double>> values;  ///< values[gene][site]
  std::vector<std::string> excluded;        ///< zero-variance genes

  /// Column of `site`; throws std::out_of_range when unknown.
  std::size_t site_index(const std::string& site) const;
};

MaskCorrelations mask_correlations(const ExpressionMatrix& m, const std::vector<SiteMask>& masks);

/// Kept iff max over masks of |C_site| >= t.
GeneSet select_by_any_mask(const MaskCorrelations& mc, double t);

/// Kept iff |C_site| >= t for every mask.
GeneSet select_three_mask_intersect(const MaskCorrelations& mc, double t);

/// The two sites whose correlations must have opposite signs.
struct SitePair {
  std::string first = "LN";
  std::string second = "Bone";
};

/// All |C_site| >= t_intersect, both pair sites |C| >= t_pair, and
/// C_first * C_second < 0 (strict).
GeneSet select_combined(const MaskCorrelations& mc, double t_intersect, double t_pair, const SitePair& pair = {});

/// Single-threshold form of the combined rule; t = 0.2 reproduces the default.
inline GeneSet select_combined(const MaskCorrelations& mc, double t = 0.2, const SitePair& pair = {}) {
  return select_combined(mc, t, t, pair);
}

struct SweepRow {
  double threshold = 0.0;
  std::string rule;  ///< any, intersect, combined, or mask:<site>
  std::size_t kept = 0;
};

/// Kept counts per rule per threshold. `combined` rows appear only when both
/// pair sites are present.
std::vector<SweepRow> sweep_report(const MaskCorrelations& mc, const std::vector<double>& thresholds,
                                   const SitePair& pair = {});

void write_sweep_report(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

/// lo, lo + step, ..., up to hi inclusive (with a small tolerance for
/// accumulated rounding), each value rounded to 1e-9.
std::vector<double> threshold_grid(double lo, double hi, double step);

}  // namespace coexpress
