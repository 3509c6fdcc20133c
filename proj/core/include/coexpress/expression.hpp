// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coexpress/matrix.hpp"

namespace coexpress {

/// Genes x samples expression values with identifiers and per-sample site labels.
struct ExpressionMatrix {
  std::vector<std::string> gene_ids;
  std::vector<std::string> sample_ids;
  std::vector<std::string> labels;  ///< site class per sample
  Matrix values;                    ///< rows = genes, cols = samples

  std::size_t genes() const noexcept { return values.rows(); }
  std::size_t samples() const noexcept { return values.cols(); }

  /// Distinct labels in order of first appearance.
  std::vector<std::string> sites() const;

  /// Throws ValidationError if dimensions, uniqueness or finiteness break.
  void validate() const;

  std::optional<std::size_t> gene_index(const std::string& id) const;

  bool operator==(const ExpressionMatrix&) const = default;
};

struct LoadOptions {
  /// Field delimiter. '\0' picks ',' for *.csv and tab otherwise.
  char delimiter = '\0';
  /// Accepted site names. Empty accepts any label.
  std::vector<std::string> declared_sites;
};

/// Read a two-column (sample_id, site) label file. A header line whose second
/// field is "site" is skipped.
std::vector<std::pair<std::string, std::string>> load_labels(
    const std::filesystem::path& path);

/// Load a matrix file plus its label file.
///
/// The first row holds sample IDs (optionally preceded by a corner cell) and
/// the first column holds gene IDs. Parsing is locale independent.
ExpressionMatrix load_matrix(const std::filesystem::path& matrix_path,
                             const std::filesystem::path& labels_path,
                             const LoadOptions& options = {});

/// Load a matrix file without labels; every sample is labelled `unlabeled`.
ExpressionMatrix load_matrix_unlabeled(const std::filesystem::path& matrix_path,
                                       const LoadOptions& options = {});

/// Drop samples whose site is not listed in `sites`.
ExpressionMatrix keep_sites(const ExpressionMatrix& m, const std::vector<std::string>& sites);

/// Restrict to the listed genes, in the given order. Unknown IDs throw.
ExpressionMatrix select_genes(const ExpressionMatrix& m, const std::vector<std::string>& ids);

void write_matrix(const ExpressionMatrix& m, const std::filesystem::path& path, char delimiter = '\t');
void write_labels(const ExpressionMatrix& m, const std::filesystem::path& path);

struct CleansingReport {
  std::size_t removed_all_zero = 0;
  std::size_t removed_duplicates = 0;
  /// column_order[j] = original index of the sample now in column j.
  std::vector<std::size_t> column_order;
  bool truncation_applied = true;
  /// Duplicate gene IDs whose dropped rows differed from the kept row.
  std::vector<std::string> duplicate_conflicts;
};

struct Cleansed {
  ExpressionMatrix matrix;
  CleansingReport report;
};

/// Truncate toward zero to three decimals. Values already on the 0.001 grid
/// (up to binary representation error) are left on their grid point.
double truncate3(double v) noexcept;

/// Remove all-zero genes, drop duplicate gene IDs (first kept), group the
/// columns by `site_order` (stable) and truncate every value to 3 decimals.
Cleansed cleanse(const ExpressionMatrix& m, const std::vector<std::string>& site_order);

struct GeneStats {
  std::string gene_id;
  double max = 0.0;
  double min = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double sensitivity = 0.0;  ///< max - min
};

std::vector<GeneStats> gene_stats(const ExpressionMatrix& m);

enum class StatsOrder { by_mean, by_sensitivity };

/// CSV sorted descending by the chosen key, ties by gene ID ascending.
void export_stats(std::vector<GeneStats> stats, StatsOrder order, const std::filesystem::path& path);

}  // namespace coexpress
