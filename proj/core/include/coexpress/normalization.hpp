// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coexpress/expression.hpp"

namespace coexpress {

enum class Scheme { origin, range, log, rank, logit, logit_log };

/// Per-gene normalization scheme.
///
///   origin     identity
///   range      linear map of [min, max] onto [0, 1]
///   log        log10, then range (zeros clamped to min positive / 10)
///   rank       dense ranks 1..R, then linear map of [1, R] onto [0, 1]
///   logit      ln(x / (1 - x)) of range output, clamped to [eps, 1 - eps]
///   logit_log  logit of log output
struct NormalizationScheme {
  Scheme variant = Scheme::rank;
  double epsilon = 1e-6;

  /// Throws std::invalid_argument unless 0 < epsilon < 0.5.
  void validate() const;
};

Scheme parse_scheme(std::string_view name);
std::string_view scheme_name(Scheme s) noexcept;

/// Throws DegenerateRow for a constant row under any scheme except origin,
/// and std::invalid_argument for short rows or negative input to log schemes.
std::vector<double> normalize_row(std::span<const double> values, const NormalizationScheme& scheme);

struct NormalizedMatrix {
  ExpressionMatrix matrix;
  std::vector<std::string> dropped;  ///< degenerate genes removed
};

/// Normalize every gene row independently; degenerate rows are dropped and listed.
NormalizedMatrix normalize_matrix(const ExpressionMatrix& m, const NormalizationScheme& scheme);

}  // namespace coexpress
