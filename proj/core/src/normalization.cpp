// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "coexpress/normalization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "coexpress/error.hpp"
#include "coexpress/parallel.hpp"

namespace coexpress {
namespace {

std::vector<double> range_map(std::span<const double> v) {
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw DegenerateRow("constant row has no range");
  std::vector<double> out(v.size());
  const double width = hi - lo;
  for (std::size_t i = 0; i < v.size(); ++i) {
    // Endpoints are exact by construction.
    out[i] = v[i] == lo ? 0.0 : v[i] == hi ? 1.0 : (v[i] - lo) / width;
  }
  return out;
}

std::vector<double> log_map(std::span<const double> v) {
  double min_positive = std::numeric_limits<double>::infinity();
  for (double x : v) {
    if (x < 0.0) throw std::invalid_argument("log normalization needs non-negative values");
    if (x > 0.0) min_positive = std::min(min_positive, x);
  }
  if (!std::isfinite(min_positive)) throw DegenerateRow("all-zero row under log");
  std::vector<double> logged(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    logged[i] = std::log10(v[i] > 0.0 ? v[i] : min_positive / 10.0);
  return range_map(logged);
}

std::vector<double> rank_map(std::span<const double> v) {
  std::vector<double> distinct(v.begin(), v.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw DegenerateRow("constant row has a single rank");
  const double top = static_cast<double>(distinct.size() - 1);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto rank0 = std::lower_bound(distinct.begin(), distinct.end(), v[i]) - distinct.begin();
    out[i] = static_cast<double>(rank0) / top;
  }
  return out;
}

void logit_in_place(std::vector<double>& v, double eps) {
  for (double& x : v) {
    const double c = std::clamp(x, eps, 1.0 - eps);
    x = std::log(c) - std::log1p(-c);
  }
}

}  // namespace

void NormalizationScheme::validate() const {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("epsilon must lie in (0, 0.5)");
}

Scheme parse_scheme(std::string_view name) {
  if (name == "origin") return Scheme::origin;
  if (name == "range") return Scheme::range;
  if (name == "log") return Scheme::log;
  if (name == "rank") return Scheme::rank;
  if (name == "logit") return Scheme::logit;
  if (name == "logit_log") return Scheme::logit_log;
  throw std::invalid_argument("unknown normalization scheme '" + std::string(name) + "'");
}

std::string_view scheme_name(Scheme s) noexcept {
  switch (s) {
    case Scheme::origin: return "origin";
    case Scheme::range: return "range";
    case Scheme::log: return "log";
    case Scheme::rank: return "rank";
    case Scheme::logit: return "logit";
    case Scheme::logit_log: return "logit_log";
  }
  return "unknown";
}

std::vector<double> normalize_row(std::span<const double> values, const NormalizationScheme& scheme) {
  scheme.validate();
  if (values.size() < 2) throw std::invalid_argument("normalization needs at least two values");
  switch (scheme.variant) {
    case Scheme::origin:
      return {values.begin(), values.end()};
    case Scheme::range:
      return range_map(values);
    case Scheme::log:
      return log_map(values);
    case Scheme::rank:
      return rank_map(values);
    case Scheme::logit: {
      auto out = range_map(values);
      logit_in_place(out, scheme.epsilon);
      return out;
    }
    case Scheme::logit_log: {
      auto out = log_map(values);
      logit_in_place(out, scheme.epsilon);
      return out;
    }
  }
  throw std::invalid_argument("unhandled normalization scheme");
}

NormalizedMatrix normalize_matrix(const ExpressionMatrix& m, const NormalizationScheme& scheme) {
  scheme.validate();
  std::vector<std::optional<std::vector<double>>> rows(m.genes());
  parallel_for(m.genes(), [&](std::size_t r) {
    try {
      rows[r] = normalize_row(m.values.row(r), scheme);
    } catch (const DegenerateRow&) {
      rows[r].reset();
    }
  });

  NormalizedMatrix result;
  auto& out = result.matrix;
  out.sample_ids = m.sample_ids;
  out.labels = m.labels;
  std::size_t kept = 0;
  for (const auto& r : rows) kept += r.has_value();
  if (kept == 0) throw DegenerateRow("every gene row is degenerate under " + std::string(scheme_name(scheme.variant)));

  out.values = Matrix(kept, m.samples());
  std::size_t i = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r]) {
      result.dropped.push_back(m.gene_ids[r]);
      continue;
    }
    out.gene_ids.push_back(m.gene_ids[r]);
    std::copy(rows[r]->begin(), rows[r]->end(), out.values.row(i++).begin());
  }
  return result;
}

}  // namespace coexpress
