// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "coexpress/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "coexpress/error.hpp"
#include "coexpress/gene_set.hpp"
#include "coexpress/parallel.hpp"
#include "coexpress/text.hpp"

namespace coexpress {
namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool is_constant(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<std::string> resolve_classes(std::span<const std::string> groups,
                                         const std::vector<std::string>& class_order) {
  std::vector<std::string> classes = class_order;
  for (const auto& g : groups)
    if (std::find(classes.begin(), classes.end(), g) == classes.end()) {
      if (!class_order.empty()) throw ValidationError("entity class '" + g + "' missing from class order");
      classes.push_back(g);
    }
  return classes;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson: need at least two points");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw std::invalid_argument("pearson: non-finite input");
  if (is_constant(x) || is_constant(y)) throw ZeroVariance("pearson: zero variance input");

  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ZeroVariance("pearson: zero variance input");
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

std::vector<std::optional<std::vector<double>>> standardize_rows(const std::vector<std::vector<double>>& rows) {
  std::vector<std::optional<std::vector<double>>> out(rows.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    const auto& v = rows[i];
    if (v.size() < 2 || is_constant(v)) return;
    const double mu = mean_of(v);
    std::vector<double> z(v.size());
    double ss = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      z[k] = v[k] - mu;
      ss += z[k] * z[k];
    }
    if (ss == 0.0) return;
    const double inv = 1.0 / std::sqrt(ss);
    for (double& e : z) e *= inv;
    out[i] = std::move(z);
  });
  return out;
}

CorrelationMatrix pairwise(const ExpressionMatrix& m, Axis axis, const GeneSet* subset) {
  std::vector<std::size_t> gene_rows;
  if (subset) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < m.genes(); ++r) index.emplace(m.gene_ids[r], r);
    for (const auto& g : subset->gene_ids) {
      const auto it = index.find(g);
      if (it == index.end()) throw ValidationError("gene '" + g + "' is not in the matrix");
      gene_rows.push_back(it->second);
    }
  } else {
    gene_rows.resize(m.genes());
    std::iota(gene_rows.begin(), gene_rows.end(), std::size_t{0});
  }

  std::vector<std::string> names;
  std::vector<std::vector<double>> vectors;
  if (axis == Axis::samples) {
    if (gene_rows.size() < 2)
      throw std::invalid_argument("sample correlation needs at least two genes");
    for (std::size_t c = 0; c < m.samples(); ++c) {
      std::vector<double> v(gene_rows.size());
      for (std::size_t i = 0; i < gene_rows.size(); ++i) v[i] = m.values(gene_rows[i], c);
      names.push_back(m.sample_ids[c]);
      vectors.push_back(std::move(v));
    }
  } else {
    if (m.samples() < 2) throw std::invalid_argument("gene correlation needs at least two samples");
    for (std::size_t r : gene_rows) {
      const auto row = m.values.row(r);
      names.push_back(m.gene_ids[r]);
      vectors.emplace_back(row.begin(), row.end());
    }
  }

  auto standardized = standardize_rows(vectors);
  CorrelationMatrix out;
  out.entity_kind = axis;
  std::vector<std::vector<double>> usable;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (standardized[i]) {
      out.ids.push_back(names[i]);
      usable.push_back(std::move(*standardized[i]));
    } else {
      out.excluded.push_back(names[i]);
    }
  }
  if (usable.size() < 2) throw ValidationError("fewer than two entities with non-zero variance");

  const std::size_t n = usable.size();
  out.values = Matrix(n, n);
  parallel_for(n, [&](std::size_t i) {
    out.values(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) out.values(i, j) = std::clamp(dot(usable[i], usable[j]), -1.0, 1.0);
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.values(j, i) = out.values(i, j);
  return out;
}

GroupMeans group_mean(const CorrelationMatrix& c, std::span<const std::string> groups,
                      const std::vector<std::string>& class_order) {
  if (groups.size() != c.ids.size()) throw std::invalid_argument("group_mean: one class per entity required");
  GroupMeans out;
  out.classes = resolve_classes(groups, class_order);
  const std::size_t k = out.classes.size();
  std::vector<std::size_t> cls(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i)
    cls[i] = std::find(out.classes.begin(), out.classes.end(), groups[i]) - out.classes.begin();

  std::vector<std::vector<double>> sum(k, std::vector<double>(k, 0.0));
  std::vector<std::vector<std::size_t>> count(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const std::size_t a = std::min(cls[i], cls[j]);
      const std::size_t b = std::max(cls[i], cls[j]);
      sum[a][b] += c.values(i, j);
      ++count[a][b];
    }
  }
  out.cells.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      if (count[a][b] == 0) continue;
      const double mean = sum[a][b] / static_cast<double>(count[a][b]);
      out.cells[a][b] = mean;
      out.cells[b][a] = mean;
    }
  }
  return out;
}

void write_group_means(const GroupMeans& g, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "class";
  for (const auto& c : g.classes) out << ',' << c;
  out << '\n';
  for (std::size_t a = 0; a < g.classes.size(); ++a) {
    out << g.classes[a];
    for (const auto& cell : g.cells[a]) out << ',' << (cell ? format_double(*cell) : "NA");
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::size_t> heatmap_order(const CorrelationMatrix& c, std::span<const std::string> groups,
                                       const std::vector<std::string>& class_order) {
  if (groups.size() != c.ids.size()) throw std::invalid_argument("heatmap: one class per entity required");
  const auto classes = resolve_classes(groups, class_order);
  std::vector<std::size_t> order;
  for (const auto& cls : classes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < groups.size(); ++i)
      if (groups[i] == cls) members.push_back(i);
    std::vector<double> within(members.size(), 0.0);
    for (std::size_t a = 0; a < members.size(); ++a) {
      double s = 0.0;
      for (std::size_t b = 0; b < members.size(); ++b)
        if (a != b) s += c.values(members[a], members[b]);
      within[a] = members.size() > 1 ? s / static_cast<double>(members.size() - 1) : 0.0;
    }
    std::vector<std::size_t> idx(members.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return within[a] > within[b]; });
    for (std::size_t i : idx) order.push_back(members[i]);
  }
  return order;
}

std::string diverging_color(double r) {
  r = std::clamp(r, -1.0, 1.0);
  int red = 255, green = 255, blue = 255;
  if (r < 0.0) {
    const int fade = static_cast<int>(std::lround(255.0 * (1.0 + r)));
    red = fade;
    green = fade;
  } else {
    const int fade = static_cast<int>(std::lround(255.0 * (1.0 - r)));
    green = fade;
    blue = fade;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", red, green, blue);
  return buf;
}

bool export_heatmap(const CorrelationMatrix& c, std::span<const std::string> groups,
                    const std::filesystem::path& csv_path, const std::optional<std::filesystem::path>& svg_path,
                    const std::vector<std::string>& class_order) {
  const auto order = heatmap_order(c, groups, class_order);
  {
    auto out = open_output(csv_path);
    out << "id,group";
    for (std::size_t j : order) out << ',' << c.ids[j];
    out << '\n';
    for (std::size_t i : order) {
      out << c.ids[i] << ',' << groups[i];
      for (std::size_t j : order) out << ',' << format_double(c.values(i, j));
      out << '\n';
    }
    if (!out) throw IoError("failed writing " + csv_path.string());
  }

  const std::size_t n = order.size();
  if (!svg_path || n > kMaxSvgCells) return false;

  const std::size_t cell = std::max<std::size_t>(1, 800 / std::max<std::size_t>(n, 1));
  const std::size_t side = cell * n;
  auto out = open_output(*svg_path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << side << "\" height=\"" << side
      << "\" viewBox=\"0 0 " << side << ' ' << side << "\" shape-rendering=\"crispEdges\">\n";
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      out << "<rect x=\"" << b * cell << "\" y=\"" << a * cell << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"" << diverging_color(c.values(order[a], order[b])) << "\"/>\n";
    }
  }
  out << "</svg>\n";
  if (!out) throw IoError("failed writing " + svg_path->string());
  return true;
}

}  // namespace coexpress
