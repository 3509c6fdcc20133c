// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "coexpress/expression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "coexpress/error.hpp"
#include "coexpress/text.hpp"

namespace coexpress {
namespace {

char pick_delimiter(const std::filesystem::path& path, char requested) {
  if (requested != '\0') return requested;
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? ',' : '\t';
}

std::vector<std::string> trimmed_fields(std::string_view line, char delim) {
  auto fields = split(line, delim);
  for (auto& f : fields) f = std::string(trim(f));
  return fields;
}

ExpressionMatrix parse_matrix(const std::filesystem::path& path, char delim) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = trimmed_fields(line, delim);
      break;
    }
  }
  if (header.empty()) throw ParseError(path.string() + ": empty matrix file");
  const std::size_t header_line = line_no;

  std::vector<std::string> genes;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;  // fields per data row
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = trimmed_fields(line, delim);
    if (width == 0) {
      width = fields.size();
      if (width < 2) throw ParseError("row has no expression values", line_no);
      if (header.size() == width) {
        header.erase(header.begin());  // corner cell
      } else if (header.size() + 1 != width) {
        throw ParseError("header has " + std::to_string(header.size()) + " fields but first row has " +
                             std::to_string(width),
                         line_no);
      }
    }
    if (fields.size() != width) {
      throw ParseError("row '" + fields.front() + "' has " + std::to_string(fields.size()) +
                           " fields, expected " + std::to_string(width),
                       line_no);
    }
    if (fields.front().empty()) throw ParseError("empty gene ID", line_no);
    std::vector<double> values(width - 1);
    for (std::size_t c = 1; c < width; ++c) {
      const auto v = parse_double(fields[c]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("row '" + fields.front() + "' column " + std::to_string(c) +
                             ": not a finite number: '" + fields[c] + "'",
                         line_no);
      }
      values[c - 1] = *v;
    }
    genes.push_back(std::move(fields.front()));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError(path.string() + ": no gene rows");

  std::unordered_set<std::string> seen;
  for (const auto& s : header) {
    if (s.empty()) throw ParseError("empty sample ID in header", header_line);
    if (!seen.insert(s).second) throw ParseError("duplicate sample ID '" + s + "'", header_line);
  }

  ExpressionMatrix m;
  m.gene_ids = std::move(genes);
  m.sample_ids = std::move(header);
  m.values = Matrix(rows.size(), m.sample_ids.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy(rows[r].begin(), rows[r].end(), m.values.row(r).begin());
  return m;
}

}  // namespace

std::vector<std::string> ExpressionMatrix::sites() const {
  std::vector<std::string> out;
  for (const auto& l : labels)
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  return out;
}

void ExpressionMatrix::validate() const {
  if (values.rows() != gene_ids.size())
    throw ValidationError("row count does not match gene ID count");
  if (values.cols() != sample_ids.size() || labels.size() != sample_ids.size())
    throw ValidationError("column count does not match sample ID / label count");
  std::unordered_set<std::string> seen;
  for (const auto& s : sample_ids)
    if (!seen.insert(s).second) throw ValidationError("duplicate sample ID '" + s + "'");
  for (double v : values.data())
    if (!std::isfinite(v)) throw ValidationError("non-finite expression value");
}

std::optional<std::size_t> ExpressionMatrix::gene_index(const std::string& id) const {
  const auto it = std::find(gene_ids.begin(), gene_ids.end(), id);
  if (it == gene_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - gene_ids.begin());
}

std::vector<std::pair<std::string, std::string>> load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  const char delim = pick_delimiter(path, '\0');
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto fields = trimmed_fields(line, delim);
    if (fields.size() != 2)
      throw ParseError(path.string() + ": label rows need exactly 2 fields", line_no);
    if (out.empty() && line_no == 1 && (fields[1] == "site" || fields[1] == "label")) continue;
    out.emplace_back(std::move(fields[0]), std::move(fields[1]));
  }
  return out;
}

ExpressionMatrix load_matrix(const std::filesystem::path& matrix_path,
                             const std::filesystem::path& labels_path, const LoadOptions& options) {
  auto m = parse_matrix(matrix_path, pick_delimiter(matrix_path, options.delimiter));

  std::unordered_map<std::string, std::string> site_of;
  for (auto& [sample, site] : load_labels(labels_path)) {
    if (!options.declared_sites.empty() &&
        std::find(options.declared_sites.begin(), options.declared_sites.end(), site) ==
            options.declared_sites.end()) {
      throw ValidationError("unknown site label '" + site + "' for sample '" + sample + "'");
    }
    auto [it, inserted] = site_of.emplace(sample, site);
    if (!inserted && it->second != site)
      throw ValidationError("sample '" + sample + "' has conflicting labels");
  }

  m.labels.reserve(m.sample_ids.size());
  for (const auto& s : m.sample_ids) {
    const auto it = site_of.find(s);
    if (it == site_of.end())
      throw ValidationError("sample '" + s + "' has no label in " + labels_path.string());
    m.labels.push_back(it->second);
  }
  m.validate();
  return m;
}

ExpressionMatrix load_matrix_unlabeled(const std::filesystem::path& matrix_path,
                                       const LoadOptions& options) {
  auto m = parse_matrix(matrix_path, pick_delimiter(matrix_path, options.delimiter));
  m.labels.assign(m.sample_ids.size(), "unlabeled");
  m.validate();
  return m;
}

ExpressionMatrix keep_sites(const ExpressionMatrix& m, const std::vector<std::string>& sites) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < m.samples(); ++c)
    if (std::find(sites.begin(), sites.end(), m.labels[c]) != sites.end()) cols.push_back(c);
  if (cols.empty()) throw ValidationError("no samples belong to the kept sites");

  ExpressionMatrix out;
  out.gene_ids = m.gene_ids;
  out.values = Matrix(m.genes(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.sample_ids.push_back(m.sample_ids[cols[j]]);
    out.labels.push_back(m.labels[cols[j]]);
    for (std::size_t r = 0; r < m.genes(); ++r) out.values(r, j) = m.values(r, cols[j]);
  }
  return out;
}

ExpressionMatrix select_genes(const ExpressionMatrix& m, const std::vector<std::string>& ids) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < m.genes(); ++r) index.emplace(m.gene_ids[r], r);

  ExpressionMatrix out;
  out.sample_ids = m.sample_ids;
  out.labels = m.labels;
  out.values = Matrix(ids.size(), m.samples());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = index.find(ids[i]);
    if (it == index.end()) throw ValidationError("gene '" + ids[i] + "' is not in the matrix");
    out.gene_ids.push_back(ids[i]);
    const auto src = m.values.row(it->second);
    std::copy(src.begin(), src.end(), out.values.row(i).begin());
  }
  return out;
}

void write_matrix(const ExpressionMatrix& m, const std::filesystem::path& path, char delimiter) {
  auto out = open_output(path);
  out << "gene_id";
  for (const auto& s : m.sample_ids) out << delimiter << s;
  out << '\n';
  for (std::size_t r = 0; r < m.genes(); ++r) {
    out << m.gene_ids[r];
    for (double v : m.values.row(r)) out << delimiter << format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_labels(const ExpressionMatrix& m, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "sample_id\tsite\n";
  for (std::size_t c = 0; c < m.samples(); ++c) out << m.sample_ids[c] << '\t' << m.labels[c] << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

double truncate3(double v) noexcept {
  const double scaled = v * 1000.0;
  const double nearest = std::round(scaled);
  // 1.234 is stored as 1.23399999...; snapping keeps truncation idempotent.
  const double snapped =
      std::abs(scaled - nearest) <= 1e-9 * std::max(1.0, std::abs(scaled)) ? nearest : std::trunc(scaled);
  return snapped / 1000.0;
}

Cleansed cleanse(const ExpressionMatrix& m, const std::vector<std::string>& site_order) {
  Cleansed result;
  auto& report = result.report;

  for (const auto& l : m.labels) {
    if (std::find(site_order.begin(), site_order.end(), l) == site_order.end())
      throw ValidationError("site order does not cover label '" + l + "'");
  }

  // (a) all-zero genes, (b) duplicate IDs, first occurrence kept.
  std::vector<std::size_t> kept_rows;
  std::unordered_map<std::string, std::size_t> first_row;
  for (std::size_t r = 0; r < m.genes(); ++r) {
    const auto row = m.values.row(r);
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
      ++report.removed_all_zero;
      continue;
    }
    auto [it, inserted] = first_row.emplace(m.gene_ids[r], r);
    if (!inserted) {
      ++report.removed_duplicates;
      const auto kept = m.values.row(it->second);
      if (!std::equal(row.begin(), row.end(), kept.begin()) &&
          std::find(report.duplicate_conflicts.begin(), report.duplicate_conflicts.end(),
                    m.gene_ids[r]) == report.duplicate_conflicts.end()) {
        report.duplicate_conflicts.push_back(m.gene_ids[r]);
      }
      continue;
    }
    kept_rows.push_back(r);
  }
  if (kept_rows.empty()) throw ValidationError("cleansing removed every gene");

  // (c) group columns by site order, stable within a site.
  auto& order = report.column_order;
  order.resize(m.samples());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto site_rank = [&](std::size_t c) {
    return std::find(site_order.begin(), site_order.end(), m.labels[c]) - site_order.begin();
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return site_rank(a) < site_rank(b); });

  // (d) truncate to three decimals. Rows that truncate to all zeros are
  // counted with (a) so that a second pass removes nothing.
  std::vector<std::vector<double>> truncated;
  std::vector<std::size_t> final_rows;
  for (std::size_t r : kept_rows) {
    std::vector<double> row(order.size());
    for (std::size_t j = 0; j < order.size(); ++j) row[j] = truncate3(m.values(r, order[j]));
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
      ++report.removed_all_zero;
      continue;
    }
    truncated.push_back(std::move(row));
    final_rows.push_back(r);
  }
  if (final_rows.empty()) throw ValidationError("cleansing removed every gene");

  auto& out = result.matrix;
  out.values = Matrix(final_rows.size(), m.samples());
  for (std::size_t i = 0; i < final_rows.size(); ++i) {
    out.gene_ids.push_back(m.gene_ids[final_rows[i]]);
    std::copy(truncated[i].begin(), truncated[i].end(), out.values.row(i).begin());
  }
  for (std::size_t j : order) {
    out.sample_ids.push_back(m.sample_ids[j]);
    out.labels.push_back(m.labels[j]);
  }
  report.truncation_applied = true;
  return result;
}

std::vector<GeneStats> gene_stats(const ExpressionMatrix& m) {
  std::vector<GeneStats> out;
  out.reserve(m.genes());
  std::vector<double> sorted;
  for (std::size_t r = 0; r < m.genes(); ++r) {
    const auto row = m.values.row(r);
    sorted.assign(row.begin(), row.end());
    std::sort(sorted.begin(), sorted.end());
    GeneStats s;
    s.gene_id = m.gene_ids[r];
    if (sorted.empty()) {
      out.push_back(s);
      continue;
    }
    s.min = sorted.front();
    s.max = sorted.back();
    const std::size_t n = sorted.size();
    s.median = n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    // Summing in sorted order keeps the mean independent of column order.
    const double sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    s.mean = std::clamp(sum / static_cast<double>(n), s.min, s.max);
    s.sensitivity = s.max - s.min;
    out.push_back(std::move(s));
  }
  return out;
}

void export_stats(std::vector<GeneStats> stats, StatsOrder order, const std::filesystem::path& path) {
  auto key = [order](const GeneStats& s) { return order == StatsOrder::by_mean ? s.mean : s.sensitivity; };
  std::sort(stats.begin(), stats.end(), [&](const GeneStats& a, const GeneStats& b) {
    if (key(a) != key(b)) return key(a) > key(b);
    return a.gene_id < b.gene_id;
  });
  auto out = open_output(path);
  out << "gene_id,max,min,mean,median,sensitivity\n";
  for (const auto& s : stats) {
    out << s.gene_id << ',' << format_double(s.max) << ',' << format_double(s.min) << ','
        << format_double(s.mean) << ',' << format_double(s.median) << ',' << format_double(s.sensitivity)
        << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace coexpress
