// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "coexpress/mask_selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coexpress/correlation.hpp"
#include "coexpress/error.hpp"
#include "coexpress/parallel.hpp"
#include "coexpress/text.hpp"

namespace coexpress {
namespace {

void check_threshold(double t) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("selection threshold must lie in (0, 1)");
}

std::string threshold_text(double t) { return format_double(t); }

template <typename Keep>
GeneSet select_where(const MaskCorrelations& mc, std::string name, std::string provenance, Keep keep) {
  GeneSet out;
  out.name = std::move(name);
  out.provenance = std::move(provenance);
  for (std::size_t g = 0; g < mc.gene_ids.size(); ++g)
    if (keep(mc.values[g])) out.gene_ids.push_back(mc.gene_ids[g]);
  return out;
}

}  // namespace

std::vector<SiteMask> build_masks(std::span<const std::string> labels) {
  std::vector<std::string> sites;
  for (const auto& l : labels)
    if (std::find(sites.begin(), sites.end(), l) == sites.end()) sites.push_back(l);
  return build_masks(labels, sites);
}

std::vector<SiteMask> build_masks(std::span<const std::string> labels, const std::vector<std::string>& sites) {
  std::vector<std::string> present;
  for (const auto& l : labels)
    if (std::find(present.begin(), present.end(), l) == present.end()) present.push_back(l);
  if (present.size() < 2) throw ValidationError("site masks need at least two distinct site classes");

  std::vector<SiteMask> masks;
  for (const auto& site : sites) {
    SiteMask mask{site, std::vector<double>(labels.size(), 0.0)};
    bool any = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == site) {
        mask.indicator[i] = 1.0;
        any = true;
      }
    }
    if (!any) throw ValidationError("site '" + site + "' does not occur in the labels");
    masks.push_back(std::move(mask));
  }
  return masks;
}

std::size_t MaskCorrelations::site_index(const std::string& site) const {
  const auto it = std::find(sites.begin(), sites.end(), site);
  if (it == sites.end()) throw std::out_of_range("no mask for site '" + site + "'");
  return static_cast<std::size_t>(it - sites.begin());
}

MaskCorrelations mask_correlations(const ExpressionMatrix& m, const std::vector<SiteMask>& masks) {
  for (const auto& mask : masks)
    if (mask.indicator.size() != m.samples()) throw std::invalid_argument("mask length differs from sample count");

  std::vector<std::vector<double>> rows(m.genes());
  std::vector<char> ok(m.genes(), 0);
  parallel_for(m.genes(), [&](std::size_t g) {
    std::vector<double> c(masks.size());
    try {
      for (std::size_t s = 0; s < masks.size(); ++s) c[s] = pearson(m.values.row(g), masks[s].indicator);
    } catch (const ZeroVariance&) {
      return;
    }
    rows[g] = std::move(c);
    ok[g] = 1;
  });

  MaskCorrelations out;
  for (const auto& mask : masks) out.sites.push_back(mask.site);
  for (std::size_t g = 0; g < m.genes(); ++g) {
    if (ok[g]) {
      out.gene_ids.push_back(m.gene_ids[g]);
      out.values.push_back(std::move(rows[g]));
    } else {
      out.excluded.push_back(m.gene_ids[g]);
    }
  }
  return out;
}

GeneSet select_by_any_mask(const MaskCorrelations& mc, double t) {
  check_threshold(t);
  return select_where(mc, "any_mask", "rule=any;threshold=" + threshold_text(t), [t](const auto& c) {
    return std::any_of(c.begin(), c.end(), [t](double v) { return std::abs(v) >= t; });
  });
}

GeneSet select_three_mask_intersect(const MaskCorrelations& mc, double t) {
  check_threshold(t);
  return select_where(mc, "mask_intersect", "rule=intersect;threshold=" + threshold_text(t), [t](const auto& c) {
    return std::all_of(c.begin(), c.end(), [t](double v) { return std::abs(v) >= t; });
  });
}

GeneSet select_combined(const MaskCorrelations& mc, double t_intersect, double t_pair, const SitePair& pair) {
  check_threshold(t_intersect);
  check_threshold(t_pair);
  const std::size_t a = mc.site_index(pair.first);
  const std::size_t b = mc.site_index(pair.second);
  std::string prov = "rule=combined;t_intersect=" + threshold_text(t_intersect) + ";t_pair=" +
                     threshold_text(t_pair) + ";pair=" + pair.first + "," + pair.second;
  return select_where(mc, "combined", std::move(prov), [&](const auto& c) {
    const bool all = std::all_of(c.begin(), c.end(), [&](double v) { return std::abs(v) >= t_intersect; });
    return all && std::abs(c[a]) >= t_pair && std::abs(c[b]) >= t_pair && c[a] * c[b] < 0.0;
  });
}

std::vector<SweepRow> sweep_report(const MaskCorrelations& mc, const std::vector<double>& thresholds,
                                   const SitePair& pair) {
  const bool has_pair = std::find(mc.sites.begin(), mc.sites.end(), pair.first) != mc.sites.end() &&
                        std::find(mc.sites.begin(), mc.sites.end(), pair.second) != mc.sites.end();
  std::vector<SweepRow> rows;
  for (double t : thresholds) {
    rows.push_back({t, "any", select_by_any_mask(mc, t).size()});
    rows.push_back({t, "intersect", select_three_mask_intersect(mc, t).size()});
    if (has_pair) rows.push_back({t, "combined", select_combined(mc, t, pair).size()});
    for (std::size_t s = 0; s < mc.sites.size(); ++s) {
      std::size_t kept = 0;
      for (const auto& c : mc.values) kept += std::abs(c[s]) >= t;
      rows.push_back({t, "mask:" + mc.sites[s], kept});
    }
  }
  return rows;
}

void write_sweep_report(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "threshold,rule,kept\n";
  for (const auto& r : rows) out << format_double(r.threshold) << ',' << r.rule << ',' << r.kept << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<double> threshold_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("threshold grid needs step > 0 and hi >= lo");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9;
  return out;
}

}  // namespace coexpress
