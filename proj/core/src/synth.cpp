// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "coexpress/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "coexpress/rng.hpp"

namespace coexpress {
namespace {

std::string padded(const char* prefix, std::size_t i, int width) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

/// Centred, unit-variance, mutually orthogonal factors (Gram-Schmidt).
std::vector<std::vector<double>> block_factors(std::size_t count, std::size_t n, Rng& rng) {
  std::vector<std::vector<double>> factors;
  for (std::size_t b = 0; b < count; ++b) {
    std::vector<double> f(n);
    for (double& v : f) v = rng.normal();
    const double mu = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(n);
    for (double& v : f) v -= mu;
    for (const auto& prev : factors) {
      double proj = 0.0, norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        proj += f[i] * prev[i];
        norm += prev[i] * prev[i];
      }
      for (std::size_t i = 0; i < n; ++i) f[i] -= proj / norm * prev[i];
    }
    double ss = 0.0;
    for (double v : f) ss += v * v;
    const double scale = ss > 0.0 ? std::sqrt(static_cast<double>(n - 1) / ss) : 0.0;
    for (double& v : f) v *= scale;
    factors.push_back(std::move(f));
  }
  return factors;
}

}  // namespace

void SynthSpec::validate() const {
  std::size_t total = 0;
  for (const auto& [site, n] : samples_per_site) {
    if (n < 2) throw std::invalid_argument("site '" + site + "' needs at least two samples");
    total += n;
  }
  if (total == 0) throw std::invalid_argument("no samples requested");
  if (samples_per_site.size() < 2) throw std::invalid_argument("need at least two site classes");
  if (!(effect >= 0.0)) throw std::invalid_argument("effect size must be non-negative");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
  for (const auto& b : blocks)
    if (!(b.loading >= 0.0 && b.loading <= 1.0)) throw std::invalid_argument("block loading must lie in [0, 1]");
  if (background_genes + planted_per_class * samples_per_site.size() == 0 && blocks.empty())
    throw std::invalid_argument("no genes requested");
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  std::vector<std::string> labels;
  for (const auto& [site, n] : spec.samples_per_site) labels.insert(labels.end(), n, site);
  rng.shuffle(std::span<std::string>(labels));
  const std::size_t n = labels.size();

  SynthData data;
  auto& m = data.matrix;
  m.labels = labels;
  for (std::size_t s = 0; s < n; ++s) m.sample_ids.push_back(padded("S", s, 4));

  std::vector<std::vector<double>> rows;
  auto noise_row = [&] {
    std::vector<double> r(n);
    for (double& v : r) v = spec.baseline + spec.noise_sigma * rng.normal();
    return r;
  };

  data.background.name = "background";
  data.background.provenance = "synth background";
  for (std::size_t g = 0; g < spec.background_genes; ++g) {
    m.gene_ids.push_back(padded("BG", g, 4));
    data.background.gene_ids.push_back(m.gene_ids.back());
    rows.push_back(noise_row());
  }

  for (const auto& [site, _] : spec.samples_per_site) {
    GeneSet set{"planted_" + site, {}, "synth planted effect=" + std::to_string(spec.effect)};
    for (std::size_t g = 0; g < spec.planted_per_class; ++g) {
      m.gene_ids.push_back(padded(("P_" + site + "_").c_str(), g, 2));
      set.gene_ids.push_back(m.gene_ids.back());
      auto r = noise_row();
      for (std::size_t s = 0; s < n; ++s)
        if (labels[s] == site) r[s] += spec.effect * spec.noise_sigma;
      rows.push_back(std::move(r));
    }
    data.planted.emplace(site, std::move(set));
  }

  const auto factors = block_factors(spec.blocks.size(), n, rng);
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    GeneSet set{"block_" + std::to_string(b), {}, "synth block loading=" + std::to_string(spec.blocks[b].loading)};
    for (std::size_t g = 0; g < spec.blocks[b].genes; ++g) {
      m.gene_ids.push_back(padded(("B" + std::to_string(b) + "_").c_str(), g, 2));
      set.gene_ids.push_back(m.gene_ids.back());
      auto r = noise_row();
      for (std::size_t s = 0; s < n; ++s) r[s] += spec.blocks[b].loading * factors[b][s];
      rows.push_back(std::move(r));
    }
    data.blocks.push_back(std::move(set));
  }

  m.values = Matrix(rows.size(), n);
  for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), m.values.row(r).begin());
  return data;
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec spec;
  if (j.contains("samples_per_site")) {
    spec.samples_per_site.clear();
    for (const auto& item : j.at("samples_per_site")) {
      spec.samples_per_site.emplace_back(item.at("site").get<std::string>(), item.at("count").get<std::size_t>());
    }
  }
  spec.background_genes = j.value("background_genes", spec.background_genes);
  spec.planted_per_class = j.value("planted_per_class", spec.planted_per_class);
  spec.effect = j.value("effect", spec.effect);
  spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
  spec.baseline = j.value("baseline", spec.baseline);
  spec.seed = j.value("seed", spec.seed);
  if (j.contains("blocks")) {
    for (const auto& b : j.at("blocks"))
      spec.blocks.push_back({b.at("genes").get<std::size_t>(), b.at("loading").get<double>()});
  }
  spec.validate();
  return spec;
}

nlohmann::json to_json(const SynthSpec& spec) {
  nlohmann::json j;
  auto& sites = j["samples_per_site"] = nlohmann::json::array();
  for (const auto& [site, n] : spec.samples_per_site) sites.push_back({{"site", site}, {"count", n}});
  j["background_genes"] = spec.background_genes;
  j["planted_per_class"] = spec.planted_per_class;
  j["effect"] = spec.effect;
  j["noise_sigma"] = spec.noise_sigma;
  j["baseline"] = spec.baseline;
  j["seed"] = spec.seed;
  auto& blocks = j["blocks"] = nlohmann::json::array();
  for (const auto& b : spec.blocks) blocks.push_back({{"genes", b.genes}, {"loading", b.loading}});
  return j;
}

void write_synth(const SynthData& data, const std::filesystem::path& dir) {
  write_matrix(data.matrix, dir / "matrix.tsv");
  write_labels(data.matrix, dir / "labels.tsv");
  for (const auto& [site, set] : data.planted) write_gene_set(set, dir / "truth" / (set.name + ".genes"));
  write_gene_set(data.background, dir / "truth" / "background.genes");
  for (const auto& b : data.blocks) write_gene_set(b, dir / "truth" / (b.name + ".genes"));
}

}  // namespace coexpress
