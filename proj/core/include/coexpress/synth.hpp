// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "coexpress/expression.hpp"
#include "coexpress/gene_set.hpp"

namespace coexpress {

/// Genes sharing one latent per-sample factor.
struct CoexpressionBlock {
  std::size_t genes = 0;
  double loading = 1.0;  ///< in [0, 1]
};

/// Planted-signal generator settings. Effect sizes are in noise-sigma units.
struct SynthSpec {
  std::vector<std::pair<std::string, std::size_t>> samples_per_site{{"LN", 20}, {"Bone", 20}, {"Liver", 20}};
  std::size_t background_genes = 50;
  std::size_t planted_per_class = 10;
  double effect = 3.0;
  double noise_sigma = 1.0;
  double baseline = 10.0;  ///< keeps values positive
  std::vector<CoexpressionBlock> blocks;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SynthData {
  ExpressionMatrix matrix;
  std::map<std::string, GeneSet> planted;  ///< per site
  GeneSet background;
  std::vector<GeneSet> blocks;
};

/// Background genes are iid noise; a gene planted for site c adds
/// effect * sigma on c's samples; block genes add loading * f_b where the
/// block factors are centred, unit-variance and mutually orthogonal. Sample
/// columns are shuffled by the seed.
SynthData generate(const SynthSpec& spec);

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthSpec& spec);

/// matrix.tsv, labels.tsv and truth/*.genes.
void write_synth(const SynthData& data, const std::filesystem::path& dir);

}  // namespace coexpress
