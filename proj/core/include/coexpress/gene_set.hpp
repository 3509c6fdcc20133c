// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace coexpress {

/// Ordered, named list of gene IDs with the rule that produced it.
struct GeneSet {
  std::string name;
  std::vector<std::string> gene_ids;
  std::string provenance;

  std::size_t size() const noexcept { return gene_ids.size(); }
  bool contains(const std::string& id) const;

  bool operator==(const GeneSet&) const = default;
};

/// Members of `a` not in `b`, in the order of `a`.
GeneSet set_difference(const GeneSet& a, const GeneSet& b);

/// One ID per line, preceded by "# name: ..." and "# provenance: ..." lines.
void write_gene_set(const GeneSet& set, const std::filesystem::path& path);

/// Reads the format above. Blank lines are ignored; duplicate IDs throw ParseError.
GeneSet read_gene_set(const std::filesystem::path& path);

}  // namespace coexpress
