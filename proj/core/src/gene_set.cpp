// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "coexpress/gene_set.hpp"

#include <algorithm>
#include <unordered_set>

#include "coexpress/error.hpp"
#include "coexpress/text.hpp"

namespace coexpress {

bool GeneSet::contains(const std::string& id) const {
  return std::find(gene_ids.begin(), gene_ids.end(), id) != gene_ids.end();
}

GeneSet set_difference(const GeneSet& a, const GeneSet& b) {
  const std::unordered_set<std::string> drop(b.gene_ids.begin(), b.gene_ids.end());
  GeneSet out;
  out.name = a.name + "_minus_" + b.name;
  out.provenance = "set_difference(" + a.name + ", " + b.name + ")";
  for (const auto& g : a.gene_ids)
    if (!drop.contains(g)) out.gene_ids.push_back(g);
  return out;
}

void write_gene_set(const GeneSet& set, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "# name: " << set.name << '\n';
  out << "# provenance: " << set.provenance << '\n';
  for (const auto& g : set.gene_ids) out << g << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

GeneSet read_gene_set(const std::filesystem::path& path) {
  auto in = open_input(path);
  GeneSet set;
  set.name = path.stem().string();
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      auto body = trim(t.substr(1));
      if (body.starts_with("name:")) set.name = std::string(trim(body.substr(5)));
      else if (body.starts_with("provenance:")) set.provenance = std::string(trim(body.substr(11)));
      continue;
    }
    std::string id(t);
    if (!seen.insert(id).second) throw ParseError(path.string() + ": duplicate gene '" + id + "'", line_no);
    set.gene_ids.push_back(std::move(id));
  }
  return set;
}

}  // namespace coexpress
