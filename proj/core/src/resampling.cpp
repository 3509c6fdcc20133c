// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "coexpress/resampling.hpp"

#include <algorithm>
#include <stdexcept>

#include "coexpress/error.hpp"
#include "coexpress/rng.hpp"
#include "coexpress/text.hpp"

namespace coexpress {

FoldPlan stratified_folds(const std::vector<std::string>& labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("fold count must be at least 2");
  if (k > labels.size()) throw std::invalid_argument("more folds than samples");

  FoldPlan plan;
  plan.k = k;
  plan.labels = labels;
  plan.seed = seed;
  plan.assignment.assign(labels.size(), 0);

  std::vector<std::string> classes;
  for (const auto& l : labels)
    if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);

  Rng rng(seed);
  std::size_t cursor = 0;
  for (const auto& cls : classes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    if (members.size() < k)
      plan.warnings.push_back("class '" + cls + "' has " + std::to_string(members.size()) + " members for " +
                              std::to_string(k) + " folds");
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t i : members) {
      plan.assignment[i] = cursor;
      cursor = (cursor + 1) % k;
    }
  }

  plan.expanded.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) plan.expanded.push_back({i, plan.assignment[i], 0});
  return plan;
}

FoldPlan oversample(const FoldPlan& plan, const std::map<std::string, int>& extra_copies) {
  for (const auto& [site, n] : extra_copies)
    if (n < 0) throw std::invalid_argument("negative copy count for site '" + site + "'");

  FoldPlan out = plan;
  out.replication = extra_copies;
  out.expanded.clear();
  for (std::size_t i = 0; i < plan.labels.size(); ++i) {
    const auto it = extra_copies.find(plan.labels[i]);
    const std::size_t copies = it == extra_copies.end() ? 0 : static_cast<std::size_t>(it->second);
    for (std::size_t r = 0; r <= copies; ++r) out.expanded.push_back({i, plan.assignment[i], r});
  }
  return out;
}

CvSplit cv_split(const FoldPlan& plan, std::size_t validation_fold) {
  if (validation_fold >= plan.k) throw std::out_of_range("validation fold out of range");
  CvSplit split;
  for (std::size_t p = 0; p < plan.expanded.size(); ++p)
    (plan.expanded[p].fold == validation_fold ? split.validation : split.train).push_back(p);
  return split;
}

std::vector<std::size_t> samples_at(const FoldPlan& plan, const std::vector<std::size_t>& positions) {
  std::vector<std::size_t> out;
  out.reserve(positions.size());
  for (std::size_t p : positions) out.push_back(plan.expanded.at(p).sample);
  return out;
}

std::map<std::string, int> parse_copy_factors(const std::string& text) {
  std::map<std::string, int> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) {
    const auto parts = split(trim(item), ':');
    const auto value = parts.size() == 2 ? parse_double(parts[1]) : std::nullopt;
    if (!value || *value < 0 || *value != static_cast<int>(*value) || trim(parts[0]).empty())
      throw ParseError("copy factor '" + item + "' is not SITE:COUNT");
    out[std::string(trim(parts[0]))] = static_cast<int>(*value);
  }
  return out;
}

nlohmann::json to_json(const FoldPlan& plan) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["k"] = plan.k;
  j["seed"] = plan.seed;
  j["labels"] = plan.labels;
  j["assignment"] = plan.assignment;
  j["replication"] = plan.replication;
  auto& expanded = j["expanded"] = nlohmann::json::array();
  for (const auto& e : plan.expanded) expanded.push_back({e.sample, e.fold, e.replica});
  j["warnings"] = plan.warnings;
  return j;
}

FoldPlan fold_plan_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != 1) throw ParseError("unsupported fold plan schema");
  FoldPlan plan;
  plan.k = j.at("k").get<std::size_t>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.labels = j.at("labels").get<std::vector<std::string>>();
  plan.assignment = j.at("assignment").get<std::vector<std::size_t>>();
  plan.replication = j.at("replication").get<std::map<std::string, int>>();
  for (const auto& e : j.at("expanded"))
    plan.expanded.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<std::size_t>()});
  plan.warnings = j.value("warnings", std::vector<std::string>{});
  return plan;
}

}  // namespace coexpress
