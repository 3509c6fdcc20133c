// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "coexpress/error.hpp"
#include "coexpress/expression.hpp"
#include "coexpress/rng.hpp"
#include "test_support.hpp"

using namespace coexpress;
using coexpress::test::TempDir;
using coexpress::test::make_matrix;

namespace {

ExpressionMatrix random_matrix(Rng& rng, std::size_t genes, std::size_t samples) {
  std::vector<std::vector<double>> rows(genes, std::vector<double>(samples));
  std::vector<std::string> ids, sids, labels;
  const char* sites[] = {"LN", "Bone", "Liver"};
  for (std::size_t g = 0; g < genes; ++g) {
    ids.push_back("g" + std::to_string(g));
    for (auto& v : rows[g]) v = rng.below(4) == 0 ? 0.0 : rng.uniform() * 100.0;
  }
  if (genes > 2) rows[1].assign(samples, 0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    sids.push_back("s" + std::to_string(s));
    labels.push_back(sites[rng.below(3)]);
  }
  return make_matrix(ids, sids, labels, rows);
}

}  // namespace

TEST(LoadMatrix, WellFormedTsv) {
  TempDir dir("load");
  const auto m = dir.write("m.tsv", "gene\tS1\tS2\nA\t1\t2\nB\t3.5\t4\nC\t0\t1e-3\n");
  const auto l = dir.write("l.tsv", "S1\tLN\nS2\tBone\n");
  const auto x = load_matrix(m, l);
  EXPECT_EQ(x.genes(), 3u);
  EXPECT_EQ(x.samples(), 2u);
  EXPECT_DOUBLE_EQ(x.values(1, 0), 3.5);
  EXPECT_DOUBLE_EQ(x.values(2, 1), 0.001);
  EXPECT_EQ(x.labels, (std::vector<std::string>{"LN", "Bone"}));
}

TEST(LoadMatrix, CsvByExtension) {
  TempDir dir("load_csv");
  const auto m = dir.write("m.csv", "gene,S1,S2\nA,1,2\n");
  const auto l = dir.write("l.tsv", "sample_id\tsite\nS1\tLN\nS2\tBone\n");
  EXPECT_EQ(load_matrix(m, l).samples(), 2u);
}

TEST(LoadMatrix, RaggedRowNamesRowAndLine) {
  TempDir dir("ragged");
  const auto m = dir.write("m.tsv", "gene\tS1\tS2\nA\t1\t2\nB\t3\n");
  const auto l = dir.write("l.tsv", "S1\tLN\nS2\tBone\n");
  try {
    load_matrix(m, l);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("B"), std::string::npos);
  }
}

TEST(LoadMatrix, NonNumericCell) {
  TempDir dir("nonnum");
  const auto m = dir.write("m.tsv", "gene\tS1\tS2\nA\t1\tx\n");
  const auto l = dir.write("l.tsv", "S1\tLN\nS2\tBone\n");
  EXPECT_THROW(load_matrix(m, l), ParseError);
}

TEST(LoadMatrix, NonFiniteRejected) {
  TempDir dir("nan");
  const auto m = dir.write("m.tsv", "gene\tS1\tS2\nA\t1\tnan\n");
  const auto l = dir.write("l.tsv", "S1\tLN\nS2\tBone\n");
  EXPECT_THROW(load_matrix(m, l), ParseError);
}

TEST(LoadMatrix, DuplicateSampleId) {
  TempDir dir("dupsample");
  const auto m = dir.write("m.tsv", "gene\tS1\tS1\nA\t1\t2\n");
  const auto l = dir.write("l.tsv", "S1\tLN\n");
  EXPECT_THROW(load_matrix(m, l), Error);
}

TEST(LoadMatrix, UnknownSiteLabel) {
  TempDir dir("unknown");
  const auto m = dir.write("m.tsv", "gene\tS1\tS2\nA\t1\t2\n");
  const auto l = dir.write("l.tsv", "S1\tLN\nS2\tLung\n");
  LoadOptions opts;
  opts.declared_sites = {"LN", "Bone", "Liver"};
  EXPECT_THROW(load_matrix(m, l, opts), ValidationError);
}

TEST(LoadMatrix, MissingLabel) {
  TempDir dir("missing");
  const auto m = dir.write("m.tsv", "gene\tS1\tS2\nA\t1\t2\n");
  const auto l = dir.write("l.tsv", "S1\tLN\n");
  EXPECT_THROW(load_matrix(m, l), ValidationError);
}

TEST(LoadMatrix, MissingFileNamesPath) {
  TempDir dir("nofile");
  const auto m = dir.write("m.tsv", "gene\tS1\nA\t1\n");
  try {
    load_matrix(m, dir / "absent_labels.tsv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("absent_labels.tsv"), std::string::npos);
  }
}

TEST(LoadMatrix, WriteReadRoundTrip) {
  TempDir dir("roundtrip");
  const auto x = make_matrix({"A", "B"}, {"s1", "s2", "s3"}, {"LN", "Bone", "LN"},
                             {{0.1, 2.25, 1e-7}, {3, 4, 123456.789}});
  write_matrix(x, dir / "m.tsv");
  write_labels(x, dir / "l.tsv");
  EXPECT_EQ(load_matrix(dir / "m.tsv", dir / "l.tsv"), x);
}

TEST(Cleanse, ZeroDuplicateAndRoundingTogether) {
  const auto x = make_matrix({"A", "B", "B"}, {"s1", "s2"}, {"LN", "LN"}, {{0, 0}, {1.23456, 2}, {9, 9}});
  const auto c = cleanse(x, {"LN"});
  ASSERT_EQ(c.matrix.gene_ids, std::vector<std::string>{"B"});
  EXPECT_DOUBLE_EQ(c.matrix.values(0, 0), 1.234);
  EXPECT_DOUBLE_EQ(c.matrix.values(0, 1), 2.0);
  EXPECT_EQ(c.report.removed_all_zero, 1u);
  EXPECT_EQ(c.report.removed_duplicates, 1u);
  EXPECT_EQ(c.report.duplicate_conflicts, std::vector<std::string>{"B"});
}

TEST(Cleanse, CleanMatrixIsIdentity) {
  const auto x = make_matrix({"A", "B"}, {"s1", "s2"}, {"LN", "Bone"}, {{1.5, 2}, {0.125, 7}});
  const auto c = cleanse(x, {"LN", "Bone"});
  EXPECT_EQ(c.matrix, x);
  EXPECT_EQ(c.report.removed_all_zero, 0u);
  EXPECT_EQ(c.report.removed_duplicates, 0u);
}

TEST(Cleanse, StableSiteGrouping) {
  const auto x = make_matrix({"A"}, {"s1", "s2", "s3"}, {"Bone", "LN", "LN"}, {{1, 2, 3}});
  const auto c = cleanse(x, {"LN", "Bone"});
  EXPECT_EQ(c.matrix.sample_ids, (std::vector<std::string>{"s2", "s3", "s1"}));
  EXPECT_EQ(c.matrix.labels, (std::vector<std::string>{"LN", "LN", "Bone"}));
  EXPECT_EQ(c.report.column_order, (std::vector<std::size_t>{1, 2, 0}));
}

TEST(Cleanse, SiteOrderMustCoverLabels) {
  const auto x = make_matrix({"A"}, {"s1", "s2"}, {"Bone", "LN"}, {{1, 2}});
  EXPECT_THROW(cleanse(x, {"LN"}), ValidationError);
}

TEST(Cleanse, EmptyResultIsError) {
  const auto x = make_matrix({"A"}, {"s1", "s2"}, {"LN", "LN"}, {{0, 0}});
  EXPECT_THROW(cleanse(x, {"LN"}), ValidationError);
}

TEST(Cleanse, TruncatesTowardZero) {
  EXPECT_DOUBLE_EQ(truncate3(1.2349), 1.234);
  EXPECT_DOUBLE_EQ(truncate3(-1.2349), -1.234);
  EXPECT_DOUBLE_EQ(truncate3(0.0009), 0.0);
  EXPECT_DOUBLE_EQ(truncate3(2.0), 2.0);
}

TEST(CleanseProperty, IdempotentBoundedAndPermutation) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_matrix(rng, 12, 9);
    const auto once = cleanse(x, {"LN", "Bone", "Liver"});
    const auto twice = cleanse(once.matrix, {"LN", "Bone", "Liver"});
    EXPECT_EQ(twice.matrix, once.matrix);

    auto perm = once.report.column_order;
    std::sort(perm.begin(), perm.end());
    for (std::size_t i = 0; i < perm.size(); ++i) ASSERT_EQ(perm[i], i);

    for (std::size_t r = 0; r < once.matrix.genes(); ++r) {
      const auto src = *x.gene_index(once.matrix.gene_ids[r]);
      for (std::size_t c = 0; c < once.matrix.samples(); ++c) {
        const double orig = x.values(src, once.report.column_order[c]);
        EXPECT_LT(std::abs(orig - once.matrix.values(r, c)), 1e-3);
      }
    }
  }
}

TEST(GeneStats, DirectDefinitions) {
  const auto x = make_matrix({"A", "B", "C"}, {"s1", "s2", "s3", "s4"}, {"LN", "LN", "LN", "LN"},
                             {{0.5, 2.0, 1.0, 1.0}, {3, 3, 3, 3}, {1, 2, 3, 4}});
  const auto s = gene_stats(x);
  EXPECT_DOUBLE_EQ(s[0].max, 2.0);
  EXPECT_DOUBLE_EQ(s[0].min, 0.5);
  EXPECT_DOUBLE_EQ(s[0].sensitivity, 1.5);
  EXPECT_DOUBLE_EQ(s[0].median, 1.0);
  EXPECT_DOUBLE_EQ(s[1].sensitivity, 0.0);
  EXPECT_DOUBLE_EQ(s[2].median, 2.5);
  EXPECT_DOUBLE_EQ(s[2].mean, 2.5);
}

TEST(GeneStats, OddLengthMedian) {
  const auto x = make_matrix({"A"}, {"s1", "s2", "s3"}, {"LN", "LN", "LN"}, {{0.5, 2.0, 1.0}});
  EXPECT_DOUBLE_EQ(gene_stats(x)[0].median, 1.0);
}

TEST(GeneStatsProperty, OrderingAndColumnInvariance) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_matrix(rng, 6, 7);
    const auto before = gene_stats(x);
    for (const auto& s : before) {
      EXPECT_LE(s.min, s.median);
      EXPECT_LE(s.median, s.max);
      EXPECT_LE(s.min, s.mean);
      EXPECT_LE(s.mean, s.max);
      EXPECT_GE(s.sensitivity, 0.0);
    }
    std::vector<std::size_t> perm(x.samples());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(std::span<std::size_t>(perm));
    auto y = x;
    for (std::size_t r = 0; r < x.genes(); ++r)
      for (std::size_t c = 0; c < x.samples(); ++c) y.values(r, c) = x.values(r, perm[c]);
    const auto after = gene_stats(y);
    for (std::size_t g = 0; g < before.size(); ++g) {
      EXPECT_EQ(after[g].max, before[g].max);
      EXPECT_EQ(after[g].min, before[g].min);
      EXPECT_EQ(after[g].median, before[g].median);
      EXPECT_EQ(after[g].mean, before[g].mean);
    }
  }
}

TEST(ExportStats, SortedDescendingWithIdTies) {
  TempDir dir("stats");
  std::vector<GeneStats> s{{"b", 4, 0, 2, 2, 4}, {"a", 4, 0, 2, 2, 4}, {"c", 9, 1, 5, 5, 8}};
  export_stats(s, StatsOrder::by_mean, dir / "mean.csv");
  const auto text = coexpress::test::read_file(dir / "mean.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "gene_id,max,min,mean,median,sensitivity");
  EXPECT_LT(text.find("\nc,"), text.find("\na,"));
  EXPECT_LT(text.find("\na,"), text.find("\nb,"));
}

TEST(KeepSites, FiltersColumns) {
  const auto x = make_matrix({"A"}, {"s1", "s2", "s3"}, {"LN", "Lung", "Bone"}, {{1, 2, 3}});
  const auto k = keep_sites(x, {"LN", "Bone"});
  EXPECT_EQ(k.sample_ids, (std::vector<std::string>{"s1", "s3"}));
}
