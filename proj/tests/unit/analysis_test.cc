// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "nerprune/analysis.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "nerprune/errors.h"
#include "nerprune/rng.h"
#include "support/oracles.h"
#include "support/reference_tables.h"

namespace nerprune {
namespace {

namespace fs = std::filesystem;

const std::string kData = NERPRUNE_DATA_DIR;

LanguageTable reference_meta() {
  return load_language_metadata_file(kData + "/language_metadata.csv");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(SummarizeTest, Statistics) {
  std::vector<double> v = {3, 1, 2, 10};
  EXPECT_DOUBLE_EQ(summarize(v, Statistic::kMean), 4.0);
  EXPECT_DOUBLE_EQ(summarize(v, Statistic::kMedian), 2.5);
  EXPECT_DOUBLE_EQ(summarize(v, Statistic::kStd), std::sqrt(12.5));
  std::vector<double> odd = {5, 1, 3};
  EXPECT_DOUBLE_EQ(summarize(odd, Statistic::kMedian), 3.0);
  EXPECT_THROW(summarize(std::vector<double>{}, Statistic::kMean), Error);
}

TEST(DeltaTest, RelativeDelta) {
  EXPECT_EQ(relative_delta(0.7, 0.7), 0.0);
  EXPECT_NEAR(*relative_delta(0.81, 0.90), -0.1, 1e-12);
  EXPECT_NEAR(*relative_delta(0.9164, 0.9014), 0.01664, 5e-6);
  EXPECT_FALSE(relative_delta(0.5, 0.0).has_value());
}

TEST(DeltaTest, ScaleInvariance) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    double f = rng.uniform_real(0, 1), g = rng.uniform_real(0.01, 1);
    double a = rng.uniform_real(0.1, 10);
    EXPECT_NEAR(*relative_delta(a * f, a * g), *relative_delta(f, g), 1e-12);
  }
}

TEST(RatioTest, RobustnessRatio) {
  EXPECT_EQ(robustness_ratio(0.6, 0.6), 1.0);
  EXPECT_NEAR(*robustness_ratio(0.0143, 0.8470), 0.0169, 5e-5);
  EXPECT_NEAR(*robustness_ratio(0.6843, 0.8481), 0.8069, 5e-5);
  EXPECT_FALSE(robustness_ratio(0.3, 0.0).has_value());
}

TEST(RatioTest, ReferenceTablesGiveTheQuotedRatios) {
  auto regular = testing::load_reference_table(kData, "multilingual_regular_partial");
  auto perturbed = testing::load_reference_table(kData, "multilingual_perturbed_partial");
  EXPECT_NEAR(*robustness_ratio(perturbed.rows["en"][0], regular.rows["en"][0]),
              0.0169, 5e-5);
  EXPECT_NEAR(*robustness_ratio(perturbed.rows["en"][1], regular.rows["en"][1]),
              0.8069, 5e-5);
}

TEST(GainTest, PublishedExamples) {
  auto multi = testing::load_reference_table(kData, "multilingual_regular_partial");
  auto mono = testing::load_reference_table(kData, "monolingual_regular_partial");
  std::map<std::string, double> m, s;
  for (const auto& [lang, row] : mono.rows) {
    m[lang] = multi.rows.at(lang)[0];
    s[lang] = row[0];
  }
  auto gain = multilingual_gain(m, s);
  EXPECT_EQ(gain.size(), 10u);
  EXPECT_NEAR(gain.at("af"), -0.0030, 1e-9);
  EXPECT_NEAR(gain.at("jv"), 0.2129, 1e-9);
  for (const auto& [lang, g] : gain) EXPECT_LE(g, gain.at("jv")) << lang;
}

TEST(GainTest, IdenticalAndDisjoint) {
  std::map<std::string, double> a = {{"en", 0.8}, {"yo", 0.4}};
  for (const auto& [lang, g] : multilingual_gain(a, a)) EXPECT_EQ(g, 0.0);
  EXPECT_TRUE(multilingual_gain(a, {{"zh", 0.5}}).empty());
}

TEST(KendallTest, Extremes) {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> rev = {5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(*kendall_tau(x, x), 1.0);
  EXPECT_DOUBLE_EQ(*kendall_tau(x, rev), -1.0);
  std::vector<double> flat = {2, 2, 2, 2, 2};
  EXPECT_FALSE(kendall_tau(x, flat).has_value());
  EXPECT_FALSE(kendall_tau(flat, x).has_value());
  EXPECT_THROW(kendall_tau(std::vector<double>{1}, std::vector<double>{1}), Error);
  EXPECT_THROW(kendall_tau(x, std::vector<double>{1, 2}), Error);
}

TEST(KendallTest, TieCorrectedKnownValue) {
  std::vector<double> x = {1, 2, 2, 3, 4, 5};
  std::vector<double> y = {1, 3, 2, 2, 5, 4};
  // C = 11, D = 2, one tie on each side: 9 / sqrt(14 * 14).
  EXPECT_NEAR(*kendall_tau(x, y), 9.0 / 14.0, 1e-15);
}

TEST(KendallTest, MatchesBruteForceWithTies) {
  Rng rng(2024);
  for (int iter = 0; iter < 2000; ++iter) {
    const std::size_t n = 2 + rng.uniform_index(7);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.uniform_index(4));
      y[i] = static_cast<double>(rng.uniform_index(4));
    }
    auto fast = kendall_tau(x, y);
    auto slow = testing::brute_force_kendall(x, y);
    ASSERT_EQ(fast.has_value(), slow.has_value());
    if (fast) ASSERT_EQ(*fast, *slow);
  }
}

TEST(KendallTest, AntisymmetryAndMonotoneInvariance) {
  Rng rng(8);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t n = 2 + rng.uniform_index(20);
    std::vector<double> x(n), y(n), neg(n), ex(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.uniform_index(6));
      y[i] = rng.uniform_real(-1, 1);
      neg[i] = -y[i];
      ex[i] = std::exp(x[i]) * 3 + 1;
    }
    auto t = kendall_tau(x, y);
    if (!t) continue;
    EXPECT_NEAR(*kendall_tau(x, neg), -*t, 1e-12);
    EXPECT_NEAR(*kendall_tau(ex, y), *t, 1e-12);
  }
}

TEST(GroupTest, ReferenceTableFiveMeansAndMedians) {
  auto t5 = testing::load_reference_table(kData, "multilingual_regular_partial");
  auto records = testing::table_records(t5, PruneStrategy::kPartial,
                                        EvalSplit::kRegular);
  auto scores = aggregate_seeds(records);
  auto means = overall_stats(scores, Statistic::kMean);
  auto medians = overall_stats(scores, Statistic::kMedian);
  ASSERT_EQ(means.size(), 7u);
  EXPECT_EQ(means[0].sparsity, 0);
  EXPECT_NEAR(means[0].value, 0.8795, 5e-5);
  EXPECT_NEAR(medians[0].value, 0.9017, 5e-5);
  EXPECT_EQ(means[0].languages.size(), 40u);
}

TEST(GroupTest, SizeBucketsAreTableOneBuckets) {
  auto t5 = testing::load_reference_table(kData, "multilingual_regular_partial");
  auto records = testing::table_records(t5, PruneStrategy::kPartial,
                                        EvalSplit::kRegular);
  auto groups = group_stats(records, reference_meta(), GroupDimension::kSizeBucket,
                            Statistic::kMean);
  std::vector<std::string> dense_groups;
  for (const auto& g : groups) {
    if (g.sparsity == 0) dense_groups.push_back(g.group);
  }
  EXPECT_EQ(dense_groups, (std::vector<std::string>{"100", "1000", "5000", "10000",
                                                    "15000", "20000"}));
  for (const auto& g : groups) {
    if (g.sparsity == 0 && g.group == "100") {
      EXPECT_EQ(g.languages, (std::vector<std::string>{"jv", "my", "yo"}));
      const double expect =
          (t5.rows["jv"][0] + t5.rows["my"][0] + t5.rows["yo"][0]) / 3.0;
      EXPECT_NEAR(g.value, expect, 1e-12);
    }
  }
}

TEST(GroupTest, SingletonGroupsReproduceInputs) {
  LanguageTable meta;
  meta["aa"] = {"aa", "S1", "F1", 100, 0.0};
  meta["bb"] = {"bb", "S2", "F2", 1000, 0.0};
  std::vector<RunRecord> rs(2);
  rs[0].language = "aa";
  rs[0].report.f1 = 0.123456;
  rs[1].language = "bb";
  rs[1].report.f1 = 0.654321;
  for (auto stat : {Statistic::kMean, Statistic::kMedian}) {
    auto groups = group_stats(rs, meta, GroupDimension::kFamily, stat);
    ASSERT_EQ(groups.size(), 2u);
    EXPECT_EQ(groups[0].value, 0.123456);
    EXPECT_EQ(groups[1].value, 0.654321);
  }
  auto stds = group_stats(rs, meta, GroupDimension::kScript, Statistic::kStd);
  EXPECT_EQ(stds[0].value, 0.0);
}

TEST(GroupTest, MissingMetadataListsCodes) {
  std::vector<RunRecord> rs(2);
  rs[0].language = "qq";
  rs[1].language = "zz";
  try {
    group_stats(rs, reference_meta(), GroupDimension::kScript, Statistic::kMean);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("qq"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("zz"), std::string::npos);
  }
}

TEST(DeltasTest, UsesDenseOfSameStrategyOrFallsBack) {
  std::vector<RunRecord> rs;
  auto add = [&](int sp, PruneStrategy st, double f1) {
    RunRecord r;
    r.language = "af";
    r.sparsity = sp;
    r.strategy = st;
    r.report.f1 = f1;
    rs.push_back(r);
  };
  add(0, PruneStrategy::kPartial, 0.9014);
  add(50, PruneStrategy::kPartial, 0.9164);
  add(50, PruneStrategy::kInclEmbeddings, 0.8);
  auto deltas = language_deltas(aggregate_seeds(rs));
  ASSERT_EQ(deltas.size(), 2u);
  for (const auto& d : deltas) {
    EXPECT_EQ(d.dense_f1, 0.9014);
    if (d.strategy == PruneStrategy::kPartial) {
      EXPECT_NEAR(*d.relative, 0.01664, 5e-6);
      EXPECT_NEAR(d.absolute, 0.015, 1e-12);
    }
  }
}

TEST(ReportTest, EmptyResultsGiveHeaderOnlyCsvs) {
  fs::path dir = fs::temp_directory_path() / "nerprune_report_empty";
  fs::remove_all(dir);
  emit_report(std::vector<RunRecord>{}, reference_meta(), dir);
  for (const char* f : {"per_language.csv", "per_group.csv", "deltas.csv",
                        "group_deltas.csv", "ratios.csv", "overlap.csv"}) {
    std::string text = slurp(dir / f);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1) << f;
  }
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_EQ(slurp(dir / "per_language.csv"),
            "language,strategy,split,sparsity,mean_f1,std_f1,seeds\n");
}

TEST(ReportTest, TableFiveRoundTripsVerbatimAndDeterministically) {
  auto t5 = testing::load_reference_table(kData, "multilingual_regular_partial");
  auto t7 = testing::load_reference_table(kData, "multilingual_perturbed_partial");
  auto records = testing::table_records(t5, PruneStrategy::kPartial,
                                        EvalSplit::kRegular);
  auto more = testing::table_records(t7, PruneStrategy::kPartial,
                                     EvalSplit::kPerturbedInLanguage);
  records.insert(records.end(), more.begin(), more.end());

  fs::path a = fs::temp_directory_path() / "nerprune_report_a";
  fs::path b = fs::temp_directory_path() / "nerprune_report_b";
  fs::remove_all(a);
  fs::remove_all(b);
  emit_report(records, reference_meta(), a);
  emit_report(records, reference_meta(), b);
  for (const auto& entry : fs::directory_iterator(a)) {
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename()));
  }

  // Rebuild the multilingual regular partial table from per_language.csv and compare cell by cell.
  std::ifstream in(a / "per_language.csv");
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::map<int, std::string>> cells;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) f.push_back(c);
    if (f[2] != "regular") continue;
    cells[f[0]][std::stoi(f[3])] = f[4];
  }
  std::ifstream table(kData + "/reference_tables/multilingual_regular_partial.csv");
  std::getline(table, line);
  int checked = 0;
  while (std::getline(table, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) f.push_back(c);
    if (f[0] == "means" || f[0] == "medians") continue;
    for (std::size_t k = 0; k < kSparsityLevels.size(); ++k) {
      EXPECT_EQ(cells[f[0]][kSparsityLevels[k]], f[k + 1]) << f[0];
      ++checked;
    }
  }
  EXPECT_EQ(checked, 280);

  std::string ratios = slurp(a / "ratios.csv");
  EXPECT_NE(ratios.find("en,partial,0,perturbed-in-language,0.8470,0.0143,0.0169"),
            std::string::npos);
}

TEST(EnumTest, Strings) {
  EXPECT_EQ(parse_dimension("size"), GroupDimension::kSizeBucket);
  EXPECT_EQ(parse_dimension(to_string(GroupDimension::kFamily)),
            GroupDimension::kFamily);
  EXPECT_EQ(parse_statistic("median"), Statistic::kMedian);
  EXPECT_FALSE(parse_statistic("mode"));
}

}  // namespace
}  // namespace nerprune
