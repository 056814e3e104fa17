// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

// Aggregations over run records: grouped statistics, deltas against the
// dense model, robustness ratios, multilingual gain, Kendall's tau-b and
// CSV / JSON report emission.

#ifndef NERPRUNE_ANALYSIS_H_
#define NERPRUNE_ANALYSIS_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nerprune/corpus.h"
#include "nerprune/eval.h"

namespace nerprune {

enum class GroupDimension { kSizeBucket, kFamily, kScript };

// "size", "family", "script".
std::string_view to_string(GroupDimension dim);
std::optional<GroupDimension> parse_dimension(std::string_view s);

enum class Statistic { kMean, kMedian, kStd };

std::string_view to_string(Statistic stat);
std::optional<Statistic> parse_statistic(std::string_view s);

// Mean, median (midpoint average for even counts) or population standard
// deviation. Throws Error on an empty input.
double summarize(std::span<const double> values, Statistic stat);

// (sparse - dense) / dense; nullopt when dense is not positive.
std::optional<double> relative_delta(double sparse_f1, double dense_f1);

// perturbed / regular; nullopt when regular is not positive.
std::optional<double> robustness_ratio(double perturbed_f1, double regular_f1);

// multi - mono for every language present in both.
std::map<std::string, double> multilingual_gain(
    const std::map<std::string, double>& multi,
    const std::map<std::string, double>& mono);

// Kendall tau-b, (C - D) / sqrt((n0 - n1)(n0 - n2)), in O(n log n).
// nullopt when either side is entirely tied. Throws Error unless the inputs
// have equal length >= 2.
std::optional<double> kendall_tau(std::span<const double> x,
                                  std::span<const double> y);

// Group key of a language: its train size, family or script.
std::string group_key(const LanguageMeta& meta, GroupDimension dim);

// Seed-mean F1 per (language, sparsity, strategy, split).
using LanguageScores = std::map<RunKey, SeedStats>;

struct GroupValue {
  std::string group;
  int sparsity = 0;
  PruneStrategy strategy = PruneStrategy::kPartial;
  EvalSplit split = EvalSplit::kRegular;
  double value = 0.0;
  std::vector<std::string> languages;
};

// Statistic over the seed-mean F1 of the languages in each group, per
// (sparsity, strategy, split). Throws DataError listing every language
// without metadata.
std::vector<GroupValue> group_stats(const LanguageScores& scores,
                                    const LanguageTable& meta,
                                    GroupDimension dim, Statistic stat);
std::vector<GroupValue> group_stats(std::span<const RunRecord> records,
                                    const LanguageTable& meta,
                                    GroupDimension dim, Statistic stat);

// The same statistic over all languages at once (group "all").
std::vector<GroupValue> overall_stats(const LanguageScores& scores,
                                      Statistic stat);

struct DeltaRecord {
  std::string key;  // language or group
  int sparsity = 0;
  PruneStrategy strategy = PruneStrategy::kPartial;
  EvalSplit split = EvalSplit::kRegular;
  double dense_f1 = 0.0;
  double sparse_f1 = 0.0;
  double absolute = 0.0;
  std::optional<double> relative;
};

// Per-language deltas of every sparse condition against the dense (0%)
// score of the same strategy and split. When only the other strategy has a
// dense entry it is used (dense runs do not depend on the strategy).
std::vector<DeltaRecord> language_deltas(const LanguageScores& scores);

struct ReportOptions {
  // Train/test entity overlap per language, for overlap.csv.
  std::map<std::string, double> entity_overlap;
};

// Writes into `out_dir`:
//   per_language.csv  language,strategy,split,sparsity,mean_f1,std_f1,seeds
//   per_group.csv     dimension,group,strategy,split,sparsity,languages,
//                     mean_f1,median_f1,std_f1
//   deltas.csv        language,strategy,split,sparsity,dense_f1,sparse_f1,
//                     abs_delta,rel_delta
//   group_deltas.csv  dimension,group,strategy,split,sparsity,languages,
//                     mean_rel_delta,std_rel_delta
//   ratios.csv        language,strategy,sparsity,split,regular_f1,
//                     perturbed_f1,ratio
//   overlap.csv       language,entity_overlap,dense_f1
//   summary.json
// Numbers carry 4 decimals; undefined values are empty cells. Output is
// byte-identical for identical inputs.
void emit_report(std::span<const RunRecord> records, const LanguageTable& meta,
                 const std::filesystem::path& out_dir,
                 const ReportOptions& options = {});

}  // namespace nerprune

#endif  // NERPRUNE_ANALYSIS_H_
