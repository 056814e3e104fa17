// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "nerprune/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <tuple>
#include <utility>

#include "json.hpp"
#include "nerprune/errors.h"

namespace nerprune {
namespace {

namespace fs = std::filesystem;

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  // Avoid "-0.0000".
  if (std::string_view(buf) == "-0.0000") return "0.0000";
  return buf;
}

std::string fixed4(const std::optional<double>& v) {
  return v ? fixed4(*v) : std::string();
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

// Merge sort that counts strict inversions (pairs i < j with v[i] > v[j]).
std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& tmp,
                              std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = count_inversions(v, tmp, lo, mid) +
                     count_inversions(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
  return inv;
}

// Sum of t(t-1)/2 over runs of equal adjacent values.
template <typename It, typename Eq>
std::int64_t tied_pairs(It begin, It end, Eq eq) {
  std::int64_t total = 0;
  for (It run = begin; run != end;) {
    It next = run + 1;
    while (next != end && eq(*run, *next)) ++next;
    const std::int64_t t = next - run;
    total += t * (t - 1) / 2;
    run = next;
  }
  return total;
}

struct Condition {
  PruneStrategy strategy;
  EvalSplit split;
  int sparsity;
  auto tie() const { return std::tie(strategy, split, sparsity); }
  friend bool operator<(const Condition& a, const Condition& b) {
    return a.tie() < b.tie();
  }
};

// Orders size buckets numerically and everything else lexicographically.
std::pair<long, std::string> group_order(const std::string& group,
                                         GroupDimension dim) {
  if (dim == GroupDimension::kSizeBucket) {
    try {
      return {std::stol(group), group};
    } catch (const std::exception&) {
    }
  }
  return {0, group};
}

void check_metadata(const LanguageScores& scores, const LanguageTable& meta) {
  std::set<std::string> missing;
  for (const auto& [key, stats] : scores) {
    if (!meta.contains(key.language)) missing.insert(key.language);
  }
  if (missing.empty()) return;
  std::string list;
  for (const std::string& code : missing) {
    list += list.empty() ? code : ", " + code;
  }
  throw DataError("languages without metadata: " + list);
}

std::ofstream open_csv(const fs::path& path, std::string_view header) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << header << '\n';
  return out;
}

constexpr GroupDimension kDimensions[] = {GroupDimension::kSizeBucket,
                                          GroupDimension::kFamily,
                                          GroupDimension::kScript};

}  // namespace

std::string_view to_string(GroupDimension dim) {
  switch (dim) {
    case GroupDimension::kSizeBucket:
      return "size";
    case GroupDimension::kFamily:
      return "family";
    case GroupDimension::kScript:
      return "script";
  }
  return "?";
}

std::optional<GroupDimension> parse_dimension(std::string_view s) {
  for (GroupDimension d : kDimensions) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

std::string_view to_string(Statistic stat) {
  switch (stat) {
    case Statistic::kMean:
      return "mean";
    case Statistic::kMedian:
      return "median";
    case Statistic::kStd:
      return "std";
  }
  return "?";
}

std::optional<Statistic> parse_statistic(std::string_view s) {
  for (Statistic st : {Statistic::kMean, Statistic::kMedian, Statistic::kStd}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

double summarize(std::span<const double> values, Statistic stat) {
  if (values.empty()) throw Error("statistic of an empty sample");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  switch (stat) {
    case Statistic::kMean:
      return mean;
    case Statistic::kMedian: {
      std::vector<double> sorted(values.begin(), values.end());
      std::sort(sorted.begin(), sorted.end());
      const std::size_t mid = sorted.size() / 2;
      return sorted.size() % 2 == 1 ? sorted[mid]
                                    : (sorted[mid - 1] + sorted[mid]) / 2.0;
    }
    case Statistic::kStd: {
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      return std::sqrt(ss / n);
    }
  }
  return mean;
}

std::optional<double> relative_delta(double sparse_f1, double dense_f1) {
  if (!(dense_f1 > 0.0)) return std::nullopt;
  return (sparse_f1 - dense_f1) / dense_f1;
}

std::optional<double> robustness_ratio(double perturbed_f1, double regular_f1) {
  if (!(regular_f1 > 0.0)) return std::nullopt;
  return perturbed_f1 / regular_f1;
}

std::map<std::string, double> multilingual_gain(
    const std::map<std::string, double>& multi,
    const std::map<std::string, double>& mono) {
  std::map<std::string, double> gain;
  for (const auto& [lang, f1] : multi) {
    if (auto it = mono.find(lang); it != mono.end()) {
      gain[lang] = f1 - it->second;
    }
  }
  return gain;
}

std::optional<double> kendall_tau(std::span<const double> x,
                                  std::span<const double> y) {
  if (x.size() != y.size()) throw Error("kendall_tau: length mismatch");
  if (x.size() < 2) throw Error("kendall_tau: need at least 2 observations");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) {
      throw Error("kendall_tau: NaN input");
    }
  }
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  std::vector<std::pair<double, double>> pairs(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pairs[i] = {x[i], y[i]};
  std::sort(pairs.begin(), pairs.end());

  const std::int64_t n0 = n * (n - 1) / 2;
  const std::int64_t n1 = tied_pairs(
      pairs.begin(), pairs.end(),
      [](const auto& a, const auto& b) { return a.first == b.first; });
  const std::int64_t n3 = tied_pairs(pairs.begin(), pairs.end(),
                                     [](const auto& a, const auto& b) {
                                       return a == b;
                                     });
  std::vector<double> ys(x.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) ys[i] = pairs[i].second;
  std::vector<double> tmp(ys.size());
  // Sorted by (x, y): every strict y inversion is an x-untied discordant pair.
  const std::int64_t discordant = count_inversions(ys, tmp, 0, ys.size());
  const std::int64_t n2 = tied_pairs(
      ys.begin(), ys.end(), [](double a, double b) { return a == b; });

  if (n0 == n1 || n0 == n2) return std::nullopt;
  const std::int64_t concordant = n0 - n1 - n2 + n3 - discordant;
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(n0 - n1) *
                   static_cast<double>(n0 - n2));
}

std::string group_key(const LanguageMeta& meta, GroupDimension dim) {
  switch (dim) {
    case GroupDimension::kSizeBucket:
      return std::to_string(meta.train_size);
    case GroupDimension::kFamily:
      return meta.family;
    case GroupDimension::kScript:
      return meta.script;
  }
  return {};
}

std::vector<GroupValue> group_stats(const LanguageScores& scores,
                                    const LanguageTable& meta,
                                    GroupDimension dim, Statistic stat) {
  check_metadata(scores, meta);
  std::map<std::tuple<Condition, std::pair<long, std::string>>,
           std::vector<std::pair<std::string, double>>>
      groups;
  for (const auto& [key, stats] : scores) {
    const std::string group = group_key(meta.at(key.language), dim);
    groups[{Condition{key.strategy, key.split, key.sparsity},
            group_order(group, dim)}]
        .emplace_back(key.language, stats.mean);
  }
  std::vector<GroupValue> out;
  for (const auto& [gk, members] : groups) {
    const auto& [cond, order] = gk;
    GroupValue g;
    g.group = order.second;
    g.sparsity = cond.sparsity;
    g.strategy = cond.strategy;
    g.split = cond.split;
    std::vector<double> values;
    for (const auto& [lang, v] : members) {
      g.languages.push_back(lang);
      values.push_back(v);
    }
    g.value = summarize(values, stat);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GroupValue> group_stats(std::span<const RunRecord> records,
                                    const LanguageTable& meta,
                                    GroupDimension dim, Statistic stat) {
  return group_stats(aggregate_seeds(records), meta, dim, stat);
}

std::vector<GroupValue> overall_stats(const LanguageScores& scores,
                                      Statistic stat) {
  std::map<Condition, std::vector<std::pair<std::string, double>>> groups;
  for (const auto& [key, stats] : scores) {
    groups[{key.strategy, key.split, key.sparsity}].emplace_back(key.language,
                                                                 stats.mean);
  }
  std::vector<GroupValue> out;
  for (const auto& [cond, members] : groups) {
    GroupValue g;
    g.group = "all";
    g.sparsity = cond.sparsity;
    g.strategy = cond.strategy;
    g.split = cond.split;
    std::vector<double> values;
    for (const auto& [lang, v] : members) {
      g.languages.push_back(lang);
      values.push_back(v);
    }
    g.value = summarize(values, stat);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<DeltaRecord> language_deltas(const LanguageScores& scores) {
  std::vector<DeltaRecord> out;
  for (const auto& [key, stats] : scores) {
    if (key.sparsity == 0) continue;
    auto dense = scores.find({key.language, 0, key.strategy, key.split});
    if (dense == scores.end()) {
      const PruneStrategy other = key.strategy == PruneStrategy::kPartial
                                      ? PruneStrategy::kInclEmbeddings
                                      : PruneStrategy::kPartial;
      dense = scores.find({key.language, 0, other, key.split});
    }
    if (dense == scores.end()) continue;
    DeltaRecord d;
    d.key = key.language;
    d.sparsity = key.sparsity;
    d.strategy = key.strategy;
    d.split = key.split;
    d.dense_f1 = dense->second.mean;
    d.sparse_f1 = stats.mean;
    d.absolute = d.sparse_f1 - d.dense_f1;
    d.relative = relative_delta(d.sparse_f1, d.dense_f1);
    out.push_back(std::move(d));
  }
  std::sort(out.begin(), out.end(), [](const DeltaRecord& a,
                                       const DeltaRecord& b) {
    return std::tie(a.key, a.strategy, a.split, a.sparsity) <
           std::tie(b.key, b.strategy, b.split, b.sparsity);
  });
  return out;
}

void emit_report(std::span<const RunRecord> records, const LanguageTable& meta,
                 const fs::path& out_dir, const ReportOptions& options) {
  fs::create_directories(out_dir);
  const LanguageScores scores = aggregate_seeds(records);
  check_metadata(scores, meta);

  {
    auto out = open_csv(out_dir / "per_language.csv",
                        "language,strategy,split,sparsity,mean_f1,std_f1,seeds");
    for (const auto& [key, s] : scores) {
      out << key.language << ',' << to_string(key.strategy) << ','
          << to_string(key.split) << ',' << key.sparsity << ','
          << fixed4(s.mean) << ',' << fixed4(s.stddev) << ',' << s.n << '\n';
    }
  }

  {
    auto out = open_csv(out_dir / "per_group.csv",
                        "dimension,group,strategy,split,sparsity,languages,"
                        "mean_f1,median_f1,std_f1");
    for (GroupDimension dim : kDimensions) {
      auto means = group_stats(scores, meta, dim, Statistic::kMean);
      auto medians = group_stats(scores, meta, dim, Statistic::kMedian);
      auto stds = group_stats(scores, meta, dim, Statistic::kStd);
      for (std::size_t i = 0; i < means.size(); ++i) {
        const GroupValue& g = means[i];
        out << to_string(dim) << ',' << g.group << ',' << to_string(g.strategy)
            << ',' << to_string(g.split) << ',' << g.sparsity << ','
            << g.languages.size() << ',' << fixed4(g.value) << ','
            << fixed4(medians[i].value) << ',' << fixed4(stds[i].value)
            << '\n';
      }
    }
  }

  const std::vector<DeltaRecord> deltas = language_deltas(scores);
  {
    auto out = open_csv(out_dir / "deltas.csv",
                        "language,strategy,split,sparsity,dense_f1,sparse_f1,"
                        "abs_delta,rel_delta");
    for (const DeltaRecord& d : deltas) {
      out << d.key << ',' << to_string(d.strategy) << ','
          << to_string(d.split) << ',' << d.sparsity << ','
          << fixed4(d.dense_f1) << ',' << fixed4(d.sparse_f1) << ','
          << fixed4(d.absolute) << ',' << fixed4(d.relative) << '\n';
    }
  }

  {
    auto out = open_csv(out_dir / "group_deltas.csv",
                        "dimension,group,strategy,split,sparsity,languages,"
                        "mean_rel_delta,std_rel_delta");
    for (GroupDimension dim : kDimensions) {
      std::map<std::tuple<Condition, std::pair<long, std::string>>,
               std::vector<double>>
          groups;
      for (const DeltaRecord& d : deltas) {
        if (!d.relative) continue;
        groups[{Condition{d.strategy, d.split, d.sparsity},
                group_order(group_key(meta.at(d.key), dim), dim)}]
            .push_back(*d.relative);
      }
      for (const auto& [gk, values] : groups) {
        const auto& [cond, order] = gk;
        out << to_string(dim) << ',' << order.second << ','
            << to_string(cond.strategy) << ',' << to_string(cond.split) << ','
            << cond.sparsity << ',' << values.size() << ','
            << fixed4(summarize(values, Statistic::kMean)) << ','
            << fixed4(summarize(values, Statistic::kStd)) << '\n';
      }
    }
  }

  std::map<Condition, std::vector<double>> ratios_by_condition;
  {
    auto out = open_csv(out_dir / "ratios.csv",
                        "language,strategy,sparsity,split,regular_f1,"
                        "perturbed_f1,ratio");
    for (const auto& [key, s] : scores) {
      if (key.split == EvalSplit::kRegular) continue;
      auto regular = scores.find(
          {key.language, key.sparsity, key.strategy, EvalSplit::kRegular});
      if (regular == scores.end()) continue;
      auto ratio = robustness_ratio(s.mean, regular->second.mean);
      if (ratio) {
        ratios_by_condition[{key.strategy, key.split, key.sparsity}].push_back(
            *ratio);
      }
      out << key.language << ',' << to_string(key.strategy) << ','
          << key.sparsity << ',' << to_string(key.split) << ','
          << fixed4(regular->second.mean) << ',' << fixed4(s.mean) << ','
          << fixed4(ratio) << '\n';
    }
  }

  {
    auto out =
        open_csv(out_dir / "overlap.csv", "language,entity_overlap,dense_f1");
    for (const auto& [lang, overlap] : options.entity_overlap) {
      std::optional<double> dense;
      for (PruneStrategy st :
           {PruneStrategy::kPartial, PruneStrategy::kInclEmbeddings}) {
        auto it = scores.find({lang, 0, st, EvalSplit::kRegular});
        if (it != scores.end()) {
          dense = it->second.mean;
          break;
        }
      }
      out << lang << ',' << fixed4(overlap) << ',' << fixed4(dense) << '\n';
    }
  }

  nlohmann::ordered_json summary;
  summary["records"] = records.size();
  std::set<std::string> languages;
  for (const auto& [key, s] : scores) languages.insert(key.language);
  summary["languages"] = languages;
  summary["conditions"] = nlohmann::ordered_json::array();
  auto means = overall_stats(scores, Statistic::kMean);
  auto medians = overall_stats(scores, Statistic::kMedian);
  auto stds = overall_stats(scores, Statistic::kStd);
  for (std::size_t i = 0; i < means.size(); ++i) {
    const GroupValue& g = means[i];
    nlohmann::ordered_json c;
    c["strategy"] = to_string(g.strategy);
    c["split"] = to_string(g.split);
    c["sparsity"] = g.sparsity;
    c["languages"] = g.languages.size();
    c["mean_f1"] = round4(g.value);
    c["median_f1"] = round4(medians[i].value);
    c["std_f1"] = round4(stds[i].value);
    auto r = ratios_by_condition.find({g.strategy, g.split, g.sparsity});
    c["mean_robustness_ratio"] =
        r == ratios_by_condition.end()
            ? nlohmann::ordered_json(nullptr)
            : nlohmann::ordered_json(
                  round4(summarize(r->second, Statistic::kMean)));
    summary["conditions"].push_back(std::move(c));
  }
  std::ofstream out(out_dir / "summary.json", std::ios::binary | std::ios::trunc);
  out << summary.dump(2) << '\n';
  if (!out) throw Error("cannot write summary.json");
}

}  // namespace nerprune
