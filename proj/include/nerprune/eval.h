// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

// Entity-level precision / recall / F1 with seqeval-compatible span
// semantics, and per-seed aggregation of run records.

#ifndef NERPRUNE_EVAL_H_
#define NERPRUNE_EVAL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "nerprune/corpus.h"
#include "nerprune/prune.h"

namespace nerprune {

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct ScoreReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::map<EntityType, Counts> per_type;
};

// P, R and F1 from pooled counts; every zero denominator yields 0.
ScoreReport make_report(const std::map<EntityType, Counts>& per_type);

using TagSequence = std::vector<Tag>;

// Micro-averaged entity scores. A true positive is an exact
// (start, end, type) match between decoded gold and predicted mentions.
// Throws AlignmentError when sentence or token counts differ.
ScoreReport score_corpus(const Corpus& gold,
                         std::span<const TagSequence> predicted);

enum class EvalSplit {
  kRegular,
  kPerturbedInLanguage,
  kPerturbedInScript,
  kPerturbedInFamily
};

std::string_view to_string(EvalSplit split);
std::optional<EvalSplit> parse_eval_split(std::string_view s);

// Sparsity percentages a RunRecord may carry.
inline constexpr std::array<int, 7> kSparsityLevels = {0,  50, 70, 80,
                                                       90, 95, 98};
bool is_supported_sparsity(int percent);

struct RunRecord {
  std::string language;
  int sparsity = 0;  // percent
  PruneStrategy strategy = PruneStrategy::kPartial;
  std::int64_t seed = 0;
  EvalSplit split = EvalSplit::kRegular;
  ScoreReport report;
};

// {language, sparsity, strategy, seed, split, tp, fp, fn, precision,
//  recall, f1}
nlohmann::ordered_json to_json(const RunRecord& record);
// Extra keys are ignored. Throws DataError on missing or invalid fields.
RunRecord run_record_from_json(const nlohmann::json& j);

// Reads every non-blank line of a JSON-lines stream.
std::vector<RunRecord> read_run_records(std::istream& in);
std::vector<RunRecord> read_run_records_file(const std::string& path);

struct RunKey {
  std::string language;
  int sparsity = 0;
  PruneStrategy strategy = PruneStrategy::kPartial;
  EvalSplit split = EvalSplit::kRegular;

  auto tie() const { return std::tie(language, sparsity, strategy, split); }
  friend bool operator<(const RunKey& a, const RunKey& b) {
    return a.tie() < b.tie();
  }
  friend bool operator==(const RunKey& a, const RunKey& b) {
    return a.tie() == b.tie();
  }
};

struct SeedStats {
  double mean = 0.0;
  double stddev = 0.0;  // population (divides by n)
  std::size_t n = 0;
};

std::map<RunKey, SeedStats> aggregate_seeds(std::span<const RunRecord> records);

}  // namespace nerprune

#endif  // NERPRUNE_EVAL_H_
