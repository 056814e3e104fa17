// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "nerprune/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "nerprune/errors.h"

namespace nerprune {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ScoreReport make_report(const std::map<EntityType, Counts>& per_type) {
  ScoreReport r;
  r.per_type = per_type;
  for (const auto& [type, c] : per_type) {
    r.tp += c.tp;
    r.fp += c.fp;
    r.fn += c.fn;
  }
  r.precision = ratio(r.tp, r.tp + r.fp);
  r.recall = ratio(r.tp, r.tp + r.fn);
  r.f1 = r.precision + r.recall == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

ScoreReport score_corpus(const Corpus& gold,
                         std::span<const TagSequence> predicted) {
  if (gold.sentences.size() != predicted.size()) {
    throw AlignmentError("gold has " + std::to_string(gold.sentences.size()) +
                         " sentences, prediction has " +
                         std::to_string(predicted.size()));
  }
  std::map<EntityType, Counts> per_type;
  for (EntityType t : kEntityTypes) per_type[t];

  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const Sentence& g = gold.sentences[i];
    if (g.tags.size() != predicted[i].size()) {
      throw AlignmentError("sentence " + std::to_string(i) + ": gold has " +
                           std::to_string(g.tags.size()) +
                           " tags, prediction has " +
                           std::to_string(predicted[i].size()));
    }
    Sentence p;
    p.tokens = g.tokens;
    p.tags = predicted[i];

    using Span = std::tuple<std::size_t, std::size_t, EntityType>;
    std::set<Span> gold_spans;
    for (const EntityMention& m : extract_entities(g)) {
      gold_spans.emplace(m.start, m.end, m.type);
    }
    for (const EntityMention& m : extract_entities(p)) {
      if (gold_spans.erase({m.start, m.end, m.type})) {
        ++per_type[m.type].tp;
      } else {
        ++per_type[m.type].fp;
      }
    }
    for (const auto& [start, end, type] : gold_spans) ++per_type[type].fn;
  }
  return make_report(per_type);
}

std::string_view to_string(EvalSplit split) {
  switch (split) {
    case EvalSplit::kRegular:
      return "regular";
    case EvalSplit::kPerturbedInLanguage:
      return "perturbed-in-language";
    case EvalSplit::kPerturbedInScript:
      return "perturbed-in-script";
    case EvalSplit::kPerturbedInFamily:
      return "perturbed-in-family";
  }
  return "?";
}

std::optional<EvalSplit> parse_eval_split(std::string_view s) {
  for (EvalSplit e :
       {EvalSplit::kRegular, EvalSplit::kPerturbedInLanguage,
        EvalSplit::kPerturbedInScript, EvalSplit::kPerturbedInFamily}) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

bool is_supported_sparsity(int percent) {
  return std::find(kSparsityLevels.begin(), kSparsityLevels.end(), percent) !=
         kSparsityLevels.end();
}

nlohmann::ordered_json to_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["language"] = r.language;
  j["sparsity"] = r.sparsity;
  j["strategy"] = to_string(r.strategy);
  j["seed"] = r.seed;
  j["split"] = to_string(r.split);
  j["tp"] = r.report.tp;
  j["fp"] = r.report.fp;
  j["fn"] = r.report.fn;
  j["precision"] = r.report.precision;
  j["recall"] = r.report.recall;
  j["f1"] = r.report.f1;
  return j;
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  try {
    r.language = j.at("language").get<std::string>();
    r.sparsity = j.at("sparsity").get<int>();
    auto strategy = parse_strategy(j.at("strategy").get<std::string>());
    if (!strategy) throw DataError("unknown strategy in run record");
    r.strategy = *strategy;
    r.seed = j.at("seed").get<std::int64_t>();
    auto split = parse_eval_split(j.at("split").get<std::string>());
    if (!split) throw DataError("unknown split in run record");
    r.split = *split;
    r.report.tp = j.at("tp").get<std::size_t>();
    r.report.fp = j.at("fp").get<std::size_t>();
    r.report.fn = j.at("fn").get<std::size_t>();
    r.report.precision = j.at("precision").get<double>();
    r.report.recall = j.at("recall").get<double>();
    r.report.f1 = j.at("f1").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid run record: ") + e.what());
  }
  if (!is_supported_sparsity(r.sparsity)) {
    throw DataError("unsupported sparsity level " +
                    std::to_string(r.sparsity));
  }
  return r;
}

std::vector<RunRecord> read_run_records(std::istream& in) {
  std::vector<RunRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(run_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const DataError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return records;
}

std::vector<RunRecord> read_run_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open results file " + path);
  return read_run_records(in);
}

std::map<RunKey, SeedStats> aggregate_seeds(
    std::span<const RunRecord> records) {
  std::map<RunKey, std::vector<double>> groups;
  for (const RunRecord& r : records) {
    groups[{r.language, r.sparsity, r.strategy, r.split}].push_back(
        r.report.f1);
  }
  std::map<RunKey, SeedStats> out;
  for (const auto& [key, values] : groups) {
    SeedStats s;
    s.n = values.size();
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(s.n);
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n));
    out.emplace(key, s);
  }
  return out;
}

}  // namespace nerprune
