// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

// Grid orchestration: {languages | joint} x sparsity x strategy x seed, each
// run evaluated on the regular and the perturbed test sets.

#ifndef NERPRUNE_EXPERIMENT_H_
#define NERPRUNE_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nerprune/perturb.h"
#include "nerprune/prune.h"
#include "nerprune/tagger.h"

namespace nerprune {

enum class TrainingMode { kMonolingual, kMultilingual };

std::string_view to_string(TrainingMode mode);

struct ScheduleSpec {
  long start = 0;
  long end = 0;
  long frequency = 1;
  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

// Pruning schedules by training-set size (in sentences).
using ScheduleTable = std::map<long, ScheduleSpec>;

// 100: 10/60/10, 1000: 100/300/50, 5000 and 10000: 500/1200/100,
// 15000: 700/1800/150, 20000: 1000/2400/200.
ScheduleTable default_schedule_table();

// Entry for the largest size <= train_size, or the smallest entry when every
// size is larger. Throws ConfigError on an empty table.
ScheduleSpec lookup_schedule(const ScheduleTable& table, long train_size);

struct ExperimentConfig {
  TrainingMode mode = TrainingMode::kMonolingual;
  std::vector<std::string> languages;
  std::vector<int> sparsity_levels;  // percents, ascending; 0 = dense
  std::vector<PruneStrategy> strategies;
  std::vector<std::int64_t> seeds;
  std::vector<PerturbationScope> scopes;
  std::uint64_t perturbation_seed = 0;
  TaggerConfig tagger;
  ScheduleTable schedule_table = default_schedule_table();
  RampShape ramp = RampShape::kCubic;
  bool strip_prefix = false;
  bool save_checkpoints = true;
  // Corpora live at <corpus_root>/<lang>/{train,test}.iob2.
  std::filesystem::path corpus_root;
  std::filesystem::path metadata;
  std::filesystem::path output;
};

// Relative paths are resolved against `base_dir`. Throws ConfigError.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir);
// Reads a JSON config file; relative paths resolve against its directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Canonical JSON of everything that affects results (not the output path).
nlohmann::ordered_json canonical_json(const ExperimentConfig& config);
// 16 hex digits of FNV-1a over canonical_json().dump().
std::string config_hash(const ExperimentConfig& config);

struct RunDescriptor {
  std::string id;
  std::vector<std::string> train_languages;
  int sparsity = 0;
  PruneStrategy strategy = PruneStrategy::kPartial;
  std::int64_t seed = 0;
};

// Cartesian product in a fixed order (language, strategy, sparsity, seed).
// Throws ConfigError on an invalid grid, DataError on unknown languages or
// missing corpus files.
std::vector<RunDescriptor> plan(const ExperimentConfig& config);

struct RunOptions {
  int workers = 1;
  std::function<void(std::string_view)> log;
};

struct RunSummary {
  std::filesystem::path results;  // <output>/<hash>/results.jsonl
  std::size_t completed = 0;      // descriptors run now
  std::size_t skipped = 0;        // already present in results
  std::size_t failed = 0;         // see failures.jsonl
  std::size_t records = 0;        // records appended now
};

// Trains and evaluates every pending descriptor, appending one JSON line per
// (descriptor, evaluated language, split). Results are written in plan
// order regardless of the worker count; completed descriptors are skipped.
RunSummary run_experiment(const ExperimentConfig& config,
                          const RunOptions& options = {});

}  // namespace nerprune

#endif  // NERPRUNE_EXPERIMENT_H_
