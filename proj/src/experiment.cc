// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "nerprune/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "nerprune/errors.h"
#include "nerprune/rng.h"

namespace nerprune {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

fs::path corpus_path(const ExperimentConfig& c, std::string_view lang,
                     std::string_view split) {
  return c.corpus_root / std::string(lang) / (std::string(split) + ".iob2");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or_throw(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

std::string run_dir_name(const std::string& id) {
  std::string out = id;
  std::replace(out.begin(), out.end(), '/', '_');
  return out;
}

struct Data {
  LanguageTable meta;
  std::map<std::string, Corpus> train;
  std::map<std::string, Corpus> test;
  // (language, scope) -> perturbed test corpus
  std::map<std::pair<std::string, PerturbationScope>, Corpus> perturbed;
};

EvalSplit split_for(PerturbationScope scope) {
  switch (scope) {
    case PerturbationScope::kInLanguage:
      return EvalSplit::kPerturbedInLanguage;
    case PerturbationScope::kInScript:
      return EvalSplit::kPerturbedInScript;
    case PerturbationScope::kInFamily:
      return EvalSplit::kPerturbedInFamily;
  }
  return EvalSplit::kRegular;
}

struct Outcome {
  std::vector<std::string> lines;
  std::optional<std::string> error;
  double seconds = 0.0;
};

Outcome execute(const ExperimentConfig& config, const std::string& hash,
                const fs::path& out_dir, const Data& data,
                const RunDescriptor& d) {
  Outcome outcome;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::vector<Corpus> train;
    long train_size = 0;
    for (const std::string& lang : d.train_languages) {
      train.push_back(data.train.at(lang));
      train_size += lookup_language(data.meta, lang).train_size;
    }
    TaggerConfig tc = config.tagger;
    tc.seed = static_cast<std::uint64_t>(d.seed);
    TaggerModel model = init_model(tc, build_vocab(train, tc.vocab_min_count));

    TrainOptions opts;
    opts.strategy = d.strategy;
    json schedule_json = nullptr;
    if (d.sparsity > 0) {
      ScheduleSpec spec = lookup_schedule(config.schedule_table, train_size);
      PruneSchedule s;
      s.start_step = spec.start;
      s.end_step = spec.end;
      s.frequency = spec.frequency;
      s.target_sparsity = d.sparsity / 100.0;
      s.ramp = config.ramp;
      opts.schedule = s;
      schedule_json = {{"start", spec.start},
                       {"end", spec.end},
                       {"frequency", spec.frequency},
                       {"target", s.target_sparsity}};
    }
    nerprune::train(model, train, opts);

    const double achieved = measure_sparsity(model.params(), d.strategy);
    const std::size_t n = prunable_count(model.params(), d.strategy);
    const double nominal = d.sparsity / 100.0;
    if (std::abs(achieved - nominal) >= 1.0 / static_cast<double>(n)) {
      throw Error("achieved sparsity " + std::to_string(achieved) +
                  " is not within 1/N of " + std::to_string(nominal));
    }
    if (config.save_checkpoints) {
      save_model(out_dir / "checkpoints" / run_dir_name(d.id), model,
                 d.strategy);
    }

    auto emit = [&](const std::string& lang, EvalSplit split,
                    const Corpus& gold) {
      RunRecord r;
      r.language = lang;
      r.sparsity = d.sparsity;
      r.strategy = d.strategy;
      r.seed = d.seed;
      r.split = split;
      r.report = score_corpus(gold, predict(model, gold));
      nlohmann::ordered_json j = to_json(r);
      j["mode"] = to_string(config.mode);
      j["run_id"] = d.id;
      j["config_hash"] = hash;
      j["schedule"] = schedule_json;
      j["achieved_sparsity"] = achieved;
      j["prunable_weights"] = n;
      outcome.lines.push_back(j.dump());
    };
    for (const std::string& lang : d.train_languages) {
      emit(lang, EvalSplit::kRegular, data.test.at(lang));
      for (PerturbationScope scope : config.scopes) {
        emit(lang, split_for(scope), data.perturbed.at({lang, scope}));
      }
    }
  } catch (const std::exception& e) {
    outcome.lines.clear();
    outcome.error = e.what();
  }
  outcome.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  return outcome;
}

std::set<std::string> completed_runs(const fs::path& results) {
  std::set<std::string> done;
  std::ifstream in(results);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      done.insert(j.at("run_id").get<std::string>());
    } catch (const json::exception&) {
      // A torn final line from an interrupted run; its descriptor reruns.
    }
  }
  return done;
}

}  // namespace

std::string_view to_string(TrainingMode mode) {
  return mode == TrainingMode::kMonolingual ? "monolingual" : "multilingual";
}

ScheduleTable default_schedule_table() {
  return {{100, {10, 60, 10}},        {1000, {100, 300, 50}},
          {5000, {500, 1200, 100}},   {10000, {500, 1200, 100}},
          {15000, {700, 1800, 150}},  {20000, {1000, 2400, 200}}};
}

ScheduleSpec lookup_schedule(const ScheduleTable& table, long train_size) {
  if (table.empty()) throw ConfigError("empty schedule table");
  auto it = table.upper_bound(train_size);
  if (it == table.begin()) return it->second;
  return std::prev(it)->second;
}

ExperimentConfig experiment_config_from_json(const json& j,
                                             const fs::path& base_dir) {
  ExperimentConfig c;
  const std::string mode = get_or_throw<std::string>(j, "mode");
  if (mode == "monolingual") {
    c.mode = TrainingMode::kMonolingual;
  } else if (mode == "multilingual") {
    c.mode = TrainingMode::kMultilingual;
  } else {
    throw ConfigError("mode must be 'monolingual' or 'multilingual'");
  }
  c.languages = get_or_throw<std::vector<std::string>>(j, "languages");
  c.sparsity_levels = get_or_throw<std::vector<int>>(j, "sparsity_levels");
  for (const auto& s : get_or_throw<std::vector<std::string>>(j, "strategies")) {
    auto st = parse_strategy(s);
    if (!st) throw ConfigError("unknown strategy '" + s + "'");
    c.strategies.push_back(*st);
  }
  c.seeds = get_or_throw<std::vector<std::int64_t>>(j, "seeds");
  if (j.contains("scopes")) {
    for (const auto& s : get_or_throw<std::vector<std::string>>(j, "scopes")) {
      auto sc = parse_scope(s);
      if (!sc) throw ConfigError("unknown perturbation scope '" + s + "'");
      c.scopes.push_back(*sc);
    }
  }
  if (j.contains("perturbation_seed")) {
    c.perturbation_seed = get_or_throw<std::uint64_t>(j, "perturbation_seed");
  }
  if (j.contains("tagger")) c.tagger = tagger_config_from_json(j.at("tagger"));
  if (j.contains("schedule_table")) {
    c.schedule_table.clear();
    for (const auto& [size, spec] : j.at("schedule_table").items()) {
      long key = 0;
      try {
        key = std::stol(size);
      } catch (const std::exception&) {
        throw ConfigError("schedule_table key '" + size + "' is not a size");
      }
      c.schedule_table[key] = {get_or_throw<long>(spec, "start"),
                               get_or_throw<long>(spec, "end"),
                               get_or_throw<long>(spec, "frequency")};
    }
  }
  if (j.contains("ramp")) {
    const std::string ramp = get_or_throw<std::string>(j, "ramp");
    if (ramp == "cubic") {
      c.ramp = RampShape::kCubic;
    } else if (ramp == "linear") {
      c.ramp = RampShape::kLinear;
    } else {
      throw ConfigError("ramp must be 'cubic' or 'linear'");
    }
  }
  c.strip_prefix = j.value("strip_prefix", false);
  c.save_checkpoints = j.value("save_checkpoints", true);
  const json& paths = j.contains("paths") ? j.at("paths") : json::object();
  c.corpus_root = resolve(base_dir, get_or_throw<std::string>(paths, "corpus_root"));
  c.metadata = resolve(base_dir, get_or_throw<std::string>(paths, "metadata"));
  c.output = resolve(base_dir, get_or_throw<std::string>(paths, "output"));
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j, path.parent_path());
}

nlohmann::ordered_json canonical_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(c.mode);
  j["languages"] = c.languages;
  j["sparsity_levels"] = c.sparsity_levels;
  std::vector<std::string> strategies;
  for (PruneStrategy s : c.strategies) strategies.emplace_back(to_string(s));
  j["strategies"] = strategies;
  j["seeds"] = c.seeds;
  std::vector<std::string> scopes;
  for (PerturbationScope s : c.scopes) scopes.emplace_back(to_string(s));
  j["scopes"] = scopes;
  j["perturbation_seed"] = c.perturbation_seed;
  j["tagger"] = to_json(c.tagger);
  nlohmann::ordered_json table = nlohmann::ordered_json::object();
  for (const auto& [size, s] : c.schedule_table) {
    table[std::to_string(size)] = {
        {"start", s.start}, {"end", s.end}, {"frequency", s.frequency}};
  }
  j["schedule_table"] = table;
  j["ramp"] = c.ramp == RampShape::kCubic ? "cubic" : "linear";
  j["strip_prefix"] = c.strip_prefix;
  j["corpus_root"] = c.corpus_root.lexically_normal().string();
  j["metadata"] = c.metadata.lexically_normal().string();
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(canonical_json(config).dump())));
  return buf;
}

std::vector<RunDescriptor> plan(const ExperimentConfig& c) {
  if (c.languages.empty()) throw ConfigError("no languages configured");
  if (c.seeds.empty()) throw ConfigError("no seeds configured");
  if (c.strategies.empty()) throw ConfigError("no strategies configured");
  if (c.sparsity_levels.empty()) {
    throw ConfigError("no sparsity levels configured");
  }
  if (!std::is_sorted(c.sparsity_levels.begin(), c.sparsity_levels.end()) ||
      std::adjacent_find(c.sparsity_levels.begin(), c.sparsity_levels.end()) !=
          c.sparsity_levels.end()) {
    throw ConfigError("sparsity levels must be strictly ascending");
  }
  for (int s : c.sparsity_levels) {
    if (!is_supported_sparsity(s)) {
      throw ConfigError("unsupported sparsity level " + std::to_string(s));
    }
  }
  validate_config(c.tagger);

  const LanguageTable meta = load_language_metadata_file(c.metadata.string());
  for (const std::string& lang : c.languages) {
    lookup_language(meta, lang);
    for (const char* split : {"train", "test"}) {
      fs::path p = corpus_path(c, lang, split);
      if (!fs::exists(p)) throw DataError("missing corpus file " + p.string());
    }
  }

  std::vector<RunDescriptor> runs;
  const std::string mode(to_string(c.mode));
  auto add = [&](const std::vector<std::string>& langs, const std::string& tag) {
    for (PruneStrategy st : c.strategies) {
      for (int sp : c.sparsity_levels) {
        for (std::int64_t seed : c.seeds) {
          RunDescriptor d;
          d.id = mode + "/" + tag + "/" + std::string(to_string(st)) + "/s" +
                 std::to_string(sp) + "/seed" + std::to_string(seed);
          d.train_languages = langs;
          d.sparsity = sp;
          d.strategy = st;
          d.seed = seed;
          runs.push_back(std::move(d));
        }
      }
    }
  };
  if (c.mode == TrainingMode::kMonolingual) {
    for (const std::string& lang : c.languages) add({lang}, lang);
  } else {
    add(c.languages, "joint");
  }
  return runs;
}

RunSummary run_experiment(const ExperimentConfig& config,
                          const RunOptions& options) {
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };
  const std::vector<RunDescriptor> runs = plan(config);
  const std::string hash = config_hash(config);
  const fs::path out_dir = config.output / hash;
  fs::create_directories(out_dir);

  RunSummary summary;
  summary.results = out_dir / "results.jsonl";
  {
    std::ofstream cfg(out_dir / "config.json", std::ios::trunc);
    cfg << canonical_json(config).dump(2) << '\n';
  }

  const std::set<std::string> done = completed_runs(summary.results);
  std::vector<const RunDescriptor*> pending;
  for (const RunDescriptor& d : runs) {
    if (done.contains(d.id)) {
      ++summary.skipped;
    } else {
      pending.push_back(&d);
    }
  }
  if (pending.empty()) {
    log("nothing to do: all " + std::to_string(runs.size()) +
        " runs are complete");
    return summary;
  }

  Data data;
  data.meta = load_language_metadata_file(config.metadata.string());
  ParseOptions popts;
  popts.strip_prefix = config.strip_prefix;
  std::vector<Corpus> tests;
  for (const std::string& lang : config.languages) {
    data.train[lang] = read_iob2_file(corpus_path(config, lang, "train").string(),
                                      lang, Split::kTrain, popts);
    data.test[lang] = read_iob2_file(corpus_path(config, lang, "test").string(),
                                     lang, Split::kTest, popts);
    tests.push_back(data.test[lang]);
  }
  // One perturbed set per (language, scope), shared by every run.
  fs::create_directories(out_dir / "perturbed");
  for (const std::string& lang : config.languages) {
    for (PerturbationScope scope : config.scopes) {
      EntityPool pool = build_pool(tests, data.meta, scope,
                                   group_key_for(data.meta, lang, scope));
      PerturbedCorpus p =
          perturb_corpus(data.test[lang], pool, config.perturbation_seed);
      const std::string stem = lang + "." + std::string(to_string(scope));
      std::ofstream corpus_out(out_dir / "perturbed" / (stem + ".iob2"),
                               std::ios::binary | std::ios::trunc);
      write_iob2(corpus_out, p.corpus);
      std::ofstream log_out(out_dir / "perturbed" / (stem + ".log.jsonl"),
                            std::ios::binary | std::ios::trunc);
      write_replacement_log(log_out, p.log);
      data.perturbed[{lang, scope}] = std::move(p.corpus);
    }
  }

  std::vector<std::optional<Outcome>> slots(pending.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      Outcome o = execute(config, hash, out_dir, data, *pending[i]);
      {
        std::lock_guard<std::mutex> lock(mu);
        slots[i] = std::move(o);
      }
      cv.notify_all();
    }
  };
  const int workers = std::max(1, options.workers);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);

  // Single writer, in plan order.
  std::ofstream results(summary.results, std::ios::app | std::ios::binary);
  std::ofstream failures(out_dir / "failures.jsonl", std::ios::app);
  std::ofstream timings(out_dir / "timings.jsonl", std::ios::app);
  for (std::size_t i = 0; i < pending.size(); ++i) {
    Outcome o;
    {
      std::unique_lock<std::mutex> lock(mu);
      cv.wait(lock, [&] { return slots[i].has_value(); });
      o = std::move(*slots[i]);
      slots[i].reset();
    }
    const RunDescriptor& d = *pending[i];
    timings << json{{"run_id", d.id}, {"seconds", o.seconds}}.dump() << '\n';
    if (o.error) {
      ++summary.failed;
      failures << json{{"run_id", d.id}, {"error", *o.error}}.dump() << '\n';
      log("FAILED " + d.id + ": " + *o.error);
      continue;
    }
    for (const std::string& line : o.lines) results << line << '\n';
    results.flush();
    ++summary.completed;
    summary.records += o.lines.size();
    log("done " + d.id);
  }
  for (std::thread& t : threads) t.join();
  return summary;
}

}  // namespace nerprune
