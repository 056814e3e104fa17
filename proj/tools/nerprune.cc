// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

// nerprune: command-line front end for the corpus, perturbation, training,
// experiment and analysis pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nerprune/analysis.h"
#include "nerprune/corpus.h"
#include "nerprune/errors.h"
#include "nerprune/eval.h"
#include "nerprune/experiment.h"
#include "nerprune/perturb.h"
#include "nerprune/prune.h"
#include "nerprune/tagger.h"

namespace {

namespace fs = std::filesystem;
using namespace nerprune;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct LangPath {
  std::string language;
  std::string path;
};

LangPath parse_lang_path(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw CLI::ValidationError("corpus", "expected LANG=PATH, got '" + arg + "'");
  }
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

std::vector<Corpus> read_corpora(const std::vector<std::string>& args,
                                 Split split, bool strip_prefix) {
  std::vector<Corpus> out;
  for (const std::string& a : args) {
    LangPath lp = parse_lang_path(a);
    out.push_back(read_iob2_file(lp.path, lp.language, split,
                                 ParseOptions{.strip_prefix = strip_prefix}));
  }
  return out;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// ---- validate ------------------------------------------------------------

struct ValidateArgs {
  std::string corpus;
  std::string language = "xx";
  bool strip_prefix = false;
};

int run_validate(const ValidateArgs& a) {
  Corpus c = read_iob2_file(a.corpus, a.language, Split::kTest,
                            ParseOptions{.strip_prefix = a.strip_prefix});
  std::size_t tokens = 0;
  std::map<EntityType, std::size_t> mentions;
  std::size_t ill_formed = 0;
  for (const Sentence& s : c.sentences) {
    validate_sentence(s);
    tokens += s.size();
    for (const EntityMention& m : extract_entities(s)) {
      ++mentions[m.type];
      if (!s.tags[m.start].is_begin()) ++ill_formed;
    }
  }
  std::size_t total = 0;
  for (const auto& [t, n] : mentions) total += n;
  std::cout << a.corpus << ": OK\n"
            << "sentences: " << c.sentences.size() << "\n"
            << "tokens: " << tokens << "\n"
            << "mentions: " << total << " (PER " << mentions[EntityType::kPer]
            << ", LOC " << mentions[EntityType::kLoc] << ", ORG "
            << mentions[EntityType::kOrg] << ")\n"
            << "mentions opened by I- tags: " << ill_formed << "\n";
  return 0;
}

// ---- perturb -------------------------------------------------------------

struct PerturbArgs {
  std::string scope;
  std::uint64_t seed = 0;
  std::string meta;
  std::string out_dir;
  std::vector<std::string> corpora;
  bool strip_prefix = false;
};

int run_perturb(const PerturbArgs& a) {
  const PerturbationScope scope = *parse_scope(a.scope);
  LanguageTable meta = load_language_metadata_file(a.meta);
  std::vector<Corpus> tests = read_corpora(a.corpora, Split::kTest, a.strip_prefix);
  fs::create_directories(a.out_dir);
  for (const Corpus& c : tests) {
    EntityPool pool =
        build_pool(tests, meta, scope, group_key_for(meta, c.language, scope));
    PerturbedCorpus p = perturb_corpus(c, pool, a.seed);
    const std::string stem = c.language + "." + a.scope;
    std::ofstream corpus_out(fs::path(a.out_dir) / (stem + ".iob2"),
                             std::ios::binary | std::ios::trunc);
    write_iob2(corpus_out, p.corpus);
    std::ofstream log_out(fs::path(a.out_dir) / (stem + ".log.jsonl"),
                          std::ios::binary | std::ios::trunc);
    write_replacement_log(log_out, p.log);
    if (!corpus_out || !log_out) throw Error("cannot write into " + a.out_dir);
    std::size_t replaced = 0;
    for (const auto& r : p.log) replaced += r.replaced;
    std::cout << c.language << ": " << replaced << " of " << p.log.size()
              << " mentions replaced -> " << stem << ".iob2\n";
  }
  return 0;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::vector<std::string> corpora;
  std::string out;
  std::uint64_t seed = 0;
  int sparsity = 0;
  std::string strategy = "partial";
  long start = -1;
  long end = -1;
  long frequency = 1;
  std::string ramp = "cubic";
  TaggerConfig tagger;
  bool strip_prefix = false;
};

int run_train(TrainArgs a) {
  std::vector<Corpus> train = read_corpora(a.corpora, Split::kTrain, a.strip_prefix);
  a.tagger.seed = a.seed;
  const PruneStrategy strategy = *parse_strategy(a.strategy);
  TaggerModel model = init_model(a.tagger, build_vocab(train, a.tagger.vocab_min_count));
  TrainOptions opts;
  opts.strategy = strategy;
  if (a.sparsity > 0) {
    if (a.start < 0 || a.end < 0) {
      throw CLI::ValidationError("--start/--end",
                                 "required when --sparsity is above 0");
    }
    opts.schedule = PruneSchedule{a.start, a.end, a.frequency, a.sparsity / 100.0,
                                  a.ramp == "linear" ? RampShape::kLinear
                                                     : RampShape::kCubic};
  }
  TrainHistory history = nerprune::train(model, train, opts);
  save_model(a.out, model, strategy);
  std::ofstream hist(fs::path(a.out) / "history.jsonl", std::ios::trunc);
  for (const StepRecord& r : history.steps) {
    nlohmann::ordered_json j;
    j["step"] = r.step;
    j["epoch"] = r.epoch;
    j["loss"] = r.loss;
    j["sparsity"] = r.sparsity;
    hist << j.dump() << '\n';
  }
  std::cout << "steps: " << history.steps.size() << "\n"
            << "final loss: " << fmt4(history.epoch_loss.empty()
                                          ? 0.0
                                          : history.epoch_loss.back())
            << "\n"
            << "sparsity (" << a.strategy << "): "
            << fmt4(measure_sparsity(model.params(), strategy)) << "\n"
            << "model: " << a.out << "\n";
  return 0;
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::string model;
  std::vector<std::string> corpora;
  std::string predictions;
  bool strip_prefix = false;
};

int run_evaluate(const EvaluateArgs& a) {
  TaggerModel model = load_model(a.model);
  std::vector<Corpus> tests = read_corpora(a.corpora, Split::kTest, a.strip_prefix);
  if (!a.predictions.empty()) fs::create_directories(a.predictions);
  for (const Corpus& c : tests) {
    std::vector<TagSequence> pred = predict(model, c);
    ScoreReport r = score_corpus(c, pred);
    nlohmann::ordered_json j;
    j["language"] = c.language;
    j["tp"] = r.tp;
    j["fp"] = r.fp;
    j["fn"] = r.fn;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    std::cout << j.dump() << '\n';
    if (!a.predictions.empty()) {
      Corpus out = c;
      for (std::size_t i = 0; i < out.sentences.size(); ++i) {
        out.sentences[i].tags = pred[i];
      }
      std::ofstream f(fs::path(a.predictions) / (c.language + ".iob2"),
                      std::ios::binary | std::ios::trunc);
      write_iob2(f, out);
    }
  }
  return 0;
}

// ---- experiment ----------------------------------------------------------

struct ExperimentArgs {
  std::string config;
  int workers = 1;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  if (!fs::exists(a.config)) {
    throw DataError("config file not found: " + a.config);
  }
  ExperimentConfig config = load_experiment_config(a.config);
  RunOptions opts;
  opts.workers = a.workers;
  opts.log = [](std::string_view msg) { std::cerr << msg << '\n'; };
  RunSummary s = run_experiment(config, opts);
  std::cout << "results: " << s.results.string() << "\n"
            << "completed: " << s.completed << "\n"
            << "skipped: " << s.skipped << "\n"
            << "failed: " << s.failed << "\n"
            << "records: " << s.records << "\n";
  return s.failed == 0 ? 0 : kDataError;
}

// ---- analyze -------------------------------------------------------------

struct AnalyzeArgs {
  std::string results;
  std::string meta;
  std::string dimension = "size";
  std::string stat = "mean";
  std::string mono_results;
};

int run_analyze(const AnalyzeArgs& a) {
  LanguageTable meta = load_language_metadata_file(a.meta);
  std::vector<RunRecord> records = read_run_records_file(a.results);
  auto groups = group_stats(records, meta, *parse_dimension(a.dimension),
                            *parse_statistic(a.stat));
  std::cout << "group,strategy,split,sparsity," << a.stat << "_f1,languages\n";
  for (const GroupValue& g : groups) {
    std::cout << g.group << ',' << to_string(g.strategy) << ','
              << to_string(g.split) << ',' << g.sparsity << ','
              << fmt4(g.value) << ',' << g.languages.size() << '\n';
  }
  if (a.mono_results.empty()) return 0;

  // Multilingual gain per (strategy, sparsity) on the regular split, and
  // Kendall's tau-b between the dense gain and the train size.
  auto multi = aggregate_seeds(records);
  auto mono = aggregate_seeds(read_run_records_file(a.mono_results));
  std::cout << "\nlanguage,strategy,sparsity,multi_f1,mono_f1,gain\n";
  std::map<std::string, double> dense_gain;
  for (const auto& [key, stats] : mono) {
    if (key.split != EvalSplit::kRegular) continue;
    auto it = multi.find(key);
    if (it == multi.end()) continue;
    const double gain = it->second.mean - stats.mean;
    std::cout << key.language << ',' << to_string(key.strategy) << ','
              << key.sparsity << ',' << fmt4(it->second.mean) << ','
              << fmt4(stats.mean) << ',' << fmt4(gain) << '\n';
    if (key.sparsity == 0) dense_gain.emplace(key.language, gain);
  }
  std::vector<double> gains, sizes;
  for (const auto& [lang, g] : dense_gain) {
    gains.push_back(g);
    sizes.push_back(static_cast<double>(lookup_language(meta, lang).train_size));
  }
  std::cout << "\nkendall_tau_b(dense gain, train size): ";
  std::optional<double> tau;
  if (gains.size() >= 2) tau = kendall_tau(gains, sizes);
  std::cout << (tau ? fmt4(*tau) : std::string("undefined")) << " (n="
            << gains.size() << ")\n";
  return 0;
}

// ---- report --------------------------------------------------------------

struct ReportArgs {
  std::string results;
  std::string meta;
  std::string out;
  std::string corpus_root;
};

int run_report(const ReportArgs& a) {
  LanguageTable meta = load_language_metadata_file(a.meta);
  std::vector<RunRecord> records = read_run_records_file(a.results);
  ReportOptions opts;
  if (!a.corpus_root.empty()) {
    std::set<std::string> langs;
    for (const RunRecord& r : records) langs.insert(r.language);
    for (const std::string& lang : langs) {
      const fs::path dir = fs::path(a.corpus_root) / lang;
      Corpus train = read_iob2_file((dir / "train.iob2").string(), lang, Split::kTrain);
      Corpus test = read_iob2_file((dir / "test.iob2").string(), lang, Split::kTest);
      if (auto o = entity_overlap(train, test)) opts.entity_overlap[lang] = *o;
    }
  }
  emit_report(records, meta, a.out, opts);
  std::cout << "report written to " << a.out << "\n";
  return 0;
}

void add_tagger_flags(CLI::App* cmd, TaggerConfig& c) {
  cmd->add_option("--embed-dim", c.embed_dim, "Embedding width")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--window", c.window, "Context tokens on each side")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--hidden-dim", c.hidden_dim, "Hidden layer width")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lr", c.learning_rate, "SGD learning rate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", c.epochs, "Training epochs")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--batch-size", c.batch_size, "Sentences per minibatch")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--min-count", c.vocab_min_count,
                  "Minimum token count for the vocabulary")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative magnitude pruning and robustness evaluation for NER",
               "nerprune"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nerprune 1.0.0");

  const std::vector<std::string> scopes = {"in-language", "in-script",
                                           "in-family"};
  const std::vector<std::string> strategies = {"partial", "incl-embeddings"};

  ValidateArgs validate;
  auto* validate_cmd =
      app.add_subcommand("validate", "Check an IOB2 corpus and print counts");
  validate_cmd->add_option("corpus", validate.corpus, "IOB2 file")
      ->required();
  validate_cmd->add_option("--language", validate.language,
                           "Language code of the corpus")
      ->capture_default_str();
  validate_cmd->add_flag("--strip-prefix", validate.strip_prefix,
                         "Remove a leading '<language>:' from tokens");

  PerturbArgs perturb;
  auto* perturb_cmd = app.add_subcommand(
      "perturb", "Write entity-replaced copies of test corpora");
  perturb_cmd->add_option("--scope", perturb.scope, "Replacement pool scope")
      ->required()
      ->check(CLI::IsMember(scopes));
  perturb_cmd->add_option("--seed", perturb.seed, "Perturbation seed")
      ->required();
  perturb_cmd->add_option("--meta", perturb.meta, "Language metadata CSV")
      ->required();
  perturb_cmd->add_option("--out-dir", perturb.out_dir, "Output directory")
      ->required();
  perturb_cmd->add_flag("--strip-prefix", perturb.strip_prefix,
                        "Remove a leading '<language>:' from tokens");
  perturb_cmd->add_option("corpora", perturb.corpora,
                          "Test corpora as LANG=PATH; all of them feed the pools")
      ->required();

  TrainArgs train;
  auto* train_cmd =
      app.add_subcommand("train", "Train one tagger, optionally with pruning");
  train_cmd->add_option("--train", train.corpora,
                        "Training corpora as LANG=PATH (several = joint model)")
      ->required();
  train_cmd->add_option("--out", train.out, "Model output directory")->required();
  train_cmd->add_option("--seed", train.seed, "Initialization and shuffling seed")
      ->required();
  train_cmd->add_option("--sparsity", train.sparsity,
                        "Target sparsity percent (0, 50, 70, 80, 90, 95, 98)")
      ->capture_default_str()
      ->check(CLI::IsMember(std::vector<int>(kSparsityLevels.begin(),
                                             kSparsityLevels.end())));
  train_cmd->add_option("--strategy", train.strategy, "Which tensors are pruned")
      ->capture_default_str()
      ->check(CLI::IsMember(strategies));
  train_cmd->add_option("--start", train.start, "First pruning step");
  train_cmd->add_option("--end", train.end, "Last pruning step");
  train_cmd->add_option("--frequency", train.frequency, "Steps between events")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--ramp", train.ramp, "Sparsity ramp shape")
      ->capture_default_str()
      ->check(CLI::IsMember({"cubic", "linear"}));
  train_cmd->add_flag("--strip-prefix", train.strip_prefix,
                      "Remove a leading '<language>:' from tokens");
  add_tagger_flags(train_cmd, train.tagger);

  EvaluateArgs evaluate;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Score a saved model on test corpora");
  evaluate_cmd->add_option("--model", evaluate.model, "Model directory")
      ->required();
  evaluate_cmd->add_option("--test", evaluate.corpora, "Test corpora as LANG=PATH")
      ->required();
  evaluate_cmd->add_option("--predictions", evaluate.predictions,
                           "Directory for predicted IOB2 files");
  evaluate_cmd->add_flag("--strip-prefix", evaluate.strip_prefix,
                         "Remove a leading '<language>:' from tokens");

  ExperimentArgs experiment;
  auto* experiment_cmd =
      app.add_subcommand("experiment", "Run an experiment grid from a config");
  experiment_cmd->add_option("--config", experiment.config, "JSON config file")
      ->required();
  experiment_cmd->add_option("--workers", experiment.workers,
                             "Runs trained in parallel")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  AnalyzeArgs analyze;
  auto* analyze_cmd =
      app.add_subcommand("analyze", "Grouped statistics over run results");
  analyze_cmd->add_option("--results", analyze.results, "Results JSON-lines")
      ->required();
  analyze_cmd->add_option("--meta", analyze.meta, "Language metadata CSV")
      ->required();
  analyze_cmd->add_option("--dimension", analyze.dimension, "Grouping")
      ->capture_default_str()
      ->check(CLI::IsMember({"size", "family", "script"}));
  analyze_cmd->add_option("--stat", analyze.stat, "Statistic per group")
      ->capture_default_str()
      ->check(CLI::IsMember({"mean", "median", "std"}));
  analyze_cmd->add_option("--mono-results", analyze.mono_results,
                          "Monolingual results; adds gains and Kendall's tau");

  ReportArgs report;
  auto* report_cmd =
      app.add_subcommand("report", "Write CSV tables and a JSON summary");
  report_cmd->add_option("--results", report.results, "Results JSON-lines")
      ->required();
  report_cmd->add_option("--meta", report.meta, "Language metadata CSV")
      ->required();
  report_cmd->add_option("--out", report.out, "Output directory")->required();
  report_cmd->add_option("--corpus-root", report.corpus_root,
                         "Corpora at <root>/<lang>/{train,test}.iob2, for overlap.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*validate_cmd) return run_validate(validate);
    if (*perturb_cmd) return run_perturb(perturb);
    if (*train_cmd) return run_train(train);
    if (*evaluate_cmd) return run_evaluate(evaluate);
    if (*experiment_cmd) return run_experiment_cmd(experiment);
    if (*analyze_cmd) return run_analyze(analyze);
    if (*report_cmd) return run_report(report);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const nerprune::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
