// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

// A small window-based feed-forward tagger. Each token is classified from the
// concatenated embeddings of itself and `window` neighbours on each side:
//
//   x = [E[t-w]; ...; E[t+w]]    h = relu(x W1 + b1)    logits = h W2 + b2
//
// All weights live in ParamTensors so the IMP machinery in prune.h applies
// directly. Training is plain minibatch SGD on token-level cross-entropy.

#ifndef NERPRUNE_TAGGER_H_
#define NERPRUNE_TAGGER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "nerprune/corpus.h"
#include "nerprune/eval.h"
#include "nerprune/prune.h"

namespace nerprune {

struct TaggerConfig {
  int embed_dim = 32;
  int window = 2;
  int hidden_dim = 64;
  double learning_rate = 7e-5;
  int epochs = 60;
  int batch_size = 8;
  std::uint64_t seed = 0;
  int vocab_min_count = 1;
};

// Throws ConfigError when a dimension is < 1 or the learning rate is <= 0.
void validate_config(const TaggerConfig& config);

nlohmann::ordered_json to_json(const TaggerConfig& config);
// Missing keys keep their defaults.
TaggerConfig tagger_config_from_json(const nlohmann::json& j);

class Vocab {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::size_t kPad = 1;

  Vocab();
  // `tokens` excludes the two reserved entries.
  explicit Vocab(std::vector<std::string> tokens);

  std::size_t index(std::string_view token) const;
  std::size_t size() const { return entries_.size(); }
  // Entry i; entries 0 and 1 are "<unk>" and "<pad>".
  const std::string& token(std::size_t i) const { return entries_[i]; }
  bool contains(std::string_view token) const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

// Tokens with count >= min_count, by descending count then lexicographically.
Vocab build_vocab(std::span<const Corpus> corpora, int min_count);

using Logits = std::array<double, Tag::kCount>;

class TaggerModel {
 public:
  enum ParamIndex : std::size_t { kE = 0, kW1, kB1, kW2, kB2 };

  TaggerModel(TaggerConfig config, Vocab vocab, std::vector<ParamTensor> params);

  const TaggerConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }
  std::vector<ParamTensor>& params() { return params_; }
  const std::vector<ParamTensor>& params() const { return params_; }
  ParamTensor& param(ParamIndex i) { return params_[i]; }
  const ParamTensor& param(ParamIndex i) const { return params_[i]; }

  int input_dim() const { return (2 * config_.window + 1) * config_.embed_dim; }

 private:
  TaggerConfig config_;
  Vocab vocab_;
  std::vector<ParamTensor> params_;
};

// E, W1, W2 uniform in [-0.1, 0.1] from the config seed; biases zero; masks
// all ones.
TaggerModel init_model(const TaggerConfig& config, const Vocab& vocab);

// Pre-softmax scores for every token, in tagset order.
std::vector<Logits> forward(const TaggerModel& model, const Sentence& sentence);

// Independent per-token argmax; ties go to the lowest tag index.
std::vector<TagSequence> predict(const TaggerModel& model, const Corpus& corpus);

// Gradient buffers, one per parameter tensor, same order and sizes.
using Gradients = std::vector<std::vector<double>>;

Gradients zero_gradients(const TaggerModel& model);

// Adds the gradient of the summed token cross-entropy over `sentence`,
// multiplied by `scale`, into `grads` (when non-null). Returns the unscaled
// summed loss.
double accumulate_gradients(const TaggerModel& model, const Sentence& sentence,
                            double scale, Gradients* grads);

// Mean token cross-entropy over the corpora.
double mean_loss(const TaggerModel& model, std::span<const Corpus> corpora);

struct StepRecord {
  long step = 0;
  int epoch = 0;
  double loss = 0.0;  // mean token cross-entropy of the minibatch
  double sparsity = 0.0;  // measure_sparsity under the run's strategy
  // Masked positions holding a nonzero value after the step; always 0.
  std::size_t masked_nonzero = 0;
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  std::vector<double> epoch_loss;  // mean token loss per epoch
};

struct TrainOptions {
  std::optional<PruneSchedule> schedule;
  PruneStrategy strategy = PruneStrategy::kPartial;
  MaskScope mask_scope = MaskScope::kGlobal;
  // Called after every optimizer step, once masks are applied.
  std::function<void(const StepRecord&, const TaggerModel&)> on_step;
};

// Number of optimizer steps train() will take.
long total_steps(std::span<const Corpus> corpora, const TaggerConfig& config);

// Minibatch SGD with iterative magnitude pruning. At a schedule event step
// the masks are grown before that step's update; after every update masks
// are re-applied. Sentence order is reshuffled each epoch from the config
// seed. Throws ScheduleError (before training) when the schedule ends past
// the last step.
TrainHistory train(TaggerModel& model, std::span<const Corpus> corpora,
                   const TrainOptions& options = {});

struct GradCheckOptions {
  std::size_t samples_per_tensor = 100;
  std::uint64_t seed = 0;
  // Test hook: may alter the analytic gradient of a tensor before comparison.
  std::function<void(std::string_view tensor, std::span<double> grad)> corrupt;
};

struct GradCheckResult {
  // True when the loss is zero (e.g. empty sentence); nothing was compared.
  bool skipped = false;
  double max_relative_error = 0.0;
  std::map<std::string, double> per_tensor;
  std::size_t coordinates = 0;
};

// Compares analytic gradients with central differences
// (L(w + eps) - L(w - eps)) / 2 eps on sampled coordinates. Relative error
// is |a - n| / max(|a| + |n|, 1e-6); embedding coordinates are drawn from the
// rows the sentence actually uses.
GradCheckResult grad_check(const TaggerModel& model, const Sentence& sentence,
                           double epsilon, const GradCheckOptions& options = {});

// Checkpoint directory (see checkpoint.h) plus a `tagger.json` sidecar with
// the config, vocab and tagset.
void save_model(const std::filesystem::path& dir, const TaggerModel& model,
                PruneStrategy strategy);
TaggerModel load_model(const std::filesystem::path& dir);

}  // namespace nerprune

#endif  // NERPRUNE_TAGGER_H_
