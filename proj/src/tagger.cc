// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "nerprune/tagger.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <utility>

#include "nerprune/checkpoint.h"
#include "nerprune/errors.h"
#include "nerprune/rng.h"

namespace nerprune {
namespace {

constexpr int kTags = Tag::kCount;

// Vocabulary ids of the (2w+1) context window around every position.
std::vector<std::size_t> context_ids(const TaggerModel& model,
                                     const Sentence& sentence) {
  const int w = model.config().window;
  const long n = static_cast<long>(sentence.size());
  std::vector<std::size_t> ids;
  ids.reserve(sentence.size() * (2 * w + 1));
  std::vector<std::size_t> token_ids(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    token_ids[i] = model.vocab().index(sentence.tokens[i]);
  }
  for (long i = 0; i < n; ++i) {
    for (long j = i - w; j <= i + w; ++j) {
      ids.push_back(j < 0 || j >= n ? Vocab::kPad : token_ids[j]);
    }
  }
  return ids;
}

struct Activations {
  std::vector<double> x;   // I
  std::vector<double> z1;  // H, pre-activation
  std::vector<double> a;   // H
  Logits logits{};
};

void forward_token(const TaggerModel& model, std::span<const std::size_t> ids,
                   Activations& act) {
  const auto& cfg = model.config();
  const std::size_t d = cfg.embed_dim;
  const std::size_t h = cfg.hidden_dim;
  const std::size_t in = model.input_dim();
  auto emb = model.param(TaggerModel::kE).values();
  auto w1 = model.param(TaggerModel::kW1).values();
  auto b1 = model.param(TaggerModel::kB1).values();
  auto w2 = model.param(TaggerModel::kW2).values();
  auto b2 = model.param(TaggerModel::kB2).values();

  act.x.resize(in);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    std::copy_n(emb.begin() + ids[k] * d, d, act.x.begin() + k * d);
  }
  act.z1.assign(b1.begin(), b1.end());
  for (std::size_t i = 0; i < in; ++i) {
    const double xi = act.x[i];
    if (xi == 0.0) continue;
    const double* row = w1.data() + i * h;
    for (std::size_t j = 0; j < h; ++j) act.z1[j] += xi * row[j];
  }
  act.a.resize(h);
  for (std::size_t j = 0; j < h; ++j) act.a[j] = std::max(0.0, act.z1[j]);
  for (int t = 0; t < kTags; ++t) act.logits[t] = b2[t];
  for (std::size_t j = 0; j < h; ++j) {
    const double aj = act.a[j];
    if (aj == 0.0) continue;
    const double* row = w2.data() + j * kTags;
    for (int t = 0; t < kTags; ++t) act.logits[t] += aj * row[t];
  }
}

// Cross-entropy of `logits` against `gold`; writes softmax into `probs`.
double cross_entropy(const Logits& logits, int gold, Logits& probs) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (int t = 0; t < kTags; ++t) {
    probs[t] = std::exp(logits[t] - mx);
    sum += probs[t];
  }
  for (int t = 0; t < kTags; ++t) probs[t] /= sum;
  return -(logits[gold] - mx - std::log(sum));
}

std::vector<std::size_t> sample_indices(Rng& rng, std::size_t size,
                                        std::size_t count) {
  std::vector<std::size_t> all(size);
  std::iota(all.begin(), all.end(), 0);
  if (count >= size) return all;
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + rng.uniform_index(size - i);
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

void validate_config(const TaggerConfig& c) {
  if (c.embed_dim < 1 || c.window < 1 || c.hidden_dim < 1 || c.epochs < 1 ||
      c.batch_size < 1 || c.vocab_min_count < 1) {
    throw ConfigError("tagger dimensions, epochs and batch size must be >= 1");
  }
  if (!(c.learning_rate > 0.0)) {
    throw ConfigError("tagger learning rate must be > 0");
  }
}

nlohmann::ordered_json to_json(const TaggerConfig& c) {
  nlohmann::ordered_json j;
  j["embed_dim"] = c.embed_dim;
  j["window"] = c.window;
  j["hidden_dim"] = c.hidden_dim;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["vocab_min_count"] = c.vocab_min_count;
  return j;
}

TaggerConfig tagger_config_from_json(const nlohmann::json& j) {
  TaggerConfig c;
  try {
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    c.window = j.value("window", c.window);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.vocab_min_count = j.value("vocab_min_count", c.vocab_min_count);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid tagger config: ") + e.what());
  }
  validate_config(c);
  return c;
}

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(std::vector<std::string> tokens) {
  entries_.reserve(tokens.size() + 2);
  entries_.push_back("<unk>");
  entries_.push_back("<pad>");
  for (std::string& t : tokens) entries_.push_back(std::move(t));
  for (std::size_t i = 2; i < entries_.size(); ++i) {
    if (!lookup_.emplace(entries_[i], i).second) {
      throw DataError("duplicate vocabulary entry '" + entries_[i] + "'");
    }
  }
}

std::size_t Vocab::index(std::string_view token) const {
  auto it = lookup_.find(std::string(token));
  return it == lookup_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return lookup_.contains(std::string(token));
}

Vocab build_vocab(std::span<const Corpus> corpora, int min_count) {
  std::map<std::string, long> counts;
  for (const Corpus& c : corpora) {
    for (const Sentence& s : c.sentences) {
      for (const std::string& t : s.tokens) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, long>> kept;
  for (auto& [token, n] : counts) {
    if (n >= min_count) kept.emplace_back(token, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [token, n] : kept) tokens.push_back(std::move(token));
  return Vocab(std::move(tokens));
}

TaggerModel::TaggerModel(TaggerConfig config, Vocab vocab,
                         std::vector<ParamTensor> params)
    : config_(config), vocab_(std::move(vocab)), params_(std::move(params)) {
  validate_config(config_);
  const std::size_t v = vocab_.size();
  const std::size_t d = config_.embed_dim;
  const std::size_t h = config_.hidden_dim;
  const std::size_t in = input_dim();
  const std::vector<std::vector<std::size_t>> shapes = {
      {v, d}, {in, h}, {h}, {h, std::size_t{kTags}}, {std::size_t{kTags}}};
  if (params_.size() != shapes.size()) {
    throw DataError("tagger expects 5 parameter tensors");
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (params_[i].shape() != shapes[i]) {
      throw DataError("tensor '" + params_[i].name() +
                      "' has a shape inconsistent with the tagger config");
    }
  }
}

TaggerModel init_model(const TaggerConfig& config, const Vocab& vocab) {
  validate_config(config);
  const std::size_t d = config.embed_dim;
  const std::size_t h = config.hidden_dim;
  const std::size_t in = (2 * config.window + 1) * d;
  std::vector<ParamTensor> params;
  params.emplace_back("E", std::vector<std::size_t>{vocab.size(), d},
                      TensorRole::kEmbedding);
  params.emplace_back("W1", std::vector<std::size_t>{in, h}, TensorRole::kDense);
  params.emplace_back("b1", std::vector<std::size_t>{h}, TensorRole::kExcluded);
  params.emplace_back("W2", std::vector<std::size_t>{h, std::size_t{kTags}},
                      TensorRole::kDense);
  params.emplace_back("b2", std::vector<std::size_t>{std::size_t{kTags}},
                      TensorRole::kExcluded);
  Rng rng = Rng(config.seed).split("init");
  for (std::size_t i : {TaggerModel::kE, TaggerModel::kW1, TaggerModel::kW2}) {
    for (double& w : params[i].values()) w = rng.uniform_real(-0.1, 0.1);
  }
  return TaggerModel(config, vocab, std::move(params));
}

std::vector<Logits> forward(const TaggerModel& model, const Sentence& sentence) {
  const std::size_t span = 2 * model.config().window + 1;
  std::vector<std::size_t> ids = context_ids(model, sentence);
  std::vector<Logits> out(sentence.size());
  Activations act;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    forward_token(model,
                  std::span<const std::size_t>(ids).subspan(i * span, span),
                  act);
    out[i] = act.logits;
  }
  return out;
}

std::vector<TagSequence> predict(const TaggerModel& model,
                                 const Corpus& corpus) {
  std::vector<TagSequence> out;
  out.reserve(corpus.sentences.size());
  for (const Sentence& s : corpus.sentences) {
    TagSequence tags;
    tags.reserve(s.size());
    for (const Logits& l : forward(model, s)) {
      int best = 0;
      for (int t = 1; t < kTags; ++t) {
        if (l[t] > l[best]) best = t;
      }
      tags.push_back(*Tag::from_index(best));
    }
    out.push_back(std::move(tags));
  }
  return out;
}

Gradients zero_gradients(const TaggerModel& model) {
  Gradients g;
  for (const ParamTensor& p : model.params()) g.emplace_back(p.size(), 0.0);
  return g;
}

double accumulate_gradients(const TaggerModel& model, const Sentence& sentence,
                            double scale, Gradients* grads) {
  const std::size_t d = model.config().embed_dim;
  const std::size_t h = model.config().hidden_dim;
  const std::size_t in = model.input_dim();
  const std::size_t span = 2 * model.config().window + 1;
  auto w1 = model.param(TaggerModel::kW1).values();
  auto w2 = model.param(TaggerModel::kW2).values();

  std::vector<std::size_t> ids = context_ids(model, sentence);
  Activations act;
  Logits probs{};
  std::vector<double> dz1(h);
  std::vector<double> dx(in);
  double loss = 0.0;

  for (std::size_t i = 0; i < sentence.size(); ++i) {
    std::span<const std::size_t> window =
        std::span<const std::size_t>(ids).subspan(i * span, span);
    forward_token(model, window, act);
    const int gold = sentence.tags[i].index();
    loss += cross_entropy(act.logits, gold, probs);
    if (grads == nullptr) continue;

    Logits dz2 = probs;
    dz2[gold] -= 1.0;
    for (double& v : dz2) v *= scale;

    auto& g_w2 = (*grads)[TaggerModel::kW2];
    auto& g_b2 = (*grads)[TaggerModel::kB2];
    for (int t = 0; t < kTags; ++t) g_b2[t] += dz2[t];
    for (std::size_t j = 0; j < h; ++j) {
      double da = 0.0;
      const double* row = w2.data() + j * kTags;
      double* grow = g_w2.data() + j * kTags;
      for (int t = 0; t < kTags; ++t) {
        da += row[t] * dz2[t];
        grow[t] += act.a[j] * dz2[t];
      }
      dz1[j] = act.z1[j] > 0.0 ? da : 0.0;
    }

    auto& g_w1 = (*grads)[TaggerModel::kW1];
    auto& g_b1 = (*grads)[TaggerModel::kB1];
    for (std::size_t j = 0; j < h; ++j) g_b1[j] += dz1[j];
    for (std::size_t k = 0; k < in; ++k) {
      const double xk = act.x[k];
      const double* row = w1.data() + k * h;
      double* grow = g_w1.data() + k * h;
      double acc = 0.0;
      for (std::size_t j = 0; j < h; ++j) {
        acc += row[j] * dz1[j];
        grow[j] += xk * dz1[j];
      }
      dx[k] = acc;
    }

    auto& g_e = (*grads)[TaggerModel::kE];
    for (std::size_t k = 0; k < span; ++k) {
      double* grow = g_e.data() + window[k] * d;
      for (std::size_t c = 0; c < d; ++c) grow[c] += dx[k * d + c];
    }
  }
  return loss;
}

double mean_loss(const TaggerModel& model, std::span<const Corpus> corpora) {
  double loss = 0.0;
  std::size_t tokens = 0;
  for (const Corpus& c : corpora) {
    for (const Sentence& s : c.sentences) {
      loss += accumulate_gradients(model, s, 1.0, nullptr);
      tokens += s.size();
    }
  }
  return tokens == 0 ? 0.0 : loss / static_cast<double>(tokens);
}

long total_steps(std::span<const Corpus> corpora, const TaggerConfig& config) {
  std::size_t n = 0;
  for (const Corpus& c : corpora) n += c.sentences.size();
  const long batches =
      static_cast<long>((n + config.batch_size - 1) / config.batch_size);
  return batches * config.epochs;
}

TrainHistory train(TaggerModel& model, std::span<const Corpus> corpora,
                   const TrainOptions& options) {
  const TaggerConfig& cfg = model.config();
  const long steps = total_steps(corpora, cfg);

  std::map<long, double> events;
  if (options.schedule) {
    for (const PruneEvent& e : schedule_events(*options.schedule)) {
      events[e.step] = e.sparsity;
    }
    if (options.schedule->end_step >= steps) {
      throw ScheduleError("schedule end_step " +
                          std::to_string(options.schedule->end_step) +
                          " is beyond the last training step " +
                          std::to_string(steps - 1));
    }
  }

  std::vector<const Sentence*> order;
  for (const Corpus& c : corpora) {
    for (const Sentence& s : c.sentences) order.push_back(&s);
  }

  auto& params = model.params();
  Rng shuffle_rng = Rng(cfg.seed).split("shuffle");
  Gradients grads = zero_gradients(model);
  TrainHistory history;
  long step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<const Sentence*>(order));
    // Token-weighted, so the value does not depend on how sentences were
    // paired into minibatches.
    double epoch_loss = 0.0;
    std::size_t epoch_tokens = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += cfg.batch_size, ++step) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);

      if (auto it = events.find(step); it != events.end()) {
        compute_masks(params, it->second, options.strategy, options.mask_scope);
        apply_masks(params);
      }

      std::size_t tokens = 0;
      for (std::size_t k = begin; k < end; ++k) tokens += order[k]->size();
      for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);
      double loss = 0.0;
      if (tokens > 0) {
        const double scale = 1.0 / static_cast<double>(tokens);
        for (std::size_t k = begin; k < end; ++k) {
          loss += accumulate_gradients(model, *order[k], scale, &grads);
        }
        loss *= scale;
        for (std::size_t p = 0; p < params.size(); ++p) {
          auto values = params[p].values();
          for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] -= cfg.learning_rate * grads[p][i];
          }
        }
      }
      apply_masks(params);

      StepRecord rec;
      rec.step = step;
      rec.epoch = epoch;
      rec.loss = loss;
      rec.sparsity = measure_sparsity(params, options.strategy);
      for (const ParamTensor& p : params) {
        auto values = p.values();
        auto mask = p.mask();
        for (std::size_t i = 0; i < values.size(); ++i) {
          if (!mask[i] && values[i] != 0.0) ++rec.masked_nonzero;
        }
      }
      history.steps.push_back(rec);
      if (options.on_step) options.on_step(rec, model);
      epoch_loss += loss * static_cast<double>(tokens);
      epoch_tokens += tokens;
    }
    history.epoch_loss.push_back(
        epoch_tokens == 0 ? 0.0 : epoch_loss / static_cast<double>(epoch_tokens));
  }
  return history;
}

GradCheckResult grad_check(const TaggerModel& model, const Sentence& sentence,
                           double epsilon, const GradCheckOptions& options) {
  GradCheckResult result;
  Gradients grads = zero_gradients(model);
  const double n_tokens = static_cast<double>(sentence.size());
  const double loss =
      sentence.size() == 0
          ? 0.0
          : accumulate_gradients(model, sentence, 1.0 / n_tokens, &grads) /
                n_tokens;
  if (loss == 0.0) {
    result.skipped = true;
    return result;
  }
  if (options.corrupt) {
    for (std::size_t p = 0; p < grads.size(); ++p) {
      options.corrupt(model.params()[p].name(), grads[p]);
    }
  }

  TaggerModel probe = model;
  auto mean_loss_of = [&] {
    return accumulate_gradients(probe, sentence, 1.0, nullptr) / n_tokens;
  };

  Rng rng = Rng(options.seed).split("grad-check");
  const std::size_t d = model.config().embed_dim;
  for (std::size_t p = 0; p < probe.params().size(); ++p) {
    ParamTensor& tensor = probe.params()[p];
    std::vector<std::size_t> coords;
    if (p == TaggerModel::kE) {
      std::set<std::size_t> rows;
      for (const std::string& t : sentence.tokens) {
        rows.insert(model.vocab().index(t));
      }
      rows.insert(Vocab::kPad);
      std::vector<std::size_t> used;
      for (std::size_t r : rows) {
        for (std::size_t c = 0; c < d; ++c) used.push_back(r * d + c);
      }
      for (std::size_t k : sample_indices(rng, used.size(),
                                          options.samples_per_tensor)) {
        coords.push_back(used[k]);
      }
      // Top up with arbitrary rows (gradient zero) to reach the sample size.
      std::set<std::size_t> chosen(coords.begin(), coords.end());
      for (std::size_t k :
           sample_indices(rng, tensor.size(), options.samples_per_tensor)) {
        if (coords.size() >= options.samples_per_tensor) break;
        if (chosen.insert(k).second) coords.push_back(k);
      }
    } else {
      coords = sample_indices(rng, tensor.size(), options.samples_per_tensor);
    }

    double worst = 0.0;
    for (std::size_t i : coords) {
      double& w = tensor.values()[i];
      const double saved = w;
      w = saved + epsilon;
      const double up = mean_loss_of();
      w = saved - epsilon;
      const double down = mean_loss_of();
      w = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double analytic = grads[p][i];
      const double denom =
          std::max(std::fabs(analytic) + std::fabs(numeric), 1e-6);
      worst = std::max(worst, std::fabs(analytic - numeric) / denom);
    }
    result.per_tensor[tensor.name()] = worst;
    result.max_relative_error = std::max(result.max_relative_error, worst);
    result.coordinates += coords.size();
  }
  return result;
}

void save_model(const std::filesystem::path& dir, const TaggerModel& model,
                PruneStrategy strategy) {
  save_checkpoint(dir, model.params(), strategy);
  nlohmann::ordered_json side;
  side["config"] = to_json(model.config());
  std::vector<std::string> tagset;
  for (int t = 0; t < kTags; ++t) {
    tagset.emplace_back(Tag::from_index(t)->str());
  }
  side["tagset"] = tagset;
  std::vector<std::string> vocab;
  for (std::size_t i = 2; i < model.vocab().size(); ++i) {
    vocab.push_back(model.vocab().token(i));
  }
  side["vocab"] = vocab;
  std::ofstream out(dir / "tagger.json", std::ios::trunc);
  out << side.dump(2) << '\n';
  if (!out) throw Error("cannot write " + (dir / "tagger.json").string());
}

TaggerModel load_model(const std::filesystem::path& dir) {
  Checkpoint ckpt = load_checkpoint(dir);
  std::ifstream in(dir / "tagger.json");
  if (!in) throw DataError("missing tagger.json in " + dir.string());
  try {
    nlohmann::json side = nlohmann::json::parse(in);
    auto tagset = side.at("tagset").get<std::vector<std::string>>();
    if (tagset.size() != kTags) throw DataError("unexpected tagset size");
    for (int t = 0; t < kTags; ++t) {
      if (tagset[t] != Tag::from_index(t)->str()) {
        throw DataError("tagset order differs from O, B-PER, I-PER, ...");
      }
    }
    TaggerConfig config = tagger_config_from_json(side.at("config"));
    Vocab vocab(side.at("vocab").get<std::vector<std::string>>());
    return TaggerModel(config, std::move(vocab), std::move(ckpt.params));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad tagger.json in " + dir.string() + ": " + e.what());
  }
}

}  // namespace nerprune
