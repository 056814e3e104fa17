// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "nerprune/tagger.h"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "nerprune/checkpoint.h"
#include "nerprune/errors.h"
#include "nerprune/eval.h"
#include "support/synthetic.h"

namespace nerprune {
namespace {

Corpus toy_corpus() {
  return parse_iob2_string(
      "Ada\tB-PER\nlives\tO\nin\tO\nLima\tB-LOC\n.\tO\n\n"
      "Bo\tB-PER\nKim\tI-PER\nworks\tO\nat\tO\nAcme\tB-ORG\n\n"
      "Acme\tB-ORG\nBank\tI-ORG\nis\tO\nin\tO\nPeru\tB-LOC\n\n"
      "the\tO\nman\tO\nfrom\tO\nOslo\tB-LOC\n\n"
      "Kim\tB-PER\nsaw\tO\nBo\tB-PER\n\n"
      "Lima\tB-LOC\nis\tO\nbig\tO\n\n"
      "she\tO\njoined\tO\nGlobex\tB-ORG\nCorp\tI-ORG\n\n"
      "Ada\tB-PER\nLovelace\tI-PER\nwrote\tO\n\n"
      "in\tO\nNew\tB-LOC\nYork\tI-LOC\n\n"
      "Globex\tB-ORG\nhired\tO\nAda\tB-PER\n",
      "xx", Split::kTrain);
}

TaggerConfig overfit_config() {
  TaggerConfig c;
  c.embed_dim = 8;
  c.window = 1;
  c.hidden_dim = 16;
  c.learning_rate = 0.2;
  c.epochs = 150;
  c.batch_size = 2;
  c.seed = 3;
  return c;
}

TEST(ConfigTest, ValidationAndJson) {
  TaggerConfig c;
  EXPECT_EQ(c.learning_rate, 7e-5);
  EXPECT_EQ(c.epochs, 60);
  EXPECT_NO_THROW(validate_config(c));
  c.window = 0;
  EXPECT_THROW(validate_config(c), ConfigError);
  c = TaggerConfig{};
  c.learning_rate = 0.0;
  EXPECT_THROW(validate_config(c), ConfigError);
  c = TaggerConfig{};
  c.hidden_dim = 0;
  EXPECT_THROW(validate_config(c), ConfigError);

  TaggerConfig d = overfit_config();
  TaggerConfig back = tagger_config_from_json(nlohmann::json::parse(to_json(d).dump()));
  EXPECT_EQ(to_json(back), to_json(d));
  EXPECT_EQ(tagger_config_from_json(nlohmann::json::object()).embed_dim, 32);
}

TEST(VocabTest, MinCountAndReserved) {
  std::vector<Corpus> cs = {parse_iob2_string("a\tO\na\tO\nb\tO\n", "xx", Split::kTrain)};
  Vocab v = build_vocab(cs, 2);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v.token(Vocab::kUnk), "<unk>");
  EXPECT_EQ(v.token(Vocab::kPad), "<pad>");
  EXPECT_EQ(v.token(2), "a");
  EXPECT_EQ(v.index("b"), Vocab::kUnk);
  EXPECT_FALSE(v.contains("b"));
}

TEST(VocabTest, EmptyCorpusAndDeterminism) {
  std::vector<Corpus> none;
  EXPECT_EQ(build_vocab(none, 1).size(), 2u);
  std::vector<Corpus> cs = {toy_corpus()};
  EXPECT_EQ(build_vocab(cs, 1), build_vocab(cs, 1));
}

TEST(VocabTest, FrequencyThenLexicographic) {
  std::vector<Corpus> cs = {
      parse_iob2_string("c\tO\nb\tO\nb\tO\na\tO\nc\tO\nd\tO\n", "xx", Split::kTrain)};
  Vocab v = build_vocab(cs, 1);
  EXPECT_EQ(v.token(2), "b");
  EXPECT_EQ(v.token(3), "c");
  EXPECT_EQ(v.token(4), "a");
  EXPECT_EQ(v.token(5), "d");
}

TEST(InitTest, DeterministicBoundedAndUnmasked) {
  std::vector<Corpus> cs = {toy_corpus()};
  Vocab v = build_vocab(cs, 1);
  TaggerConfig c = overfit_config();
  TaggerModel a = init_model(c, v);
  TaggerModel b = init_model(c, v);
  for (std::size_t p = 0; p < a.params().size(); ++p) {
    auto av = a.params()[p].values();
    auto bv = b.params()[p].values();
    ASSERT_TRUE(std::equal(av.begin(), av.end(), bv.begin()));
    for (double w : av) {
      ASSERT_GE(w, -0.1);
      ASSERT_LE(w, 0.1);
    }
  }
  for (double w : a.param(TaggerModel::kB1).values()) EXPECT_EQ(w, 0.0);
  for (double w : a.param(TaggerModel::kB2).values()) EXPECT_EQ(w, 0.0);
  EXPECT_EQ(measure_sparsity(a.params(), PruneStrategy::kInclEmbeddings), 0.0);

  c.seed = 4;
  TaggerModel other = init_model(c, v);
  auto ae = a.param(TaggerModel::kE).values();
  auto oe = other.param(TaggerModel::kE).values();
  EXPECT_FALSE(std::equal(ae.begin(), ae.end(), oe.begin()));
}

TEST(InitTest, ShapesAndRoles) {
  std::vector<Corpus> cs = {toy_corpus()};
  Vocab v = build_vocab(cs, 1);
  TaggerConfig c;
  TaggerModel m = init_model(c, v);
  EXPECT_EQ(m.param(TaggerModel::kE).shape(),
            (std::vector<std::size_t>{v.size(), 32}));
  EXPECT_EQ(m.param(TaggerModel::kW1).shape(),
            (std::vector<std::size_t>{5 * 32, 64}));
  EXPECT_EQ(m.param(TaggerModel::kW2).shape(), (std::vector<std::size_t>{64, 7}));
  EXPECT_EQ(m.param(TaggerModel::kE).role(), TensorRole::kEmbedding);
  EXPECT_EQ(m.param(TaggerModel::kW2).role(), TensorRole::kDense);
  EXPECT_EQ(m.param(TaggerModel::kB1).role(), TensorRole::kExcluded);
}

TEST(ForwardTest, EmptySentenceAndZeroHead) {
  std::vector<Corpus> cs = {toy_corpus()};
  TaggerModel m = init_model(overfit_config(), build_vocab(cs, 1));
  EXPECT_TRUE(forward(m, Sentence{}).empty());
  for (double& w : m.param(TaggerModel::kW2).values()) w = 0.0;
  for (const Logits& l : forward(m, cs[0].sentences[0])) {
    for (double v : l) EXPECT_EQ(v, 0.0);
  }
}

TEST(ForwardTest, HandComputedOneToken) {
  TaggerConfig c;
  c.embed_dim = 1;
  c.window = 1;
  c.hidden_dim = 1;
  Vocab v({"a"});
  TaggerModel m = init_model(c, v);
  auto e = m.param(TaggerModel::kE).values();
  e[Vocab::kUnk] = 5.0;
  e[Vocab::kPad] = 0.2;
  e[2] = 1.0;
  auto w1 = m.param(TaggerModel::kW1).values();
  w1[0] = 1.0;
  w1[1] = 2.0;
  w1[2] = 3.0;
  m.param(TaggerModel::kB1).values()[0] = 0.5;
  auto w2 = m.param(TaggerModel::kW2).values();
  for (int t = 0; t < 7; ++t) w2[t] = t - 3.0;
  m.param(TaggerModel::kB2).values()[6] = 0.25;

  Sentence s;
  s.tokens = {"a"};
  s.tags = {Tag::outside()};
  // x = [pad, a, pad] = [0.2, 1, 0.2]; z = 0.2 + 2 + 0.6 + 0.5 = 3.3.
  auto logits = forward(m, s);
  ASSERT_EQ(logits.size(), 1u);
  for (int t = 0; t < 6; ++t) EXPECT_NEAR(logits[0][t], 3.3 * (t - 3.0), 1e-12);
  EXPECT_NEAR(logits[0][6], 3.3 * 3.0 + 0.25, 1e-12);

  // Unknown token uses the UNK row: z = 0.2 + 10 + 0.6 + 0.5 = 11.3.
  s.tokens = {"zzz"};
  EXPECT_NEAR(forward(m, s)[0][1], 11.3 * -2.0, 1e-12);

  // Negative pre-activation is clipped by the ReLU.
  m.param(TaggerModel::kB1).values()[0] = -10.0;
  s.tokens = {"a"};
  EXPECT_NEAR(forward(m, s)[0][6], 0.25, 1e-12);
}

TEST(PredictTest, TiesGoToLowestIndex) {
  std::vector<Corpus> cs = {toy_corpus()};
  TaggerModel m = init_model(overfit_config(), build_vocab(cs, 1));
  for (double& w : m.param(TaggerModel::kW2).values()) w = 0.0;
  auto pred = predict(m, cs[0]);
  for (const auto& seq : pred) {
    for (Tag t : seq) EXPECT_EQ(t, Tag::outside());
  }
  auto b2 = m.param(TaggerModel::kB2).values();
  b2[3] = 1.0;
  b2[5] = 1.0;
  EXPECT_EQ(predict(m, cs[0])[0][0], Tag::begin(EntityType::kLoc));
  EXPECT_TRUE(predict(m, Corpus{}).empty());
}

TEST(GradCheckTest, AnalyticMatchesNumeric) {
  Rng rng(31);
  std::vector<Corpus> cs = {toy_corpus()};
  Vocab v = build_vocab(cs, 1);
  for (int i = 0; i < 5; ++i) {
    TaggerConfig c = overfit_config();
    c.seed = 100 + i;
    TaggerModel m = init_model(c, v);
    for (double& b : m.param(TaggerModel::kB1).values()) {
      b = rng.uniform_real(-0.1, 0.1);
    }
    const Sentence& s = cs[0].sentences[i];
    GradCheckResult r = grad_check(m, s, 1e-5, {.seed = static_cast<std::uint64_t>(i)});
    EXPECT_FALSE(r.skipped);
    EXPECT_LT(r.max_relative_error, 1e-4);
    EXPECT_EQ(r.per_tensor.size(), 5u);
    EXPECT_GE(r.coordinates, 5u * 7u);
  }
}

TEST(GradCheckTest, DetectsCorruptedGradient) {
  std::vector<Corpus> cs = {toy_corpus()};
  TaggerModel m = init_model(overfit_config(), build_vocab(cs, 1));
  GradCheckOptions opts;
  opts.corrupt = [](std::string_view name, std::span<double> g) {
    if (name == "W1") {
      for (double& v : g) v = v * 1.5 + 1e-3;
    }
  };
  GradCheckResult r = grad_check(m, cs[0].sentences[0], 1e-5, opts);
  EXPECT_GT(r.per_tensor.at("W1"), 1e-2);
  EXPECT_GT(r.max_relative_error, 1e-2);
  EXPECT_LT(r.per_tensor.at("W2"), 1e-4);
}

TEST(GradCheckTest, ZeroLossIsSkipped) {
  std::vector<Corpus> cs = {toy_corpus()};
  TaggerModel m = init_model(overfit_config(), build_vocab(cs, 1));
  EXPECT_TRUE(grad_check(m, Sentence{}, 1e-5).skipped);
}

TEST(TrainTest, OverfitsSmallCorpus) {
  std::vector<Corpus> cs = {toy_corpus()};
  TaggerModel m = init_model(overfit_config(), build_vocab(cs, 1));
  TrainHistory h = train(m, cs);
  EXPECT_EQ(static_cast<long>(h.steps.size()), total_steps(cs, m.config()));
  EXPECT_EQ(h.epoch_loss.size(), 150u);
  EXPECT_EQ(h.steps.back().sparsity, 0.0);

  ScoreReport r = score_corpus(cs[0], predict(m, cs[0]));
  EXPECT_DOUBLE_EQ(r.f1, 1.0);

  int upticks = 0;
  for (std::size_t e = 1; e < h.epoch_loss.size(); ++e) {
    if (h.epoch_loss[e] > h.epoch_loss[e - 1]) ++upticks;
  }
  EXPECT_LE(upticks, static_cast<int>(0.05 * (h.epoch_loss.size() - 1)));
}

TEST(TrainTest, Deterministic) {
  std::vector<Corpus> cs = {toy_corpus()};
  TaggerConfig c = overfit_config();
  c.epochs = 10;
  TaggerModel a = init_model(c, build_vocab(cs, 1));
  TaggerModel b = init_model(c, build_vocab(cs, 1));
  TrainOptions opts;
  opts.schedule = PruneSchedule{5, 20, 5, 0.7};
  train(a, cs, opts);
  train(b, cs, opts);
  for (std::size_t p = 0; p < a.params().size(); ++p) {
    auto av = a.params()[p].values();
    auto bv = b.params()[p].values();
    ASSERT_TRUE(std::equal(av.begin(), av.end(), bv.begin()));
  }
}

TEST(TrainTest, PartialScheduleHitsTargetAndSparesEmbeddings) {
  std::vector<Corpus> cs = {toy_corpus()};
  TaggerConfig c = overfit_config();
  c.epochs = 20;
  TaggerModel m = init_model(c, build_vocab(cs, 1));
  TrainOptions opts;
  opts.schedule = PruneSchedule{10, 60, 10, 0.5};
  std::size_t snapshots = 0;
  opts.on_step = [&](const StepRecord& rec, const TaggerModel& model) {
    ++snapshots;
    EXPECT_EQ(rec.masked_nonzero, 0u);
    EXPECT_EQ(model.param(TaggerModel::kE).masked_count(), 0u);
  };
  TrainHistory h = train(m, cs, opts);
  EXPECT_EQ(snapshots, h.steps.size());
  const std::size_t n = prunable_count(m.params(), PruneStrategy::kPartial);
  EXPECT_LE(std::fabs(measure_sparsity(m.params(), PruneStrategy::kPartial) - 0.5),
            1.0 / n);
  // The cubic ramp is still 0 at the first event, so masking starts at 20.
  EXPECT_EQ(h.steps[19].sparsity, 0.0);
  EXPECT_GT(h.steps[20].sparsity, 0.0);
  for (std::size_t i = 1; i < h.steps.size(); ++i) {
    EXPECT_GE(h.steps[i].sparsity, h.steps[i - 1].sparsity);
  }
}

TEST(TrainTest, ScheduleBeyondLastStepIsRejected) {
  std::vector<Corpus> cs = {toy_corpus()};
  TaggerConfig c = overfit_config();
  c.epochs = 2;  // 10 steps
  TaggerModel m = init_model(c, build_vocab(cs, 1));
  TrainOptions opts;
  opts.schedule = PruneSchedule{0, 10, 5, 0.5};
  EXPECT_THROW(train(m, cs, opts), ScheduleError);
  opts.schedule = PruneSchedule{0, 9, 3, 0.5};
  EXPECT_NO_THROW(train(m, cs, opts));
}

TEST(ModelIoTest, SaveLoadRoundTrip) {
  std::vector<Corpus> cs = {toy_corpus()};
  TaggerConfig c = overfit_config();
  c.epochs = 3;
  TaggerModel m = init_model(c, build_vocab(cs, 1));
  TrainOptions opts;
  opts.schedule = PruneSchedule{0, 10, 5, 0.8};
  opts.strategy = PruneStrategy::kInclEmbeddings;
  train(m, cs, opts);
  auto dir = std::filesystem::temp_directory_path() / "nerprune_model_io";
  std::filesystem::remove_all(dir);
  save_model(dir, m, PruneStrategy::kInclEmbeddings);
  TaggerModel back = load_model(dir);
  EXPECT_EQ(back.vocab(), m.vocab());
  EXPECT_EQ(to_json(back.config()), to_json(m.config()));
  EXPECT_EQ(predict(back, cs[0]), predict(m, cs[0]));
  Checkpoint ck = load_checkpoint(dir);
  for (const ParamTensor& p : ck.params) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!p.mask()[i]) ASSERT_EQ(p.values()[i], 0.0);
    }
  }
}

}  // namespace
}  // namespace nerprune
