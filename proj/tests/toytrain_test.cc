//
// Copyright 2026 The ticketdiff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "ticketdiff/toytrain.h"

#include <cmath>
#include <cstring>
#include <map>

#include "gtest/gtest.h"

namespace ticketdiff {
namespace {

bool BitEqual(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

bool RowBitEqual(const ToyModel& a, const ToyModel& b, size_t row) {
  return std::memcmp(a.EmbeddingRow(row).data(), b.EmbeddingRow(row).data(),
                     a.dim * sizeof(float)) == 0;
}

WinningTicketSet Tickets(size_t vocab, std::vector<size_t> ids) {
  WinningTicketSet t;
  t.vocab_size = vocab;
  t.token_ids = std::move(ids);
  return t;
}

TEST(GenerateTask, DeterministicAndConsistent) {
  const auto a = GenerateTask(7, 32, 500, 1.0);
  const auto b = GenerateTask(7, 32, 500, 1.0);
  EXPECT_EQ(a.pairs, b.pairs);
  EXPECT_NE(GenerateTask(8, 32, 500, 1.0).pairs, a.pairs);
  EXPECT_EQ(a.content_tokens.size(), 16u);
  for (const auto& [s, t] : a.pairs) {
    EXPECT_EQ(t, a.target_map[s]);
    EXPECT_NE(std::find(a.content_tokens.begin(), a.content_tokens.end(), s),
              a.content_tokens.end());
  }
  // The target map permutes the content tokens.
  std::vector<uint32_t> image;
  for (uint32_t c : a.content_tokens) image.push_back(a.target_map[c]);
  std::vector<uint32_t> sorted_content = a.content_tokens;
  std::sort(image.begin(), image.end());
  std::sort(sorted_content.begin(), sorted_content.end());
  EXPECT_EQ(image, sorted_content);
}

TEST(GenerateTask, UniformWhenExponentIsZero) {
  const auto task = GenerateTask(3, 64, 32000, 0.0);
  std::map<uint32_t, double> counts;
  for (const auto& p : task.pairs) counts[p.first] += 1.0;
  const double expected = 32000.0 / 32.0;
  double chi2 = 0.0;
  for (uint32_t c : task.content_tokens) {
    chi2 += std::pow(counts[c] - expected, 2) / expected;
  }
  // 31 degrees of freedom; 0.999 quantile is about 61.1.
  EXPECT_LT(chi2, 61.1);
}

TEST(GenerateTask, ZipfFavoursLowRanks) {
  const auto task = GenerateTask(3, 64, 20000, 1.0);
  std::map<uint32_t, size_t> counts;
  for (const auto& p : task.pairs) ++counts[p.first];
  EXPECT_GT(counts[task.content_tokens[0]], 5 * counts[task.content_tokens[20]]);
}

TEST(GenerateTask, SinglePairAndErrors) {
  const auto task = GenerateTask(1, 8, 1, 1.0);
  ASSERT_EQ(task.pairs.size(), 1u);
  EXPECT_EQ(task.pairs[0].second, task.target_map[task.pairs[0].first]);
  EXPECT_THROW(GenerateTask(1, 3, 10, 1.0), std::invalid_argument);
  EXPECT_THROW(GenerateTask(1, 8, 0, 1.0), std::invalid_argument);
  EXPECT_THROW(GenerateTask(1, 8, 1, -1.0), std::invalid_argument);
  EXPECT_THROW(TaskFromPairs(4, {{0, 4}}), std::invalid_argument);
}

TEST(InitModel, SeededUniform) {
  const auto a = InitModel(5, 16, 8);
  EXPECT_TRUE(BitEqual(a.embedding, InitModel(5, 16, 8).embedding));
  EXPECT_TRUE(BitEqual(a.output_weights, InitModel(5, 16, 8).output_weights));
  EXPECT_FALSE(BitEqual(a.embedding, InitModel(6, 16, 8).embedding));
  for (float v : a.embedding) {
    EXPECT_GE(v, -0.1f);
    EXPECT_LE(v, 0.1f);
  }
  const auto tiny = InitModel(1, 4, 1);
  EXPECT_EQ(tiny.embedding.size(), 4u);
  EXPECT_THROW(InitModel(1, 0, 4), std::invalid_argument);
}

TEST(Checkpointing, RoundTrip) {
  const auto m = InitModel(2, 8, 4);
  const auto ck = ToCheckpoint(m);
  EXPECT_NE(ck.Find(kEmbeddingTensor), nullptr);
  EXPECT_NE(ck.Find(kOutputTensor), nullptr);
  const auto back = ModelFromCheckpoint(ck);
  EXPECT_TRUE(BitEqual(back.embedding, m.embedding));
  EXPECT_TRUE(BitEqual(back.output_weights, m.output_weights));
  Checkpoint missing;
  missing.tensors.push_back(ck.tensors[0]);
  EXPECT_THROW(ModelFromCheckpoint(missing), CheckpointError);
}

TEST(Forward, SoftmaxProperties) {
  auto m = InitModel(3, 32, 8);
  std::fill(m.embedding.begin(), m.embedding.begin() + 8, 0.0f);
  for (double p : Forward(m, 0)) EXPECT_NEAR(p, 1.0 / 32.0, 1e-12);
  for (uint32_t s = 0; s < 32; ++s) {
    const auto probs = Forward(m, s);
    double total = 0.0;
    for (double p : probs) total += p;
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
  EXPECT_THROW(Forward(m, 32), std::invalid_argument);
}

TEST(Forward, ArgmaxInvariantUnderLogitShift) {
  // Appending a constant coordinate to every row adds the same amount to each
  // logit.
  const auto m = InitModel(4, 16, 6);
  ToyModel shifted = m;
  shifted.dim = 7;
  shifted.embedding.clear();
  shifted.output_weights.clear();
  for (size_t r = 0; r < 16; ++r) {
    for (size_t j = 0; j < 6; ++j) {
      shifted.embedding.push_back(m.embedding[r * 6 + j]);
      shifted.output_weights.push_back(m.output_weights[r * 6 + j]);
    }
    shifted.embedding.push_back(1.0f);
    shifted.output_weights.push_back(3.0f);
  }
  for (uint32_t s = 0; s < 16; ++s) {
    EXPECT_EQ(Predict(m, s), Predict(shifted, s));
    const auto a = Forward(m, s);
    const auto b = Forward(shifted, s);
    for (size_t c = 0; c < 16; ++c) EXPECT_NEAR(a[c], b[c], 1e-6);
  }
}

class TrainTest : public ::testing::Test {
 protected:
  TrainTest()
      : task_(GenerateTask(11, 32, 600, 1.0)), base_(InitModel(12, 32, 16)) {}

  TrainConfig Config(TrainMode mode) const {
    TrainConfig c;
    c.mode = mode;
    c.learning_rate = 0.5;
    c.epochs = 20;
    c.seed = 9;
    c.batch_size = 16;
    if (mode == TrainMode::kPartial || mode == TrainMode::kFrozenComplement) {
      std::vector<size_t> ids(task_.content_tokens.begin(),
                              task_.content_tokens.begin() + 5);
      std::sort(ids.begin(), ids.end());
      c.tickets = Tickets(32, ids);
    }
    return c;
  }

  SyntheticTask task_;
  ToyModel base_;
};

TEST_F(TrainTest, MasksAreExact) {
  for (TrainMode mode : {TrainMode::kFull, TrainMode::kEmbed, TrainMode::kPartial,
                         TrainMode::kFrozenComplement}) {
    const auto config = Config(mode);
    const auto out = Train(base_, task_, config).model;
    EXPECT_EQ(BitEqual(out.output_weights, base_.output_weights),
              mode != TrainMode::kFull)
        << TrainModeName(mode);
    size_t changed = 0;
    for (size_t r = 0; r < 32; ++r) {
      const bool same = RowBitEqual(out, base_, r);
      changed += !same;
      if (mode == TrainMode::kPartial && !config.tickets->Contains(r)) {
        EXPECT_TRUE(same) << r;
      }
      if (mode == TrainMode::kFrozenComplement && config.tickets->Contains(r)) {
        EXPECT_TRUE(same) << r;
      }
    }
    EXPECT_GT(changed, 0u) << TrainModeName(mode);
  }
}

TEST_F(TrainTest, DeterministicForFixedSeed) {
  for (TrainMode mode : {TrainMode::kFull, TrainMode::kPartial}) {
    const auto a = Train(base_, task_, Config(mode));
    const auto b = Train(base_, task_, Config(mode));
    EXPECT_EQ(SerializeCheckpoint(ToCheckpoint(a.model)),
              SerializeCheckpoint(ToCheckpoint(b.model)));
    EXPECT_EQ(a.loss_curve, b.loss_curve);
  }
  auto other = Config(TrainMode::kEmbed);
  other.seed = 10;
  EXPECT_FALSE(BitEqual(Train(base_, task_, Config(TrainMode::kEmbed)).model.embedding,
                        Train(base_, task_, other).model.embedding));
}

TEST_F(TrainTest, LossFalls) {
  auto config = Config(TrainMode::kEmbed);
  config.learning_rate = 0.1;
  config.epochs = 20;
  const auto result = Train(base_, task_, config);
  ASSERT_EQ(result.loss_curve.size(), 20u);
  EXPECT_LT(result.loss_curve.back(), result.loss_curve.front());
  EXPECT_LT(MeanLoss(result.model, task_), MeanLoss(base_, task_));
}

TEST_F(TrainTest, PartialMatchesEmbedOnTicketRows) {
  // Each embedding row's update depends only on that row and the frozen output
  // weights, so restricting the trainable rows does not change the others.
  const auto embed = Train(base_, task_, Config(TrainMode::kEmbed)).model;
  const auto cfg = Config(TrainMode::kPartial);
  const auto partial = Train(base_, task_, cfg).model;
  for (size_t r : cfg.tickets->token_ids) EXPECT_TRUE(RowBitEqual(embed, partial, r));
}

TEST_F(TrainTest, ConfigValidation) {
  auto c = Config(TrainMode::kPartial);
  c.tickets.reset();
  EXPECT_THROW(Train(base_, task_, c), std::invalid_argument);
  c = Config(TrainMode::kEmbed);
  c.learning_rate = 0.0;
  EXPECT_THROW(Train(base_, task_, c), std::invalid_argument);
  c = Config(TrainMode::kEmbed);
  c.batch_size = 0;
  EXPECT_THROW(Train(base_, task_, c), std::invalid_argument);
  c = Config(TrainMode::kPartial);
  c.tickets->vocab_size = 31;
  EXPECT_THROW(Train(base_, task_, c), std::invalid_argument);
  EXPECT_THROW(Train(InitModel(1, 16, 4), task_, Config(TrainMode::kEmbed)),
               std::invalid_argument);
  EXPECT_EQ(ParseTrainMode("frozen_complement"), TrainMode::kFrozenComplement);
  EXPECT_THROW(ParseTrainMode("lora"), std::invalid_argument);
}

TEST(Evaluate, ChanceAndPerfect) {
  const auto task = GenerateTask(21, 64, 2000, 1.0);
  const auto base = InitModel(22, 64, 16);
  const double chance = Evaluate(base, task);
  EXPECT_LT(chance, 0.2);
  EXPECT_EQ(chance, Evaluate(base, task));

  TrainConfig c;
  c.learning_rate = 2.0;
  c.epochs = 60;
  c.batch_size = 32;
  const auto trained = Train(base, task, c).model;
  EXPECT_EQ(Evaluate(trained, task), 1.0);
}

TEST(Predict, TiesGoToLowestId) {
  auto m = InitModel(1, 8, 2);
  std::fill(m.embedding.begin(), m.embedding.end(), 0.0f);
  EXPECT_EQ(Predict(m, 5), 0u);
}

TEST(PredictionLog, Records) {
  const auto task = GenerateTask(31, 16, 45, 1.0);
  const auto base = InitModel(32, 16, 8);
  TrainConfig c;
  c.epochs = 5;
  const auto tuned = Train(base, task, c).model;
  const auto log = EmitPredictionLog(tuned, tuned, base, task);
  ASSERT_EQ(log.size(), task.pairs.size());
  for (size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    EXPECT_EQ(r.tuned_prediction, *r.partial_prediction);
    EXPECT_GE(r.p1, r.p2);
    EXPECT_GE(*r.base_p1, *r.base_p2);
    EXPECT_EQ(r.reference_token, task.pairs[i].second);
    EXPECT_EQ(r.example_id, static_cast<int64_t>(i / 20));
    EXPECT_EQ(r.position, static_cast<int64_t>(i % 20));
    EXPECT_NO_THROW(ValidateRecord(r));
  }
  EXPECT_THROW(EmitPredictionLog(tuned, InitModel(1, 16, 4), base, task),
               std::invalid_argument);
}

TEST(GradCheck, MatchesFiniteDifferences) {
  for (uint64_t seed : {1u, 2u, 3u}) {
    const auto task = GenerateTask(seed, 16, 40, 1.0);
    const auto model = InitModel(seed + 10, 16, 8);
    GradCheckOptions opts;
    opts.seed = seed;
    const double err = GradCheck(model, task, opts);
    EXPECT_LT(err, 1e-3);
    EXPECT_EQ(err, GradCheck(model, task, opts));
  }
}

TEST(GradCheck, UntouchedRowsHaveZeroGradient) {
  const auto task = TaskFromPairs(16, {{1, 2}, {3, 4}, {1, 2}});
  const auto model = InitModel(5, 16, 8);
  const auto grad = EmbeddingGradient(model, task.pairs);
  for (size_t col = 0; col < 8; ++col) {
    EXPECT_EQ(grad[7 * 8 + col], 0.0);
    EXPECT_NEAR(FiniteDifferenceGradient(model, task.pairs, 7, col, 1e-4), 0.0,
                1e-5);
  }
  EXPECT_THROW(FiniteDifferenceGradient(model, task.pairs, 16, 0, 1e-4),
               std::invalid_argument);
  EXPECT_THROW(FiniteDifferenceGradient(model, task.pairs, 0, 0, 0.0),
               std::invalid_argument);
}

}  // namespace
}  // namespace ticketdiff
