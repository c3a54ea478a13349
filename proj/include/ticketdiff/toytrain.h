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

#ifndef TICKETDIFF_TOYTRAIN_H_
#define TICKETDIFF_TOYTRAIN_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ticketdiff/certify.h"
#include "ticketdiff/checkpoint.h"
#include "ticketdiff/selection.h"

namespace ticketdiff {

inline constexpr char kEmbeddingTensor[] = "embedding";
inline constexpr char kOutputTensor[] = "output_weights";

// Single-token next-token predictor: p(. | s) = softmax(W * E[s]).
// Both matrices are [vocab_size, dim], row-major.
struct ToyModel {
  size_t vocab_size = 0;
  size_t dim = 0;
  std::vector<float> embedding;
  std::vector<float> output_weights;

  std::span<const float> EmbeddingRow(size_t token) const {
    return std::span<const float>(embedding).subspan(token * dim, dim);
  }
};

Checkpoint ToCheckpoint(const ToyModel& model);
ToyModel ModelFromCheckpoint(const Checkpoint& ckpt);

using TokenPair = std::pair<uint32_t, uint32_t>;  // (source, target)

// Deterministic source -> target mapping over a content sub-vocabulary.
// Sources are drawn with probability proportional to rank^-zipf_exponent,
// where ranks are a seeded ordering of the content tokens.
struct SyntheticTask {
  size_t vocab_size = 0;
  std::vector<uint32_t> content_tokens;  // in frequency-rank order
  std::vector<uint32_t> target_map;      // size vocab_size; identity off content
  std::vector<TokenPair> pairs;

  // Source tokens in pair order: the corpus the frequency counts refer to.
  std::vector<uint32_t> SourceCorpus() const;
};

// Content sub-vocabulary size used by GenerateTask: half the vocabulary.
size_t ContentSize(size_t vocab_size);

SyntheticTask GenerateTask(uint64_t seed, size_t vocab_size, size_t n_pairs,
                           double zipf_exponent);

// Task rebuilt from explicit pairs (target map is not recoverable and is left
// empty). Throws if an id is >= vocab_size.
SyntheticTask TaskFromPairs(size_t vocab_size, std::vector<TokenPair> pairs);

// Embedding and output weights i.i.d. uniform in [-0.1, 0.1].
ToyModel InitModel(uint64_t seed, size_t vocab_size, size_t dim);

std::vector<double> Forward(const ToyModel& model, uint32_t source_token);

enum class TrainMode { kFull, kEmbed, kPartial, kFrozenComplement };

std::string_view TrainModeName(TrainMode mode);
TrainMode ParseTrainMode(std::string_view name);

struct TrainConfig {
  TrainMode mode = TrainMode::kEmbed;
  std::optional<WinningTicketSet> tickets;  // partial / frozen_complement
  double learning_rate = 0.1;
  size_t epochs = 50;
  uint64_t seed = 0;
  size_t batch_size = 32;
};

void ValidateTrainConfig(const TrainConfig& config, size_t vocab_size);

struct TrainResult {
  ToyModel model;
  std::vector<double> loss_curve;  // mean minibatch loss per epoch
};

// Minibatch SGD on -log p(target | source). Rows and matrices outside the
// mode's trainable set are never written.
TrainResult Train(const ToyModel& model, const SyntheticTask& task,
                  const TrainConfig& config);

// Mean cross-entropy over the task's pairs.
double MeanLoss(const ToyModel& model, const SyntheticTask& task);

// Index of the largest probability; ties go to the lowest token id.
uint32_t Predict(const ToyModel& model, uint32_t source_token);

double Evaluate(const ToyModel& model, const SyntheticTask& task);

// One record per pair; examples are groups of 20 consecutive pairs.
inline constexpr size_t kPairsPerExample = 20;
std::vector<PredictionRecord> EmitPredictionLog(const ToyModel& tuned,
                                                const ToyModel& partial,
                                                const ToyModel& base,
                                                const SyntheticTask& task);

// Analytic gradient of the mean loss over `pairs` w.r.t. the embedding.
std::vector<double> EmbeddingGradient(const ToyModel& model,
                                      std::span<const TokenPair> pairs);

// Central difference of the same loss for one embedding entry.
double FiniteDifferenceGradient(const ToyModel& model,
                                std::span<const TokenPair> pairs, size_t row,
                                size_t col, double epsilon);

struct GradCheckOptions {
  double epsilon = 1e-4;
  size_t entries = 64;
  size_t max_pairs = 64;
  uint64_t seed = 0;
};

// max |g - g_fd| / max(1e-8, |g| + |g_fd|) over sampled embedding entries.
double GradCheck(const ToyModel& model, const SyntheticTask& task,
                 const GradCheckOptions& options = {});

}  // namespace ticketdiff

#endif  // TICKETDIFF_TOYTRAIN_H_
