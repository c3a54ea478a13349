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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ticketdiff/random.h"

namespace ticketdiff {
namespace {

void CheckToken(uint32_t token, size_t vocab_size) {
  if (token >= vocab_size) {
    throw std::invalid_argument("token " + std::to_string(token) +
                                " out of range for vocab size " +
                                std::to_string(vocab_size));
  }
}

// Softmax of W * e into `probs`; returns log-sum-exp of the logits.
template <typename T>
double SoftmaxRow(std::span<const T> weights, std::span<const T> e,
                  size_t vocab_size, size_t dim, std::vector<double>& probs) {
  probs.resize(vocab_size);
  double max_logit = -INFINITY;
  for (size_t c = 0; c < vocab_size; ++c) {
    const T* w = weights.data() + c * dim;
    double z = 0.0;
    for (size_t j = 0; j < dim; ++j) {
      z += static_cast<double>(w[j]) * static_cast<double>(e[j]);
    }
    probs[c] = z;
    max_logit = std::max(max_logit, z);
  }
  double total = 0.0;
  for (double& p : probs) {
    p = std::exp(p - max_logit);
    total += p;
  }
  for (double& p : probs) p /= total;
  return max_logit + std::log(total);
}

// Summed cross-entropy over `pairs`; accumulates gradients into the optional
// outputs (both [vocab_size, dim]).
template <typename T>
double LossAndGradient(std::span<const T> embedding, std::span<const T> weights,
                       size_t vocab_size, size_t dim,
                       std::span<const TokenPair> pairs, double* grad_embedding,
                       double* grad_weights) {
  std::vector<double> probs;
  double loss = 0.0;
  for (const auto& [source, target] : pairs) {
    const auto e = embedding.subspan(source * dim, dim);
    SoftmaxRow(weights, e, vocab_size, dim, probs);
    loss -= std::log(std::max(probs[target], 1e-300));
    probs[target] -= 1.0;  // now dL/dlogits
    if (grad_embedding != nullptr) {
      double* ge = grad_embedding + source * dim;
      for (size_t c = 0; c < vocab_size; ++c) {
        const double delta = probs[c];
        const T* w = weights.data() + c * dim;
        for (size_t j = 0; j < dim; ++j) ge[j] += delta * static_cast<double>(w[j]);
      }
    }
    if (grad_weights != nullptr) {
      for (size_t c = 0; c < vocab_size; ++c) {
        const double delta = probs[c];
        double* gw = grad_weights + c * dim;
        for (size_t j = 0; j < dim; ++j) gw[j] += delta * static_cast<double>(e[j]);
      }
    }
  }
  return loss;
}

std::span<const TokenPair> CheckedPairs(const SyntheticTask& task,
                                        size_t max_pairs) {
  std::span<const TokenPair> pairs(task.pairs);
  return pairs.first(std::min(max_pairs, pairs.size()));
}

void CheckModel(const ToyModel& model) {
  const size_t n = model.vocab_size * model.dim;
  if (model.vocab_size == 0 || model.dim == 0 || model.embedding.size() != n ||
      model.output_weights.size() != n) {
    throw std::invalid_argument("malformed toy model");
  }
}

void CheckTaskFits(const ToyModel& model, const SyntheticTask& task) {
  CheckModel(model);
  if (task.vocab_size != model.vocab_size) {
    throw std::invalid_argument("task vocab size " +
                                std::to_string(task.vocab_size) +
                                " does not match model vocab size " +
                                std::to_string(model.vocab_size));
  }
}

std::pair<double, double> TopTwo(std::span<const double> probs) {
  double first = -1.0;
  double second = -1.0;
  for (double p : probs) {
    if (p > first) {
      second = first;
      first = p;
    } else if (p > second) {
      second = p;
    }
  }
  return {first, std::max(second, 0.0)};
}

uint32_t ArgMax(std::span<const double> probs) {
  return static_cast<uint32_t>(std::max_element(probs.begin(), probs.end()) -
                               probs.begin());
}

}  // namespace

Checkpoint ToCheckpoint(const ToyModel& model) {
  CheckModel(model);
  Checkpoint ckpt;
  ckpt.tensors.push_back(
      {kEmbeddingTensor, {model.vocab_size, model.dim}, model.embedding});
  ckpt.tensors.push_back(
      {kOutputTensor, {model.vocab_size, model.dim}, model.output_weights});
  return ckpt;
}

ToyModel ModelFromCheckpoint(const Checkpoint& ckpt) {
  const auto [vocab, dim] = ValidatePair(ckpt, ckpt, kEmbeddingTensor);
  const auto out_view = GetEmbedding(ckpt, kOutputTensor);
  if (out_view.vocab_size() != vocab || out_view.dim() != dim) {
    throw CheckpointError("output_weights shape does not match embedding");
  }
  ToyModel model;
  model.vocab_size = vocab;
  model.dim = dim;
  model.embedding = ckpt.Find(kEmbeddingTensor)->data;
  model.output_weights = ckpt.Find(kOutputTensor)->data;
  return model;
}

std::vector<uint32_t> SyntheticTask::SourceCorpus() const {
  std::vector<uint32_t> corpus;
  corpus.reserve(pairs.size());
  for (const auto& p : pairs) corpus.push_back(p.first);
  return corpus;
}

size_t ContentSize(size_t vocab_size) { return vocab_size / 2; }

SyntheticTask GenerateTask(uint64_t seed, size_t vocab_size, size_t n_pairs,
                           double zipf_exponent) {
  if (vocab_size < 4) throw std::invalid_argument("vocab size must be >= 4");
  if (n_pairs == 0) throw std::invalid_argument("n_pairs must be >= 1");
  if (!(zipf_exponent >= 0.0) || !std::isfinite(zipf_exponent)) {
    throw std::invalid_argument("zipf exponent must be finite and >= 0");
  }
  Rng rng(seed);
  SyntheticTask task;
  task.vocab_size = vocab_size;

  std::vector<uint32_t> all(vocab_size);
  std::iota(all.begin(), all.end(), 0u);
  rng.Shuffle(std::span<uint32_t>(all));
  task.content_tokens.assign(all.begin(),
                             all.begin() + static_cast<long>(ContentSize(vocab_size)));

  std::vector<uint32_t> image = task.content_tokens;
  rng.Shuffle(std::span<uint32_t>(image));
  task.target_map.resize(vocab_size);
  std::iota(task.target_map.begin(), task.target_map.end(), 0u);
  for (size_t i = 0; i < task.content_tokens.size(); ++i) {
    task.target_map[task.content_tokens[i]] = image[i];
  }

  std::vector<double> cdf(task.content_tokens.size());
  double total = 0.0;
  for (size_t r = 0; r < cdf.size(); ++r) {
    total += std::pow(static_cast<double>(r + 1), -zipf_exponent);
    cdf[r] = total;
  }
  task.pairs.reserve(n_pairs);
  for (size_t i = 0; i < n_pairs; ++i) {
    const double u = rng.Uniform() * total;
    const size_t rank = std::min<size_t>(
        static_cast<size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                            cdf.begin()),
        cdf.size() - 1);
    const uint32_t source = task.content_tokens[rank];
    task.pairs.emplace_back(source, task.target_map[source]);
  }
  return task;
}

SyntheticTask TaskFromPairs(size_t vocab_size, std::vector<TokenPair> pairs) {
  for (const auto& [s, t] : pairs) {
    CheckToken(s, vocab_size);
    CheckToken(t, vocab_size);
  }
  SyntheticTask task;
  task.vocab_size = vocab_size;
  task.pairs = std::move(pairs);
  return task;
}

ToyModel InitModel(uint64_t seed, size_t vocab_size, size_t dim) {
  if (vocab_size == 0 || dim == 0) {
    throw std::invalid_argument("vocab size and dim must be >= 1");
  }
  Rng rng(seed);
  ToyModel model;
  model.vocab_size = vocab_size;
  model.dim = dim;
  model.embedding.resize(vocab_size * dim);
  model.output_weights.resize(vocab_size * dim);
  for (float& v : model.embedding) v = static_cast<float>(rng.Uniform(-0.1, 0.1));
  for (float& v : model.output_weights) {
    v = static_cast<float>(rng.Uniform(-0.1, 0.1));
  }
  return model;
}

std::vector<double> Forward(const ToyModel& model, uint32_t source_token) {
  CheckModel(model);
  CheckToken(source_token, model.vocab_size);
  std::vector<double> probs;
  SoftmaxRow<float>(model.output_weights, model.EmbeddingRow(source_token),
                    model.vocab_size, model.dim, probs);
  return probs;
}

std::string_view TrainModeName(TrainMode mode) {
  switch (mode) {
    case TrainMode::kFull: return "full";
    case TrainMode::kEmbed: return "embed";
    case TrainMode::kPartial: return "partial";
    case TrainMode::kFrozenComplement: return "frozen_complement";
  }
  return "unknown";
}

TrainMode ParseTrainMode(std::string_view name) {
  for (TrainMode m : {TrainMode::kFull, TrainMode::kEmbed, TrainMode::kPartial,
                      TrainMode::kFrozenComplement}) {
    if (TrainModeName(m) == name) return m;
  }
  throw std::invalid_argument("unknown training mode: " + std::string(name));
}

void ValidateTrainConfig(const TrainConfig& config, size_t vocab_size) {
  const bool needs_tickets = config.mode == TrainMode::kPartial ||
                             config.mode == TrainMode::kFrozenComplement;
  if (needs_tickets && !config.tickets) {
    throw std::invalid_argument(std::string(TrainModeName(config.mode)) +
                                " mode requires a ticket set");
  }
  if (config.tickets) {
    if (config.tickets->vocab_size != vocab_size) {
      throw std::invalid_argument("ticket vocab size does not match model");
    }
    ValidateTickets(*config.tickets);
  }
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
}

TrainResult Train(const ToyModel& model, const SyntheticTask& task,
                  const TrainConfig& config) {
  CheckTaskFits(model, task);
  ValidateTrainConfig(config, model.vocab_size);
  const size_t vocab = model.vocab_size;
  const size_t dim = model.dim;

  std::vector<uint8_t> row_trainable(vocab, 1);
  if (config.mode == TrainMode::kPartial ||
      config.mode == TrainMode::kFrozenComplement) {
    const bool in_tickets = config.mode == TrainMode::kPartial;
    for (size_t r = 0; r < vocab; ++r) {
      row_trainable[r] = config.tickets->Contains(r) == in_tickets;
    }
  }
  const bool train_weights = config.mode == TrainMode::kFull;

  TrainResult result{model, {}};
  ToyModel& m = result.model;
  std::vector<size_t> order(task.pairs.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<TokenPair> batch;
  std::vector<double> grad_embedding(vocab * dim);
  std::vector<double> grad_weights(train_weights ? vocab * dim : 0);
  std::vector<uint8_t> touched(vocab);
  Rng rng(config.seed);

  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.Shuffle(std::span<size_t>(order));
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      std::fill(touched.begin(), touched.end(), 0);
      for (size_t i = start; i < end; ++i) {
        batch.push_back(task.pairs[order[i]]);
        touched[task.pairs[order[i]].first] = 1;
      }
      std::fill(grad_embedding.begin(), grad_embedding.end(), 0.0);
      std::fill(grad_weights.begin(), grad_weights.end(), 0.0);
      epoch_loss += LossAndGradient<float>(
          m.embedding, m.output_weights, vocab, dim, batch,
          grad_embedding.data(), train_weights ? grad_weights.data() : nullptr);

      const double step = config.learning_rate / static_cast<double>(batch.size());
      for (size_t r = 0; r < vocab; ++r) {
        if (!touched[r] || !row_trainable[r]) continue;
        float* e = m.embedding.data() + r * dim;
        const double* g = grad_embedding.data() + r * dim;
        for (size_t j = 0; j < dim; ++j) {
          e[j] = static_cast<float>(e[j] - step * g[j]);
        }
      }
      if (train_weights) {
        for (size_t k = 0; k < m.output_weights.size(); ++k) {
          m.output_weights[k] =
              static_cast<float>(m.output_weights[k] - step * grad_weights[k]);
        }
      }
    }
    result.loss_curve.push_back(
        order.empty() ? 0.0 : epoch_loss / static_cast<double>(order.size()));
  }
  return result;
}

double MeanLoss(const ToyModel& model, const SyntheticTask& task) {
  CheckTaskFits(model, task);
  if (task.pairs.empty()) return 0.0;
  const double total = LossAndGradient<float>(
      model.embedding, model.output_weights, model.vocab_size, model.dim,
      task.pairs, nullptr, nullptr);
  return total / static_cast<double>(task.pairs.size());
}

uint32_t Predict(const ToyModel& model, uint32_t source_token) {
  return ArgMax(Forward(model, source_token));
}

double Evaluate(const ToyModel& model, const SyntheticTask& task) {
  CheckTaskFits(model, task);
  if (task.pairs.empty()) return 0.0;
  std::vector<int> cached(model.vocab_size, -1);
  size_t correct = 0;
  for (const auto& [source, target] : task.pairs) {
    if (cached[source] < 0) cached[source] = static_cast<int>(Predict(model, source));
    correct += static_cast<uint32_t>(cached[source]) == target;
  }
  return static_cast<double>(correct) / static_cast<double>(task.pairs.size());
}

std::vector<PredictionRecord> EmitPredictionLog(const ToyModel& tuned,
                                                const ToyModel& partial,
                                                const ToyModel& base,
                                                const SyntheticTask& task) {
  CheckTaskFits(tuned, task);
  CheckTaskFits(partial, task);
  CheckTaskFits(base, task);
  if (partial.dim != tuned.dim || base.dim != tuned.dim) {
    throw std::invalid_argument("models do not share (vocab_size, dim)");
  }
  std::vector<PredictionRecord> records;
  records.reserve(task.pairs.size());
  for (size_t i = 0; i < task.pairs.size(); ++i) {
    const auto [source, target] = task.pairs[i];
    PredictionRecord r;
    r.example_id = static_cast<int64_t>(i / kPairsPerExample);
    r.position = static_cast<int64_t>(i % kPairsPerExample);
    r.reference_token = target;
    const auto tuned_probs = Forward(tuned, source);
    r.tuned_prediction = ArgMax(tuned_probs);
    std::tie(r.p1, r.p2) = TopTwo(tuned_probs);
    r.partial_prediction = Predict(partial, source);
    const auto [b1, b2] = TopTwo(Forward(base, source));
    r.base_p1 = b1;
    r.base_p2 = b2;
    records.push_back(r);
  }
  return records;
}

std::vector<double> EmbeddingGradient(const ToyModel& model,
                                      std::span<const TokenPair> pairs) {
  CheckModel(model);
  std::vector<double> grad(model.embedding.size(), 0.0);
  if (pairs.empty()) return grad;
  LossAndGradient<float>(model.embedding, model.output_weights, model.vocab_size,
                         model.dim, pairs, grad.data(), nullptr);
  for (double& g : grad) g /= static_cast<double>(pairs.size());
  return grad;
}

double FiniteDifferenceGradient(const ToyModel& model,
                                std::span<const TokenPair> pairs, size_t row,
                                size_t col, double epsilon) {
  CheckModel(model);
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (row >= model.vocab_size || col >= model.dim) {
    throw std::invalid_argument("entry out of range");
  }
  if (pairs.empty()) return 0.0;
  // Double copies so the perturbation is not rounded away.
  std::vector<double> embedding(model.embedding.begin(), model.embedding.end());
  const std::vector<double> weights(model.output_weights.begin(),
                                    model.output_weights.end());
  const size_t k = row * model.dim + col;
  const double original = embedding[k];
  auto loss = [&]() {
    return LossAndGradient<double>(embedding, weights, model.vocab_size,
                                   model.dim, pairs, nullptr, nullptr) /
           static_cast<double>(pairs.size());
  };
  embedding[k] = original + epsilon;
  const double up = loss();
  embedding[k] = original - epsilon;
  const double down = loss();
  return (up - down) / (2.0 * epsilon);
}

double GradCheck(const ToyModel& model, const SyntheticTask& task,
                 const GradCheckOptions& options) {
  CheckTaskFits(model, task);
  if (!(options.epsilon > 0.0)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  const auto pairs = CheckedPairs(task, options.max_pairs);
  const auto analytic = EmbeddingGradient(model, pairs);

  // Half of the entries come from rows the loss actually touches.
  std::vector<uint32_t> active;
  for (const auto& p : pairs) active.push_back(p.first);
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());

  Rng rng(options.seed);
  double worst = 0.0;
  for (size_t i = 0; i < options.entries; ++i) {
    const size_t row = (i % 2 == 0 && !active.empty())
                           ? active[rng.UniformIndex(active.size())]
                           : rng.UniformIndex(model.vocab_size);
    const size_t col = rng.UniformIndex(model.dim);
    const double g = analytic[row * model.dim + col];
    const double fd =
        FiniteDifferenceGradient(model, pairs, row, col, options.epsilon);
    worst = std::max(worst, std::fabs(g - fd) /
                                std::max(1e-8, std::fabs(g) + std::fabs(fd)));
  }
  return worst;
}

}  // namespace ticketdiff
