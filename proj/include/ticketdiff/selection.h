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

#ifndef TICKETDIFF_SELECTION_H_
#define TICKETDIFF_SELECTION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ticketdiff/checkpoint.h"

namespace ticketdiff {

// Scoring rules a ticket set can come from. The first six are per-row
// metrics of a (base, tuned) row pair; kFrequency ranks by corpus count.
enum class Metric { kKs, kCos, kAbs, kRelative, kRatio, kKl, kFrequency };

std::string_view MetricName(Metric metric);
// Accepts "ks", "cos", "abs", "relative", "ratio", "kl", "frequency".
Metric ParseMetric(std::string_view name);

inline constexpr size_t kKlBins = 64;
inline constexpr double kKlMassFloor = 1e-9;
inline constexpr double kDivisionFloor = 1e-8;

struct TokenScore {
  size_t token_id = 0;
  double ks_statistic = 0.0;
  double p_value = 1.0;
  double cos = 1.0;
  double abs_l2 = 0.0;
  double relative = 0.0;
  double ratio = 0.0;
  double kl = 0.0;
  std::optional<uint64_t> frequency;
};

struct WinningTicketSet {
  Metric method = Metric::kKs;
  std::optional<double> alpha;
  std::optional<double> tau;
  size_t vocab_size = 0;
  std::vector<size_t> token_ids;  // strictly ascending, all < vocab_size

  bool Contains(size_t token_id) const;
};

// Throws std::invalid_argument unless ids are strictly ascending and < V.
void ValidateTickets(const WinningTicketSet& tickets);

// All per-row metrics for one base/tuned row pair (token_id left at 0):
//   ks_statistic, p_value   two-sample KS over the d coordinates (n = m = d)
//   cos                     <b,t>/(|b||t|); both zero -> 1, one zero -> 0
//   abs_l2                  |t - b|_2
//   relative                mean_j |t_j / g(b_j)|
//   ratio                   mean_j |(t_j - b_j) / g(b_j)|
//   kl                      KL(P_t || P_b) over 64 shared equal-width bins
// where g(x) keeps |x| >= 1e-8 with the sign of x (g(0) = 1e-8).
TokenScore ScoreRow(std::span<const float> base_row,
                    std::span<const float> tuned_row);

// One score per row, ordered by token_id.
std::vector<TokenScore> AnalyzePair(const EmbeddingView& base,
                                    const EmbeddingView& tuned);

// Rows whose KS p-value is below alpha. alpha == 1 uses tau = 0 and keeps
// every row with a nonzero statistic.
WinningTicketSet SelectByAlpha(std::span<const TokenScore> scores, double alpha,
                               size_t dim);

// Row ids in "most changed first" order: cos ascending, frequency and all
// other metrics descending, ties by ascending token_id.
std::vector<size_t> RankRows(std::span<const TokenScore> scores, Metric metric);

WinningTicketSet SelectTopK(std::span<const TokenScore> scores, Metric metric,
                            size_t k);

// 1-based rank of token_id under RankRows, divided by the row count.
double NormalizedRank(std::span<const TokenScore> scores, Metric metric,
                      size_t token_id);

std::vector<uint64_t> CountFrequencies(std::span<const uint32_t> corpus,
                                       size_t vocab_size);

WinningTicketSet SelectByFrequency(std::span<const uint64_t> counts, size_t k);

// 1 - (#ticket rows whose KS test between the two matrices rejects at alpha)
// / #tickets; 1 for an empty ticket set.
double CompareTicketDistributions(const EmbeddingView& tuned_a,
                                  const EmbeddingView& tuned_b,
                                  const WinningTicketSet& tickets, double alpha);

}  // namespace ticketdiff

#endif  // TICKETDIFF_SELECTION_H_
