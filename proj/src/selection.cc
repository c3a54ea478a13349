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

#include "ticketdiff/selection.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ticketdiff/ksstat.h"

namespace ticketdiff {
namespace {

double GuardDivisor(double x) {
  if (std::fabs(x) >= kDivisionFloor) return x;
  return std::signbit(x) ? -kDivisionFloor : kDivisionFloor;
}

std::array<double, kKlBins> Histogram(std::span<const float> row, double lo,
                                      double width) {
  std::array<double, kKlBins> mass{};
  for (float v : row) {
    size_t bin = 0;
    if (width > 0.0) {
      const double pos = (static_cast<double>(v) - lo) / width;
      bin = std::min(kKlBins - 1, static_cast<size_t>(std::max(0.0, pos)));
    }
    mass[bin] += 1.0;
  }
  double total = 0.0;
  for (double& m : mass) {
    m = std::max(m / static_cast<double>(row.size()), kKlMassFloor);
    total += m;
  }
  for (double& m : mass) m /= total;
  return mass;
}

double HistogramKl(std::span<const float> base, std::span<const float> tuned) {
  const auto [bmin, bmax] = std::minmax_element(base.begin(), base.end());
  const auto [tmin, tmax] = std::minmax_element(tuned.begin(), tuned.end());
  const double lo = std::min(*bmin, *tmin);
  const double hi = std::max(*bmax, *tmax);
  const double width = (hi - lo) / static_cast<double>(kKlBins);
  const auto p = Histogram(tuned, lo, width);
  const auto q = Histogram(base, lo, width);
  double kl = 0.0;
  for (size_t i = 0; i < kKlBins; ++i) kl += p[i] * std::log(p[i] / q[i]);
  return std::max(kl, 0.0);
}

// Whether the per-row KS test rejects "unchanged" at alpha; alpha == 1 means
// any change at all.
bool Rejects(double statistic, double p_value, double alpha) {
  if (alpha == 1.0) return statistic > 0.0;
  return p_value < alpha;
}

void CheckAlphaHalfOpen(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1], got " +
                                std::to_string(alpha));
  }
}

double MetricValue(const TokenScore& s, Metric metric) {
  switch (metric) {
    case Metric::kKs: return s.ks_statistic;
    case Metric::kCos: return s.cos;
    case Metric::kAbs: return s.abs_l2;
    case Metric::kRelative: return s.relative;
    case Metric::kRatio: return s.ratio;
    case Metric::kKl: return s.kl;
    case Metric::kFrequency:
      if (!s.frequency) {
        throw std::invalid_argument("frequency not available for token " +
                                    std::to_string(s.token_id));
      }
      return static_cast<double>(*s.frequency);
  }
  return 0.0;
}

}  // namespace

std::string_view MetricName(Metric metric) {
  switch (metric) {
    case Metric::kKs: return "ks";
    case Metric::kCos: return "cos";
    case Metric::kAbs: return "abs";
    case Metric::kRelative: return "relative";
    case Metric::kRatio: return "ratio";
    case Metric::kKl: return "kl";
    case Metric::kFrequency: return "frequency";
  }
  return "unknown";
}

Metric ParseMetric(std::string_view name) {
  for (Metric m : {Metric::kKs, Metric::kCos, Metric::kAbs, Metric::kRelative,
                   Metric::kRatio, Metric::kKl, Metric::kFrequency}) {
    if (MetricName(m) == name) return m;
  }
  throw std::invalid_argument("unknown method: " + std::string(name));
}

bool WinningTicketSet::Contains(size_t token_id) const {
  return std::binary_search(token_ids.begin(), token_ids.end(), token_id);
}

void ValidateTickets(const WinningTicketSet& tickets) {
  for (size_t i = 0; i < tickets.token_ids.size(); ++i) {
    if (tickets.token_ids[i] >= tickets.vocab_size) {
      throw std::invalid_argument(
          "ticket id " + std::to_string(tickets.token_ids[i]) +
          " out of range for vocab size " + std::to_string(tickets.vocab_size));
    }
    if (i > 0 && tickets.token_ids[i] <= tickets.token_ids[i - 1]) {
      throw std::invalid_argument("ticket ids must be strictly ascending");
    }
  }
}

TokenScore ScoreRow(std::span<const float> base_row,
                    std::span<const float> tuned_row) {
  if (base_row.size() != tuned_row.size()) {
    throw std::invalid_argument("row length mismatch: " +
                                std::to_string(base_row.size()) + " vs " +
                                std::to_string(tuned_row.size()));
  }
  const size_t d = base_row.size();
  if (d < 2) throw std::invalid_argument("rows need at least 2 values");

  TokenScore s;
  s.ks_statistic = KsStatistic(Sample(base_row), Sample(tuned_row));
  s.p_value = KsPValueAsymptotic(s.ks_statistic, d, d);

  double dot = 0.0;
  double base_sq = 0.0;
  double tuned_sq = 0.0;
  double diff_sq = 0.0;
  double relative = 0.0;
  double ratio = 0.0;
  for (size_t j = 0; j < d; ++j) {
    const double b = base_row[j];
    const double t = tuned_row[j];
    dot += b * t;
    base_sq += b * b;
    tuned_sq += t * t;
    diff_sq += (t - b) * (t - b);
    const double g = GuardDivisor(b);
    relative += std::fabs(t / g);
    ratio += std::fabs((t - b) / g);
  }
  if (base_sq == 0.0 && tuned_sq == 0.0) {
    s.cos = 1.0;
  } else if (base_sq == 0.0 || tuned_sq == 0.0) {
    s.cos = 0.0;
  } else {
    s.cos = std::clamp(dot / (std::sqrt(base_sq) * std::sqrt(tuned_sq)), -1.0,
                       1.0);
  }
  s.abs_l2 = std::sqrt(diff_sq);
  s.relative = relative / static_cast<double>(d);
  s.ratio = ratio / static_cast<double>(d);
  s.kl = HistogramKl(base_row, tuned_row);
  return s;
}

std::vector<TokenScore> AnalyzePair(const EmbeddingView& base,
                                    const EmbeddingView& tuned) {
  if (base.vocab_size() != tuned.vocab_size() || base.dim() != tuned.dim()) {
    throw std::invalid_argument(
        "shape mismatch: [" + std::to_string(base.vocab_size()) + "," +
        std::to_string(base.dim()) + "] vs [" +
        std::to_string(tuned.vocab_size()) + "," + std::to_string(tuned.dim()) +
        "]");
  }
  std::vector<TokenScore> scores(base.vocab_size());
  for (size_t i = 0; i < scores.size(); ++i) {
    scores[i] = ScoreRow(base.Row(i), tuned.Row(i));
    scores[i].token_id = i;
  }
  return scores;
}

WinningTicketSet SelectByAlpha(std::span<const TokenScore> scores, double alpha,
                               size_t dim) {
  CheckAlphaHalfOpen(alpha);
  if (dim < 2) throw std::invalid_argument("dim must be >= 2");
  WinningTicketSet out;
  out.method = Metric::kKs;
  out.alpha = alpha;
  out.tau = KsThreshold(alpha, dim, dim);
  out.vocab_size = scores.size();
  for (const auto& s : scores) {
    if (s.token_id >= scores.size()) {
      throw std::invalid_argument("token id out of range: " +
                                  std::to_string(s.token_id));
    }
    if (Rejects(s.ks_statistic, s.p_value, alpha)) {
      out.token_ids.push_back(s.token_id);
    }
  }
  std::sort(out.token_ids.begin(), out.token_ids.end());
  ValidateTickets(out);
  return out;
}

std::vector<size_t> RankRows(std::span<const TokenScore> scores, Metric metric) {
  std::vector<double> key(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    const double v = MetricValue(scores[i], metric);
    key[i] = metric == Metric::kCos ? v : -v;
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    if (key[x] != key[y]) return key[x] < key[y];
    return scores[x].token_id < scores[y].token_id;
  });
  std::vector<size_t> ids(order.size());
  for (size_t i = 0; i < order.size(); ++i) ids[i] = scores[order[i]].token_id;
  return ids;
}

WinningTicketSet SelectTopK(std::span<const TokenScore> scores, Metric metric,
                            size_t k) {
  if (k > scores.size()) {
    throw std::invalid_argument("k=" + std::to_string(k) +
                                " exceeds row count " +
                                std::to_string(scores.size()));
  }
  WinningTicketSet out;
  out.method = metric;
  out.vocab_size = scores.size();
  if (k == 0) return out;
  const auto ranked = RankRows(scores, metric);
  out.token_ids.assign(ranked.begin(), ranked.begin() + static_cast<long>(k));
  std::sort(out.token_ids.begin(), out.token_ids.end());
  ValidateTickets(out);
  return out;
}

double NormalizedRank(std::span<const TokenScore> scores, Metric metric,
                      size_t token_id) {
  const auto ranked = RankRows(scores, metric);
  const auto it = std::find(ranked.begin(), ranked.end(), token_id);
  if (it == ranked.end()) {
    throw std::invalid_argument("unknown token id " + std::to_string(token_id));
  }
  return static_cast<double>(it - ranked.begin() + 1) /
         static_cast<double>(ranked.size());
}

std::vector<uint64_t> CountFrequencies(std::span<const uint32_t> corpus,
                                       size_t vocab_size) {
  std::vector<uint64_t> counts(vocab_size, 0);
  for (size_t pos = 0; pos < corpus.size(); ++pos) {
    if (corpus[pos] >= vocab_size) {
      throw std::invalid_argument("token id " + std::to_string(corpus[pos]) +
                                  " at position " + std::to_string(pos) +
                                  " exceeds vocab size " +
                                  std::to_string(vocab_size));
    }
    ++counts[corpus[pos]];
  }
  return counts;
}

WinningTicketSet SelectByFrequency(std::span<const uint64_t> counts, size_t k) {
  if (k > counts.size()) {
    throw std::invalid_argument("k=" + std::to_string(k) +
                                " exceeds vocab size " +
                                std::to_string(counts.size()));
  }
  std::vector<size_t> order(counts.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return counts[x] > counts[y];
  });
  WinningTicketSet out;
  out.method = Metric::kFrequency;
  out.vocab_size = counts.size();
  out.token_ids.assign(order.begin(), order.begin() + static_cast<long>(k));
  std::sort(out.token_ids.begin(), out.token_ids.end());
  return out;
}

double CompareTicketDistributions(const EmbeddingView& tuned_a,
                                  const EmbeddingView& tuned_b,
                                  const WinningTicketSet& tickets,
                                  double alpha) {
  CheckAlphaHalfOpen(alpha);
  if (tuned_a.vocab_size() != tuned_b.vocab_size() ||
      tuned_a.dim() != tuned_b.dim()) {
    throw std::invalid_argument("shape mismatch between tuned matrices");
  }
  if (tickets.vocab_size != tuned_a.vocab_size()) {
    throw std::invalid_argument("ticket vocab size does not match matrices");
  }
  ValidateTickets(tickets);
  if (tickets.token_ids.empty()) return 1.0;
  size_t changed = 0;
  for (size_t id : tickets.token_ids) {
    const auto row_a = tuned_a.Row(id);
    const auto row_b = tuned_b.Row(id);
    const double stat = KsStatistic(Sample(row_a), Sample(row_b));
    const double p = KsPValueAsymptotic(stat, row_a.size(), row_b.size());
    if (Rejects(stat, p, alpha)) ++changed;
  }
  return 1.0 - static_cast<double>(changed) /
                   static_cast<double>(tickets.token_ids.size());
}

}  // namespace ticketdiff
