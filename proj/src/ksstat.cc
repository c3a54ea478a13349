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

#include "ticketdiff/ksstat.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ticketdiff/random.h"

namespace ticketdiff {
namespace {

void CheckAlphaOpen(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1), got " +
                                std::to_string(alpha));
  }
}

void CheckCounts(size_t n, size_t m) {
  if (n == 0 || m == 0) throw std::invalid_argument("empty sample");
}

// Largest |i*m - j*n| over the merged evaluation points, where the group
// boundaries of `pooled` mark the last element of each run of equal values
// and `from_a` labels each pooled element's origin.
uint64_t MaxScaledGap(std::span<const uint8_t> last_in_group,
                      std::span<const uint8_t> from_a, int64_t n, int64_t m) {
  int64_t count_a = 0;
  int64_t count_b = 0;
  uint64_t best = 0;
  for (size_t k = 0; k < from_a.size(); ++k) {
    if (from_a[k]) {
      ++count_a;
    } else {
      ++count_b;
    }
    if (last_in_group[k]) {
      const uint64_t gap =
          static_cast<uint64_t>(std::llabs(count_a * m - count_b * n));
      best = std::max(best, gap);
    }
  }
  return best;
}

}  // namespace

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("empty sample");
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("sample contains a non-finite value");
    }
  }
  std::sort(values_.begin(), values_.end());
}

Sample::Sample(std::span<const float> values)
    : Sample(std::vector<double>(values.begin(), values.end())) {}

Sample::Sample(std::span<const double> values)
    : Sample(std::vector<double>(values.begin(), values.end())) {}

double EmpiricalCdfAt(const Sample& sample, double x) {
  if (sample.size() == 0) throw std::invalid_argument("empty sample");
  if (!std::isfinite(x)) throw std::invalid_argument("x must be finite");
  const auto values = sample.values();
  const auto it = std::upper_bound(values.begin(), values.end(), x);
  return static_cast<double>(it - values.begin()) /
         static_cast<double>(values.size());
}

double KsStatisticSorted(std::span<const double> a, std::span<const double> b) {
  CheckCounts(a.size(), b.size());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  size_t i = 0;
  size_t j = 0;
  double best = 0.0;
  // Once either side is exhausted the gap can only shrink.
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    best = std::max(best, std::fabs(static_cast<double>(i) / n -
                                    static_cast<double>(j) / m));
  }
  return best;
}

double KsStatistic(const Sample& a, const Sample& b) {
  return KsStatisticSorted(a.values(), b.values());
}

double KsCoefficient(double alpha) {
  CheckAlphaOpen(alpha);
  return std::sqrt(std::log(2.0 / alpha) / 2.0);
}

double KsCriticalValue(double alpha, size_t n, size_t m) {
  CheckAlphaOpen(alpha);
  CheckCounts(n, m);
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  return KsCoefficient(alpha) * std::sqrt((nd + md) / (nd * md));
}

double KsThreshold(double alpha, size_t n, size_t m) {
  if (alpha == 1.0) {
    CheckCounts(n, m);
    return 0.0;
  }
  return KsCriticalValue(alpha, n, m);
}

double KolmogorovSurvival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  double q;
  if (lambda < 1.18) {
    // Jacobi theta form of the same function; the alternating series needs
    // O(1/lambda) terms here and loses accuracy near Q = 1.
    const double w = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 100; k += 2) {
      const double term = std::exp(-static_cast<double>(k * k) * w);
      sum += term;
      if (term < 1e-16 * sum) break;
    }
    q = 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
  } else {
    const double a = -2.0 * lambda * lambda;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = std::exp(a * static_cast<double>(k * k));
      sum += sign * term;
      if (term < 1e-12) break;
      sign = -sign;
    }
    q = 2.0 * sum;
  }
  return std::clamp(q, 0.0, 1.0);
}

double KsPValueAsymptotic(double statistic, size_t n, size_t m,
                          bool stephens_correction) {
  CheckCounts(n, m);
  if (!(statistic >= 0.0 && statistic <= 1.0)) {
    throw std::invalid_argument("statistic must lie in [0, 1]");
  }
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double ne = nd * md / (nd + md);
  const double root = std::sqrt(ne);
  const double lambda = stephens_correction
                            ? statistic * (root + 0.12 + 0.11 / root)
                            : statistic * root;
  return KolmogorovSurvival(lambda);
}

double KsPValuePermutation(const Sample& a, const Sample& b, size_t trials,
                           uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  const size_t n = a.size();
  const size_t m = b.size();
  CheckCounts(n, m);

  // Pool once in sorted order; each trial only relabels.
  struct Tagged {
    double value;
    uint8_t from_a;
  };
  std::vector<Tagged> pooled;
  pooled.reserve(n + m);
  for (double v : a.values()) pooled.push_back({v, 1});
  for (double v : b.values()) pooled.push_back({v, 0});
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const Tagged& x, const Tagged& y) {
                     return x.value < y.value;
                   });

  std::vector<uint8_t> labels(pooled.size());
  std::vector<uint8_t> last_in_group(pooled.size());
  for (size_t k = 0; k < pooled.size(); ++k) {
    labels[k] = pooled[k].from_a;
    last_in_group[k] =
        (k + 1 == pooled.size() || pooled[k + 1].value != pooled[k].value);
  }

  const auto sn = static_cast<int64_t>(n);
  const auto sm = static_cast<int64_t>(m);
  const uint64_t observed = MaxScaledGap(last_in_group, labels, sn, sm);

  Rng rng(seed);
  size_t hits = 0;
  for (size_t t = 0; t < trials; ++t) {
    rng.Shuffle(std::span<uint8_t>(labels));
    if (MaxScaledGap(last_in_group, labels, sn, sm) >= observed) ++hits;
  }
  return static_cast<double>(1 + hits) / static_cast<double>(1 + trials);
}

KsResult KsTwoSampleTest(const Sample& a, const Sample& b, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1], got " +
                                std::to_string(alpha));
  }
  KsResult result;
  result.n = a.size();
  result.m = b.size();
  result.alpha = alpha;
  result.statistic = KsStatistic(a, b);
  result.tau = KsThreshold(alpha, result.n, result.m);
  result.p_value = KsPValueAsymptotic(result.statistic, result.n, result.m);
  result.reject = result.statistic > result.tau;
  return result;
}

double TauFromPValueInversion(double alpha, size_t n, size_t m) {
  CheckAlphaOpen(alpha);
  CheckCounts(n, m);
  double lo = 0.0;
  double hi = 1.0;
  if (KsPValueAsymptotic(hi, n, m) > alpha) {
    throw std::domain_error(
        "no statistic in [0, 1] reaches this alpha for the given sizes");
  }
  for (int iter = 0; iter < 200; ++iter) {
    if (hi - lo <= 1e-9) return hi;
    const double mid = 0.5 * (lo + hi);
    if (KsPValueAsymptotic(mid, n, m) <= alpha) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  throw std::runtime_error("p-value inversion did not converge");
}

}  // namespace ticketdiff
