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

#ifndef TICKETDIFF_KSSTAT_H_
#define TICKETDIFF_KSSTAT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ticketdiff {

// A finite list of real values viewed as draws from one distribution.
// Values are validated finite and kept sorted ascending.
class Sample {
 public:
  // Throws std::invalid_argument on an empty input ("empty sample") or on a
  // non-finite value.
  explicit Sample(std::vector<double> values);
  explicit Sample(std::span<const float> values);
  explicit Sample(std::span<const double> values);

  size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  size_t n = 0;
  size_t m = 0;
  double tau = 0.0;
  double alpha = 0.0;
  bool reject = false;
};

// Right-continuous empirical CDF: #{v <= x} / n.
double EmpiricalCdfAt(const Sample& sample, double x);

// sup_x |F_a(x) - F_b(x)|, evaluated at every distinct merged value.
double KsStatistic(const Sample& a, const Sample& b);

// Same statistic over two already sorted, non-empty spans.
double KsStatisticSorted(std::span<const double> a, std::span<const double> b);

// c(alpha) = sqrt(ln(2/alpha)/2); requires 0 < alpha < 1.
double KsCoefficient(double alpha);

// c(alpha) * sqrt((n+m)/(n*m)). For n == m == d this is c(alpha)*sqrt(2/d).
double KsCriticalValue(double alpha, size_t n, size_t m);

// As KsCriticalValue but also accepts alpha == 1, mapped to a threshold of 0.
double KsThreshold(double alpha, size_t n, size_t m);

// Kolmogorov limiting survival function
// Q(lambda) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2), in [0, 1].
double KolmogorovSurvival(double lambda);

// Asymptotic two-sample p-value for an observed statistic. With
// `stephens_correction` the effective-size correction
// lambda = D * (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) is used instead of
// lambda = D * sqrt(ne), ne = n*m/(n+m).
double KsPValueAsymptotic(double statistic, size_t n, size_t m,
                          bool stephens_correction = false);

// Monte-Carlo permutation p-value: (1 + hits) / (1 + trials), where a hit is
// a random re-split of the pooled values with statistic >= the observed one.
double KsPValuePermutation(const Sample& a, const Sample& b, size_t trials,
                           uint64_t seed);

// Statistic, threshold and asymptotic p-value in one record. `alpha` may be
// 1, in which case tau is 0. reject == (statistic > tau).
KsResult KsTwoSampleTest(const Sample& a, const Sample& b, double alpha);

// Smallest statistic D in [0, 1] with KsPValueAsymptotic(D) <= alpha, found
// by bisection to 1e-9.
double TauFromPValueInversion(double alpha, size_t n, size_t m);

}  // namespace ticketdiff

#endif  // TICKETDIFF_KSSTAT_H_
