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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace ticketdiff::oracles {

double BruteForceKs(std::span<const double> a, std::span<const double> b) {
  std::vector<double> points(a.begin(), a.end());
  points.insert(points.end(), b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  double best = 0.0;
  for (double x : points) {
    size_t ca = 0;
    size_t cb = 0;
    for (double v : a) ca += v <= x;
    for (double v : b) cb += v <= x;
    best = std::max(best, std::fabs(static_cast<double>(ca) / n -
                                    static_cast<double>(cb) / m));
  }
  return best;
}

double KolmogorovSeries(double lambda, int terms) {
  double sum = 0.0;
  for (int k = 1; k <= terms; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ExactPermutationPValue(std::span<const double> a,
                              std::span<const double> b) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double observed = BruteForceKs(a, b);
  std::vector<bool> pick(pooled.size(), false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(a.size()), true);
  size_t total = 0;
  size_t hits = 0;
  do {
    std::vector<double> xa;
    std::vector<double> xb;
    for (size_t i = 0; i < pooled.size(); ++i) {
      (pick[i] ? xa : xb).push_back(pooled[i]);
    }
    ++total;
    hits += BruteForceKs(xa, xb) >= observed - 1e-12;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

MatrixPair ShiftedRowFixture(size_t vocab, size_t dim, size_t shifted_row,
                             double shift, uint64_t seed, const char* name) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  TensorRecord t{name, {vocab, dim}, std::vector<float>(vocab * dim)};
  for (float& v : t.data) v = static_cast<float>(0.02 * normal(gen));
  MatrixPair pair;
  pair.base.tensors.push_back(t);

  double mean = 0.0;
  for (size_t j = 0; j < dim; ++j) mean += t.data[shifted_row * dim + j];
  mean /= static_cast<double>(dim);
  double var = 0.0;
  for (size_t j = 0; j < dim; ++j) {
    const double dv = t.data[shifted_row * dim + j] - mean;
    var += dv * dv;
  }
  const double sd = std::sqrt(var / static_cast<double>(dim));
  for (size_t j = 0; j < dim; ++j) {
    t.data[shifted_row * dim + j] =
        static_cast<float>(t.data[shifted_row * dim + j] + shift * sd);
  }
  pair.tuned.tensors.push_back(std::move(t));
  return pair;
}

MatrixPair RandomDifferingPair(size_t vocab, size_t dim, uint64_t seed,
                               const char* name) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TensorRecord base{name, {vocab, dim}, std::vector<float>(vocab * dim)};
  TensorRecord tuned = base;
  for (size_t k = 0; k < base.data.size(); ++k) {
    base.data[k] = static_cast<float>(u(gen));
    tuned.data[k] = base.data[k] + 0.5f + static_cast<float>(std::fabs(u(gen)));
  }
  MatrixPair pair;
  pair.base.tensors.push_back(std::move(base));
  pair.tuned.tensors.push_back(std::move(tuned));
  return pair;
}

}  // namespace ticketdiff::oracles
