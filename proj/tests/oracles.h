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

#ifndef TICKETDIFF_TESTS_ORACLES_H_
#define TICKETDIFF_TESTS_ORACLES_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ticketdiff/checkpoint.h"

// Reference computations used only by tests. None of them call into the
// library code they are used to check.
namespace ticketdiff::oracles {

// sup |F_a - F_b| by counting at every merged value with plain loops.
double BruteForceKs(std::span<const double> a, std::span<const double> b);

// Alternating series for the Kolmogorov survival function with a fixed,
// generous number of terms (accurate for lambda >= 0.3).
double KolmogorovSeries(double lambda, int terms = 2000);

// Exact permutation p-value by enumerating every split of the pooled values
// into sizes |a| and |b|; fraction of splits with statistic >= observed.
double ExactPermutationPValue(std::span<const double> a,
                              std::span<const double> b);

// Two [vocab, dim] checkpoints holding tensor `name`: the tuned copy equals
// the base except row `shifted_row`, which is moved by `shift` standard
// deviations of its own values.
struct MatrixPair {
  Checkpoint base;
  Checkpoint tuned;
};
MatrixPair ShiftedRowFixture(size_t vocab, size_t dim, size_t shifted_row,
                             double shift, uint64_t seed,
                             const char* name = "embed");

// Random [vocab, dim] matrix pair where every row of the tuned copy differs.
MatrixPair RandomDifferingPair(size_t vocab, size_t dim, uint64_t seed,
                               const char* name = "embed");

}  // namespace ticketdiff::oracles

#endif  // TICKETDIFF_TESTS_ORACLES_H_
