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

#ifndef TICKETDIFF_CERTIFY_H_
#define TICKETDIFF_CERTIFY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ticketdiff {

// One next-token event. p1/p2 are the top-2 probabilities of the tuned model;
// base_p1/base_p2 the same for the un-tuned model.
struct PredictionRecord {
  int64_t example_id = 0;
  int64_t position = 0;
  uint32_t reference_token = 0;
  uint32_t tuned_prediction = 0;
  double p1 = 0.0;
  double p2 = 0.0;
  std::optional<uint32_t> partial_prediction;
  std::optional<double> base_p1;
  std::optional<double> base_p2;
};

// Throws std::invalid_argument unless 1 >= p1 >= p2 >= 0 (and likewise for
// the base probabilities when present).
void ValidateRecord(const PredictionRecord& record);

enum class ProbSource { kTuned, kBase };

std::string_view ProbSourceName(ProbSource source);
ProbSource ParseProbSource(std::string_view name);

struct CertificationReport {
  double alpha = 0.0;
  double tau = 0.0;
  size_t dim = 0;
  size_t n_records = 0;
  double certified_accuracy = 0.0;
  std::optional<double> prediction_accuracy;
  double tuned_accuracy = 0.0;
  double verified_percentage = 0.0;
};

// Half the top-2 probability gap from the chosen source.
double HalfGap(const PredictionRecord& record, ProbSource source);

// Correct tuned prediction and (p1 - p2)/2 > tau, strictly.
bool CertifyRecord(const PredictionRecord& record, double tau,
                   ProbSource source);

// Keeps records with position < k.
std::vector<PredictionRecord> FilterFirstK(std::span<const PredictionRecord> records,
                                           size_t k);

inline constexpr size_t kDefaultFirstK = 20;

CertificationReport MakeCertificationReport(
    std::span<const PredictionRecord> records, double alpha, size_t dim,
    ProbSource source, std::optional<size_t> first_k = std::nullopt);

std::vector<CertificationReport> AlphaSweep(
    std::span<const PredictionRecord> records, std::span<const double> alphas,
    size_t dim, ProbSource source, std::optional<size_t> first_k = std::nullopt);

}  // namespace ticketdiff

#endif  // TICKETDIFF_CERTIFY_H_
