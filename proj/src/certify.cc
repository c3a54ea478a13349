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

#include "ticketdiff/certify.h"

#include <stdexcept>
#include <string>

#include "ticketdiff/ksstat.h"

namespace ticketdiff {
namespace {

void CheckTop2(double p1, double p2, const char* what) {
  if (!(p1 <= 1.0 && p1 >= p2 && p2 >= 0.0)) {
    throw std::invalid_argument(std::string(what) +
                                " probabilities must satisfy 1 >= p1 >= p2 >= 0");
  }
}

}  // namespace

void ValidateRecord(const PredictionRecord& record) {
  CheckTop2(record.p1, record.p2, "tuned");
  if (record.base_p1.has_value() != record.base_p2.has_value()) {
    throw std::invalid_argument("base_p1 and base_p2 must be given together");
  }
  if (record.base_p1) CheckTop2(*record.base_p1, *record.base_p2, "base");
  if (record.position < 0) throw std::invalid_argument("negative position");
}

std::string_view ProbSourceName(ProbSource source) {
  return source == ProbSource::kTuned ? "tuned" : "base";
}

ProbSource ParseProbSource(std::string_view name) {
  if (name == "tuned") return ProbSource::kTuned;
  if (name == "base") return ProbSource::kBase;
  throw std::invalid_argument("unknown probability source: " +
                              std::string(name));
}

double HalfGap(const PredictionRecord& record, ProbSource source) {
  if (source == ProbSource::kTuned) return (record.p1 - record.p2) / 2.0;
  if (!record.base_p1 || !record.base_p2) {
    throw std::invalid_argument("record lacks base probabilities (example " +
                                std::to_string(record.example_id) +
                                ", position " +
                                std::to_string(record.position) + ")");
  }
  return (*record.base_p1 - *record.base_p2) / 2.0;
}

bool CertifyRecord(const PredictionRecord& record, double tau,
                   ProbSource source) {
  const double half_gap = HalfGap(record, source);
  return record.tuned_prediction == record.reference_token && half_gap > tau;
}

std::vector<PredictionRecord> FilterFirstK(
    std::span<const PredictionRecord> records, size_t k) {
  if (k == 0) throw std::invalid_argument("first-k must be >= 1");
  std::vector<PredictionRecord> kept;
  for (const auto& r : records) {
    if (r.position >= 0 && static_cast<size_t>(r.position) < k) kept.push_back(r);
  }
  return kept;
}

CertificationReport MakeCertificationReport(
    std::span<const PredictionRecord> records, double alpha, size_t dim,
    ProbSource source, std::optional<size_t> first_k) {
  if (dim < 2) throw std::invalid_argument("dim must be >= 2");
  std::vector<PredictionRecord> filtered;
  if (first_k) {
    filtered = FilterFirstK(records, *first_k);
    records = filtered;
  }
  if (records.empty()) throw std::invalid_argument("no prediction records");

  CertificationReport report;
  report.alpha = alpha;
  report.tau = KsThreshold(alpha, dim, dim);
  report.dim = dim;
  report.n_records = records.size();

  size_t certified = 0;
  size_t correct = 0;
  size_t verified = 0;
  size_t partial_seen = 0;
  size_t partial_correct = 0;
  for (const auto& r : records) {
    ValidateRecord(r);
    const bool gap_ok = HalfGap(r, source) > report.tau;
    const bool is_correct = r.tuned_prediction == r.reference_token;
    verified += gap_ok;
    correct += is_correct;
    certified += gap_ok && is_correct;
    if (r.partial_prediction) {
      ++partial_seen;
      partial_correct += *r.partial_prediction == r.reference_token;
    }
  }
  if (partial_seen != 0 && partial_seen != records.size()) {
    throw std::invalid_argument(
        "partial predictions are present on only some records");
  }
  const double n = static_cast<double>(records.size());
  report.certified_accuracy = static_cast<double>(certified) / n;
  report.tuned_accuracy = static_cast<double>(correct) / n;
  report.verified_percentage = static_cast<double>(verified) / n;
  if (partial_seen != 0) {
    report.prediction_accuracy = static_cast<double>(partial_correct) / n;
  }
  return report;
}

std::vector<CertificationReport> AlphaSweep(
    std::span<const PredictionRecord> records, std::span<const double> alphas,
    size_t dim, ProbSource source, std::optional<size_t> first_k) {
  std::vector<CertificationReport> reports;
  reports.reserve(alphas.size());
  for (double alpha : alphas) {
    reports.push_back(
        MakeCertificationReport(records, alpha, dim, source, first_k));
  }
  return reports;
}

}  // namespace ticketdiff
