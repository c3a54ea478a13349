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

#ifndef TICKETDIFF_TEXT_IO_H_
#define TICKETDIFF_TEXT_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ticketdiff/certify.h"
#include "ticketdiff/selection.h"
#include "ticketdiff/toytrain.h"
#include "ticketdiff/transfer.h"

namespace ticketdiff {

// Text formats shared by the CLI and the Python module. Floats are written
// with 9 significant digits ("%.9g"); every writer is deterministic.

std::string FormatFloat(double value);

// token_id,ks_statistic,p_value,cos,abs_l2,relative,ratio,kl,frequency
std::string ScoresToCsv(std::span<const TokenScore> scores);
std::vector<TokenScore> ScoresFromCsv(const std::string& text);

// JSON object with method, alpha, tau, vocab_size, token_ids.
std::string TicketsToJson(const WinningTicketSet& tickets);
WinningTicketSet TicketsFromJson(const std::string& text);

// vocab_size lines of "0" or "1".
std::string MaskToText(const RowMask& mask);
RowMask MaskFromText(const std::string& text);

// example_id,position,reference_id,tuned_pred_id,tuned_p1,tuned_p2,
// partial_pred_id,base_p1,base_p2 (optional fields blank).
std::string PredictionLogToCsv(std::span<const PredictionRecord> records);
std::vector<PredictionRecord> PredictionLogFromCsv(const std::string& text);

std::string ReportsToJson(std::span<const CertificationReport> reports,
                          ProbSource source, std::optional<size_t> first_k);

// token_id,count
std::string CountsToCsv(std::span<const uint64_t> counts);
std::vector<uint64_t> CountsFromCsv(const std::string& text);

// Whitespace-separated non-negative token ids.
std::vector<uint32_t> CorpusFromText(const std::string& text);
std::string CorpusToText(std::span<const uint32_t> corpus);

// source,target
std::string TaskToCsv(const SyntheticTask& task);
SyntheticTask TaskFromCsv(const std::string& text, size_t vocab_size);

// epoch,loss
std::string LossCurveToCsv(std::span<const double> losses);

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

}  // namespace ticketdiff

#endif  // TICKETDIFF_TEXT_IO_H_
