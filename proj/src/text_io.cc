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

#include "ticketdiff/text_io.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ticketdiff {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kScoresHeader[] =
    "token_id,ks_statistic,p_value,cos,abs_l2,relative,ratio,kl,frequency";
constexpr char kLogHeader[] =
    "example_id,position,reference_id,tuned_pred_id,tuned_p1,tuned_p2,"
    "partial_pred_id,base_p1,base_p2";
constexpr char kCountsHeader[] = "token_id,count";
constexpr char kTaskHeader[] = "source,target";

[[noreturn]] void Fail(const std::string& what, size_t line) {
  throw std::runtime_error(what + " at line " + std::to_string(line));
}

std::vector<std::string> SplitCells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Non-empty, \r-stripped lines with their 1-based line numbers.
std::vector<std::pair<size_t, std::string>> Lines(const std::string& text) {
  std::vector<std::pair<size_t, std::string>> out;
  std::istringstream in(text);
  std::string line;
  size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.emplace_back(no, line);
  }
  return out;
}

template <typename T>
T ParseNumber(const std::string& cell, const char* field, size_t line) {
  T value{};
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    Fail(std::string("bad ") + field + " value '" + cell + "'", line);
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) Fail(std::string("non-finite ") + field, line);
  }
  return value;
}

void ExpectHeader(const std::vector<std::pair<size_t, std::string>>& lines,
                  const char* header) {
  if (lines.empty() || lines.front().second != header) {
    throw std::runtime_error(std::string("missing header '") + header + "'");
  }
}

void ExpectCells(const std::vector<std::string>& cells, size_t count,
                 size_t line) {
  if (cells.size() != count) {
    Fail("expected " + std::to_string(count) + " fields, got " +
             std::to_string(cells.size()),
         line);
  }
}

}  // namespace

std::string FormatFloat(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

std::string ScoresToCsv(std::span<const TokenScore> scores) {
  std::string out = std::string(kScoresHeader) + "\n";
  for (const auto& s : scores) {
    out += std::to_string(s.token_id) + "," + FormatFloat(s.ks_statistic) + "," +
           FormatFloat(s.p_value) + "," + FormatFloat(s.cos) + "," +
           FormatFloat(s.abs_l2) + "," + FormatFloat(s.relative) + "," +
           FormatFloat(s.ratio) + "," + FormatFloat(s.kl) + ",";
    if (s.frequency) out += std::to_string(*s.frequency);
    out += "\n";
  }
  return out;
}

std::vector<TokenScore> ScoresFromCsv(const std::string& text) {
  const auto lines = Lines(text);
  ExpectHeader(lines, kScoresHeader);
  std::vector<TokenScore> scores;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto& [no, line] = lines[i];
    const auto cells = SplitCells(line);
    ExpectCells(cells, 9, no);
    TokenScore s;
    s.token_id = ParseNumber<size_t>(cells[0], "token_id", no);
    s.ks_statistic = ParseNumber<double>(cells[1], "ks_statistic", no);
    s.p_value = ParseNumber<double>(cells[2], "p_value", no);
    s.cos = ParseNumber<double>(cells[3], "cos", no);
    s.abs_l2 = ParseNumber<double>(cells[4], "abs_l2", no);
    s.relative = ParseNumber<double>(cells[5], "relative", no);
    s.ratio = ParseNumber<double>(cells[6], "ratio", no);
    s.kl = ParseNumber<double>(cells[7], "kl", no);
    if (!cells[8].empty()) {
      s.frequency = ParseNumber<uint64_t>(cells[8], "frequency", no);
    }
    if (s.ks_statistic < 0.0 || s.ks_statistic > 1.0 || s.p_value < 0.0 ||
        s.p_value > 1.0) {
      Fail("statistic or p-value outside [0, 1]", no);
    }
    scores.push_back(s);
  }
  for (size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].token_id != i) {
      throw std::runtime_error("scores must list token ids 0..V-1 in order");
    }
  }
  return scores;
}

std::string TicketsToJson(const WinningTicketSet& tickets) {
  ordered_json j;
  j["method"] = std::string(MetricName(tickets.method));
  j["alpha"] = tickets.alpha ? ordered_json(*tickets.alpha) : ordered_json();
  j["tau"] = tickets.tau ? ordered_json(*tickets.tau) : ordered_json();
  j["vocab_size"] = tickets.vocab_size;
  j["token_ids"] = tickets.token_ids;
  return j.dump(2) + "\n";
}

WinningTicketSet TicketsFromJson(const std::string& text) {
  WinningTicketSet t;
  try {
    const auto j = ordered_json::parse(text);
    t.method = ParseMetric(j.at("method").get<std::string>());
    if (j.contains("alpha") && !j.at("alpha").is_null()) {
      t.alpha = j.at("alpha").get<double>();
    }
    if (j.contains("tau") && !j.at("tau").is_null()) {
      t.tau = j.at("tau").get<double>();
    }
    t.vocab_size = j.at("vocab_size").get<size_t>();
    t.token_ids = j.at("token_ids").get<std::vector<size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed ticket file: ") + e.what());
  }
  ValidateTickets(t);
  return t;
}

std::string MaskToText(const RowMask& mask) {
  std::string out;
  out.reserve(mask.trainable.size() * 2);
  for (uint8_t flag : mask.trainable) out += flag ? "1\n" : "0\n";
  return out;
}

RowMask MaskFromText(const std::string& text) {
  RowMask mask;
  for (const auto& [no, line] : Lines(text)) {
    if (line != "0" && line != "1") Fail("mask lines must be 0 or 1", no);
    mask.trainable.push_back(line == "1");
  }
  mask.vocab_size = mask.trainable.size();
  return mask;
}

std::string PredictionLogToCsv(std::span<const PredictionRecord> records) {
  std::string out = std::string(kLogHeader) + "\n";
  for (const auto& r : records) {
    out += std::to_string(r.example_id) + "," + std::to_string(r.position) +
           "," + std::to_string(r.reference_token) + "," +
           std::to_string(r.tuned_prediction) + "," + FormatFloat(r.p1) + "," +
           FormatFloat(r.p2) + ",";
    if (r.partial_prediction) out += std::to_string(*r.partial_prediction);
    out += ",";
    if (r.base_p1) out += FormatFloat(*r.base_p1);
    out += ",";
    if (r.base_p2) out += FormatFloat(*r.base_p2);
    out += "\n";
  }
  return out;
}

std::vector<PredictionRecord> PredictionLogFromCsv(const std::string& text) {
  const auto lines = Lines(text);
  ExpectHeader(lines, kLogHeader);
  std::vector<PredictionRecord> records;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto& [no, line] = lines[i];
    const auto cells = SplitCells(line);
    ExpectCells(cells, 9, no);
    PredictionRecord r;
    r.example_id = ParseNumber<int64_t>(cells[0], "example_id", no);
    r.position = ParseNumber<int64_t>(cells[1], "position", no);
    r.reference_token = ParseNumber<uint32_t>(cells[2], "reference_id", no);
    r.tuned_prediction = ParseNumber<uint32_t>(cells[3], "tuned_pred_id", no);
    r.p1 = ParseNumber<double>(cells[4], "tuned_p1", no);
    r.p2 = ParseNumber<double>(cells[5], "tuned_p2", no);
    if (!cells[6].empty()) {
      r.partial_prediction = ParseNumber<uint32_t>(cells[6], "partial_pred_id", no);
    }
    if (!cells[7].empty()) r.base_p1 = ParseNumber<double>(cells[7], "base_p1", no);
    if (!cells[8].empty()) r.base_p2 = ParseNumber<double>(cells[8], "base_p2", no);
    try {
      ValidateRecord(r);
    } catch (const std::invalid_argument& e) {
      Fail(e.what(), no);
    }
    records.push_back(r);
  }
  return records;
}

std::string ReportsToJson(std::span<const CertificationReport> reports,
                          ProbSource source, std::optional<size_t> first_k) {
  ordered_json root;
  root["prob_source"] = std::string(ProbSourceName(source));
  root["first_k"] = first_k ? ordered_json(*first_k) : ordered_json();
  root["reports"] = ordered_json::array();
  for (const auto& r : reports) {
    ordered_json j;
    j["alpha"] = r.alpha;
    j["tau"] = r.tau;
    j["d"] = r.dim;
    j["n_records"] = r.n_records;
    j["certified_accuracy"] = r.certified_accuracy;
    j["prediction_accuracy"] =
        r.prediction_accuracy ? ordered_json(*r.prediction_accuracy)
                              : ordered_json();
    j["tuned_accuracy"] = r.tuned_accuracy;
    j["verified_percentage"] = r.verified_percentage;
    root["reports"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

std::string CountsToCsv(std::span<const uint64_t> counts) {
  std::string out = std::string(kCountsHeader) + "\n";
  for (size_t i = 0; i < counts.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(counts[i]) + "\n";
  }
  return out;
}

std::vector<uint64_t> CountsFromCsv(const std::string& text) {
  const auto lines = Lines(text);
  ExpectHeader(lines, kCountsHeader);
  std::vector<uint64_t> counts;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto& [no, line] = lines[i];
    const auto cells = SplitCells(line);
    ExpectCells(cells, 2, no);
    if (ParseNumber<size_t>(cells[0], "token_id", no) != counts.size()) {
      Fail("token ids must be listed 0..V-1 in order", no);
    }
    counts.push_back(ParseNumber<uint64_t>(cells[1], "count", no));
  }
  return counts;
}

std::vector<uint32_t> CorpusFromText(const std::string& text) {
  std::vector<uint32_t> corpus;
  size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) {
      ++j;
    }
    const std::string token = text.substr(i, j - i);
    uint32_t id = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), id);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw std::runtime_error("bad token id '" + token + "' at corpus position " +
                               std::to_string(corpus.size()));
    }
    corpus.push_back(id);
    i = j;
  }
  return corpus;
}

std::string CorpusToText(std::span<const uint32_t> corpus) {
  std::string out;
  for (size_t i = 0; i < corpus.size(); ++i) {
    out += std::to_string(corpus[i]);
    out += (i + 1) % 20 == 0 || i + 1 == corpus.size() ? "\n" : " ";
  }
  return out;
}

std::string TaskToCsv(const SyntheticTask& task) {
  std::string out = std::string(kTaskHeader) + "\n";
  for (const auto& [s, t] : task.pairs) {
    out += std::to_string(s) + "," + std::to_string(t) + "\n";
  }
  return out;
}

SyntheticTask TaskFromCsv(const std::string& text, size_t vocab_size) {
  const auto lines = Lines(text);
  ExpectHeader(lines, kTaskHeader);
  std::vector<TokenPair> pairs;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto& [no, line] = lines[i];
    const auto cells = SplitCells(line);
    ExpectCells(cells, 2, no);
    pairs.emplace_back(ParseNumber<uint32_t>(cells[0], "source", no),
                       ParseNumber<uint32_t>(cells[1], "target", no));
  }
  return TaskFromPairs(vocab_size, std::move(pairs));
}

std::string LossCurveToCsv(std::span<const double> losses) {
  std::string out = "epoch,loss\n";
  for (size_t i = 0; i < losses.size(); ++i) {
    out += std::to_string(i + 1) + "," + FormatFloat(losses[i]) + "\n";
  }
  return out;
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace ticketdiff
