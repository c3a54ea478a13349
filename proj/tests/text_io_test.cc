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

#include <filesystem>

#include "gtest/gtest.h"
#include "nlohmann/json.hpp"
#include "oracles.h"

namespace ticketdiff {
namespace {

TEST(FormatFloat, NineSignificantDigits) {
  EXPECT_EQ(FormatFloat(0.1), "0.1");
  EXPECT_EQ(FormatFloat(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(FormatFloat(0.0), "0");
  EXPECT_EQ(FormatFloat(12345678912.0), "1.23456789e+10");
}

TEST(Scores, CsvRoundTrip) {
  const auto pair = oracles::RandomDifferingPair(6, 8, 1);
  auto scores = AnalyzePair(GetEmbedding(pair.base, "embed"),
                            GetEmbedding(pair.tuned, "embed"));
  scores[2].frequency = 17;
  const std::string csv = ScoresToCsv(scores);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "token_id,ks_statistic,p_value,cos,abs_l2,relative,ratio,kl,frequency");
  const auto back = ScoresFromCsv(csv);
  ASSERT_EQ(back.size(), 6u);
  EXPECT_EQ(back[2].frequency, 17u);
  EXPECT_FALSE(back[1].frequency.has_value());
  for (size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(back[i].token_id, i);
    EXPECT_NEAR(back[i].ks_statistic, scores[i].ks_statistic, 1e-8);
    EXPECT_NEAR(back[i].kl, scores[i].kl, 1e-8 * (1 + scores[i].kl));
  }
  // Writing what was read gives the same text.
  EXPECT_EQ(ScoresToCsv(back), csv);
}

TEST(Scores, CsvErrors) {
  EXPECT_THROW(ScoresFromCsv("id,x\n"), std::runtime_error);
  const std::string header =
      "token_id,ks_statistic,p_value,cos,abs_l2,relative,ratio,kl,frequency\n";
  EXPECT_THROW(ScoresFromCsv(header + "0,0.5,0.1,1,0,0,0,0\n"), std::runtime_error);
  EXPECT_THROW(ScoresFromCsv(header + "0,abc,0.1,1,0,0,0,0,\n"), std::runtime_error);
  EXPECT_THROW(ScoresFromCsv(header + "1,0.5,0.1,1,0,0,0,0,\n"), std::runtime_error);
}

TEST(Tickets, JsonRoundTrip) {
  WinningTicketSet t;
  t.method = Metric::kKs;
  t.alpha = 0.05;
  t.tau = 0.24;
  t.vocab_size = 10;
  t.token_ids = {1, 4, 9};
  const std::string text = TicketsToJson(t);
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["method"], "ks");
  EXPECT_EQ(j["vocab_size"], 10);
  EXPECT_EQ(j["token_ids"], nlohmann::json({1, 4, 9}));
  const auto back = TicketsFromJson(text);
  EXPECT_EQ(back.token_ids, t.token_ids);
  EXPECT_EQ(back.alpha, t.alpha);
  EXPECT_EQ(back.tau, t.tau);

  WinningTicketSet top;
  top.method = Metric::kCos;
  top.vocab_size = 3;
  const auto top_json = nlohmann::json::parse(TicketsToJson(top));
  EXPECT_TRUE(top_json["alpha"].is_null());
  const auto top_back = TicketsFromJson(TicketsToJson(top));
  EXPECT_FALSE(top_back.alpha.has_value());
  EXPECT_EQ(top_back.method, Metric::kCos);
}

TEST(Tickets, JsonErrors) {
  EXPECT_THROW(TicketsFromJson("{"), std::runtime_error);
  EXPECT_THROW(TicketsFromJson(R"({"method":"ks","vocab_size":4})"),
               std::runtime_error);
  EXPECT_THROW(
      TicketsFromJson(R"({"method":"ks","vocab_size":4,"token_ids":[3,1]})"),
      std::invalid_argument);
  EXPECT_THROW(
      TicketsFromJson(R"({"method":"ks","vocab_size":4,"token_ids":[4]})"),
      std::invalid_argument);
}

TEST(Mask, TextRoundTrip) {
  RowMask m{4, {1, 0, 1, 0}};
  EXPECT_EQ(MaskToText(m), "1\n0\n1\n0\n");
  const auto back = MaskFromText("1\n0\n1\n0\n");
  EXPECT_EQ(back.vocab_size, 4u);
  EXPECT_EQ(back.trainable, m.trainable);
  EXPECT_THROW(MaskFromText("1\n2\n"), std::runtime_error);
}

TEST(PredictionLog, CsvRoundTrip) {
  PredictionRecord a;
  a.example_id = 0;
  a.position = 3;
  a.reference_token = 7;
  a.tuned_prediction = 7;
  a.p1 = 0.75;
  a.p2 = 0.125;
  PredictionRecord b = a;
  b.position = 4;
  b.partial_prediction = 2;
  b.base_p1 = 0.5;
  b.base_p2 = 0.25;
  const std::vector<PredictionRecord> recs = {a, b};
  const std::string csv = PredictionLogToCsv(recs);
  EXPECT_EQ(csv,
            "example_id,position,reference_id,tuned_pred_id,tuned_p1,tuned_p2,"
            "partial_pred_id,base_p1,base_p2\n"
            "0,3,7,7,0.75,0.125,,,\n"
            "0,4,7,7,0.75,0.125,2,0.5,0.25\n");
  const auto back = PredictionLogFromCsv(csv);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_FALSE(back[0].partial_prediction.has_value());
  EXPECT_EQ(back[1].partial_prediction, 2u);
  EXPECT_EQ(back[1].base_p2, 0.25);
  EXPECT_EQ(PredictionLogToCsv(back), csv);
}

TEST(PredictionLog, CsvErrors) {
  const std::string header =
      "example_id,position,reference_id,tuned_pred_id,tuned_p1,tuned_p2,"
      "partial_pred_id,base_p1,base_p2\n";
  EXPECT_THROW(PredictionLogFromCsv(header + "0,0,1,1,0.2,0.7,,,\n"),
               std::runtime_error);
  EXPECT_THROW(PredictionLogFromCsv(header + "0,0,1,1,0.7\n"), std::runtime_error);
  try {
    PredictionLogFromCsv(header + "0,0,1,1,0.7,0.2,,,\n0,1,x,1,0.7,0.2,,,\n");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Reports, JsonShape) {
  CertificationReport r;
  r.alpha = 0.05;
  r.tau = 0.24;
  r.dim = 64;
  r.n_records = 10;
  r.certified_accuracy = 0.5;
  r.tuned_accuracy = 0.8;
  r.verified_percentage = 0.6;
  const std::vector<CertificationReport> reps = {r};
  const auto j = nlohmann::json::parse(ReportsToJson(reps, ProbSource::kBase, 20));
  EXPECT_EQ(j["prob_source"], "base");
  EXPECT_EQ(j["first_k"], 20);
  ASSERT_EQ(j["reports"].size(), 1u);
  const auto& rep = j["reports"][0];
  for (const char* key : {"alpha", "tau", "d", "n_records", "certified_accuracy",
                          "prediction_accuracy", "tuned_accuracy",
                          "verified_percentage"}) {
    EXPECT_TRUE(rep.contains(key)) << key;
  }
  EXPECT_TRUE(rep["prediction_accuracy"].is_null());
  EXPECT_TRUE(nlohmann::json::parse(ReportsToJson(reps, ProbSource::kTuned,
                                                  std::nullopt))["first_k"]
                  .is_null());
}

TEST(Counts, CsvRoundTrip) {
  const std::vector<uint64_t> counts = {0, 2, 1, 0};
  const std::string csv = CountsToCsv(counts);
  EXPECT_EQ(csv, "token_id,count\n0,0\n1,2\n2,1\n3,0\n");
  EXPECT_EQ(CountsFromCsv(csv), counts);
  EXPECT_THROW(CountsFromCsv("token_id,count\n1,2\n"), std::runtime_error);
}

TEST(Corpus, TextRoundTrip) {
  const std::vector<uint32_t> corpus = {3, 1, 4, 1, 5};
  EXPECT_EQ(CorpusFromText(CorpusToText(corpus)), corpus);
  EXPECT_EQ(CorpusFromText("  7\n\t8 9\n"), (std::vector<uint32_t>{7, 8, 9}));
  EXPECT_TRUE(CorpusFromText("").empty());
  EXPECT_THROW(CorpusFromText("1 two 3"), std::runtime_error);
  EXPECT_THROW(CorpusFromText("1 -2"), std::runtime_error);
}

TEST(Task, CsvRoundTrip) {
  const auto task = GenerateTask(4, 16, 30, 1.0);
  const std::string csv = TaskToCsv(task);
  EXPECT_EQ(csv.substr(0, 14), "source,target\n");
  const auto back = TaskFromCsv(csv, 16);
  EXPECT_EQ(back.pairs, task.pairs);
  EXPECT_THROW(TaskFromCsv(csv, 4), std::invalid_argument);
}

TEST(LossCurve, Csv) {
  const std::vector<double> losses = {2.5, 1.25};
  EXPECT_EQ(LossCurveToCsv(losses), "epoch,loss\n1,2.5\n2,1.25\n");
}

TEST(Files, ReadWrite) {
  const auto p = std::filesystem::temp_directory_path() / "ticketdiff_text_io.txt";
  WriteTextFile(p, "a\nb\n");
  EXPECT_EQ(ReadTextFile(p), "a\nb\n");
  std::filesystem::remove(p);
  EXPECT_THROW(ReadTextFile(p), std::runtime_error);
  EXPECT_THROW(WriteTextFile("/nonexistent-dir/x.txt", "x"), std::runtime_error);
}

}  // namespace
}  // namespace ticketdiff
