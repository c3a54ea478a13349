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

#include "ticketdiff/cli.h"

#include <algorithm>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ticketdiff/certify.h"
#include "ticketdiff/checkpoint.h"
#include "ticketdiff/selection.h"
#include "ticketdiff/text_io.h"
#include "ticketdiff/toytrain.h"
#include "ticketdiff/transfer.h"

namespace ticketdiff::cli {
namespace {

// Raised for flag combinations CLI11 cannot express.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string base, tuned, tensor, out, freq, scores, tickets, log, corpus;
  std::string method, prob_source = "tuned", alphas_text;
  std::string model, task, mode = "embed", partial, corpus_out, loss_out;
  std::string tickets_out, csv;
  double alpha = 0.0;
  size_t dim = 0;
  size_t top_k = 0;
  size_t first_k = 0;
  size_t vocab = 0;
  size_t pairs = 4096;
  double zipf = 1.0;
  uint64_t seed = 0;
  double lr = 0.1;
  size_t epochs = 50;
  size_t batch = 32;
  bool complement = false;
};

std::vector<double> ParseAlphaList(const std::string& text) {
  std::vector<double> alphas;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      alphas.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad alpha value '" + item + "'");
    }
  }
  if (alphas.empty()) throw UsageError("--alpha needs at least one value");
  return alphas;
}

void RunAnalyze(const Options& o) {
  const Checkpoint base = ReadCheckpoint(o.base);
  const Checkpoint tuned = ReadCheckpoint(o.tuned);
  ValidatePair(base, tuned, o.tensor);
  auto scores =
      AnalyzePair(GetEmbedding(base, o.tensor), GetEmbedding(tuned, o.tensor));
  if (!o.freq.empty()) {
    const auto counts = CountsFromCsv(ReadTextFile(o.freq));
    if (counts.size() != scores.size()) {
      throw std::runtime_error("frequency table has " +
                               std::to_string(counts.size()) +
                               " rows, tensor has " +
                               std::to_string(scores.size()));
    }
    for (size_t i = 0; i < scores.size(); ++i) scores[i].frequency = counts[i];
  }
  WriteTextFile(o.out, ScoresToCsv(scores));
}

void RunSelect(const Options& o, bool by_alpha) {
  const auto scores = ScoresFromCsv(ReadTextFile(o.scores));
  const WinningTicketSet tickets =
      by_alpha ? SelectByAlpha(scores, o.alpha, o.dim)
               : SelectTopK(scores, ParseMetric(o.method), o.top_k);
  WriteTextFile(o.out, TicketsToJson(tickets));
}

void RunMask(const Options& o) {
  const auto tickets = TicketsFromJson(ReadTextFile(o.tickets));
  WriteTextFile(o.out, MaskToText(EmitMask(tickets, o.complement)));
}

void RunTransfer(const Options& o) {
  const Checkpoint base = ReadCheckpoint(o.base);
  const Checkpoint tuned = ReadCheckpoint(o.tuned);
  const auto tickets = TicketsFromJson(ReadTextFile(o.tickets));
  WriteCheckpoint(SplicePartialTransfer(base, tuned, o.tensor, tickets), o.out);
}

void RunCertify(const Options& o, bool has_first_k) {
  const auto alphas = ParseAlphaList(o.alphas_text);
  const auto source = ParseProbSource(o.prob_source);
  const auto records = PredictionLogFromCsv(ReadTextFile(o.log));
  const std::optional<size_t> first_k =
      has_first_k ? std::optional<size_t>(o.first_k) : std::nullopt;
  const auto reports = AlphaSweep(records, alphas, o.dim, source, first_k);
  WriteTextFile(o.out, ReportsToJson(reports, source, first_k));
}

void RunFreq(const Options& o, bool has_top_k) {
  const auto corpus = CorpusFromText(ReadTextFile(o.corpus));
  const auto counts = CountFrequencies(corpus, o.vocab);
  WriteTextFile(o.out, CountsToCsv(counts));
  if (has_top_k) {
    WriteTextFile(o.tickets_out, TicketsToJson(SelectByFrequency(counts, o.top_k)));
  }
}

void RunImportCsv(const Options& o) {
  WriteCheckpoint(ImportCsvMatrix(o.csv, o.tensor), o.out);
}

void RunToyGen(const Options& o) {
  const auto task = GenerateTask(o.seed, o.vocab, o.pairs, o.zipf);
  WriteTextFile(o.out, TaskToCsv(task));
  if (!o.corpus_out.empty()) {
    WriteTextFile(o.corpus_out, CorpusToText(task.SourceCorpus()));
  }
}

void RunToyInit(const Options& o) {
  WriteCheckpoint(ToCheckpoint(InitModel(o.seed, o.vocab, o.dim)), o.out);
}

void RunToyTrain(const Options& o) {
  const ToyModel model = ModelFromCheckpoint(ReadCheckpoint(o.model));
  const auto task = TaskFromCsv(ReadTextFile(o.task), model.vocab_size);
  TrainConfig config;
  config.mode = ParseTrainMode(o.mode);
  if (!o.tickets.empty()) config.tickets = TicketsFromJson(ReadTextFile(o.tickets));
  config.learning_rate = o.lr;
  config.epochs = o.epochs;
  config.seed = o.seed;
  config.batch_size = o.batch;
  ValidateTrainConfig(config, model.vocab_size);
  const auto result = Train(model, task, config);
  WriteCheckpoint(ToCheckpoint(result.model), o.out);
  if (!o.loss_out.empty()) WriteTextFile(o.loss_out, LossCurveToCsv(result.loss_curve));
}

void RunToyEval(const Options& o, std::ostream& out) {
  const ToyModel model = ModelFromCheckpoint(ReadCheckpoint(o.model));
  const auto task = TaskFromCsv(ReadTextFile(o.task), model.vocab_size);
  const std::string line = "accuracy," + FormatFloat(Evaluate(model, task)) +
                           "\nmean_loss," + FormatFloat(MeanLoss(model, task)) +
                           "\n";
  if (o.out.empty()) {
    out << line;
  } else {
    WriteTextFile(o.out, line);
  }
}

void RunToyPredictLog(const Options& o) {
  const ToyModel tuned = ModelFromCheckpoint(ReadCheckpoint(o.tuned));
  const ToyModel partial = ModelFromCheckpoint(ReadCheckpoint(o.partial));
  const ToyModel base = ModelFromCheckpoint(ReadCheckpoint(o.base));
  const auto task = TaskFromCsv(ReadTextFile(o.task), tuned.vocab_size);
  WriteTextFile(o.out,
                PredictionLogToCsv(EmitPredictionLog(tuned, partial, base, task)));
}

void RunToyGradCheck(const Options& o, std::ostream& out) {
  const ToyModel model = ModelFromCheckpoint(ReadCheckpoint(o.model));
  const auto task = TaskFromCsv(ReadTextFile(o.task), model.vocab_size);
  GradCheckOptions options;
  options.seed = o.seed;
  out << "max_relative_error," << FormatFloat(GradCheck(model, task, options))
      << "\n";
}

// Help text of the deepest subcommand that was selected on the command line.
std::string SelectedHelp(const CLI::App& app) {
  const CLI::App* current = &app;
  while (true) {
    const auto subs = current->get_subcommands();
    if (subs.empty()) break;
    current = subs.front();
  }
  return current->help();
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app{"Checkpoint diff toolkit: per-row KS analysis, ticket selection, "
               "partial transfer and certification",
               "ticketdiff"};
  app.require_subcommand(1);

  auto* analyze = app.add_subcommand("analyze", "Score every row of a tensor pair");
  analyze->add_option("--base", o.base, "Checkpoint before tuning")->required();
  analyze->add_option("--tuned", o.tuned, "Checkpoint after tuning")->required();
  analyze->add_option("--tensor", o.tensor, "2-D tensor name")->required();
  analyze->add_option("--freq", o.freq, "Frequency counts CSV (token_id,count)");
  analyze->add_option("--out", o.out, "Scores CSV")->required();

  auto* select = app.add_subcommand("select", "Select winning-ticket rows");
  select->add_option("--scores", o.scores, "Scores CSV")->required();
  auto* alpha_opt =
      select->add_option("--alpha", o.alpha, "Significance level in (0, 1]");
  auto* dim_opt = select->add_option("--dim", o.dim, "Row length d");
  auto* method_opt = select->add_option(
      "--method", o.method, "ks|cos|abs|relative|ratio|kl|frequency");
  auto* topk_opt = select->add_option("--top-k", o.top_k, "Rows to keep");
  alpha_opt->excludes(method_opt)->excludes(topk_opt);
  dim_opt->excludes(method_opt)->excludes(topk_opt);
  select->add_option("--out", o.out, "Ticket file")->required();

  auto* mask = app.add_subcommand("mask", "Emit a per-row trainable mask");
  mask->add_option("--tickets", o.tickets, "Ticket file")->required();
  mask->add_flag("--complement", o.complement, "Train every row except tickets");
  mask->add_option("--out", o.out, "Mask text file")->required();

  auto* transfer =
      app.add_subcommand("transfer", "Splice tuned ticket rows into the base");
  transfer->add_option("--base", o.base, "Checkpoint before tuning")->required();
  transfer->add_option("--tuned", o.tuned, "Checkpoint after tuning")->required();
  transfer->add_option("--tensor", o.tensor, "2-D tensor name")->required();
  transfer->add_option("--tickets", o.tickets, "Ticket file")->required();
  transfer->add_option("--out", o.out, "Output checkpoint")->required();

  auto* certify = app.add_subcommand("certify", "Certified accuracy per alpha");
  certify->add_option("--log", o.log, "Prediction log CSV")->required();
  certify->add_option("--dim", o.dim, "Row length d")->required();
  certify->add_option("--alpha", o.alphas_text, "Comma-separated alphas")
      ->required();
  certify->add_option("--prob-source", o.prob_source, "tuned|base")
      ->check(CLI::IsMember({"tuned", "base"}));
  auto* first_k_opt =
      certify->add_option("--first-k", o.first_k, "Keep positions < K per example");
  certify->add_option("--out", o.out, "Report file")->required();

  auto* freq = app.add_subcommand("freq", "Token frequencies of a corpus");
  freq->add_option("--corpus", o.corpus, "Whitespace-separated token ids")
      ->required();
  freq->add_option("--vocab", o.vocab, "Vocabulary size")->required();
  auto* freq_topk =
      freq->add_option("--top-k", o.top_k, "Also select the K most frequent");
  auto* freq_tickets =
      freq->add_option("--tickets-out", o.tickets_out, "Ticket file for --top-k");
  freq_topk->needs(freq_tickets);
  freq_tickets->needs(freq_topk);
  freq->add_option("--out", o.out, "Counts CSV")->required();

  auto* import_csv =
      app.add_subcommand("import-csv", "Wrap a CSV matrix in a checkpoint");
  import_csv->add_option("--csv", o.csv, "Comma-separated rows, no header")
      ->required();
  import_csv->add_option("--tensor", o.tensor, "Tensor name")->required();
  import_csv->add_option("--out", o.out, "Output checkpoint")->required();

  auto* toy = app.add_subcommand("toy", "Small synthetic trainer");
  toy->require_subcommand(1);
  auto* gen = toy->add_subcommand("gen", "Generate a synthetic mapping task");
  gen->add_option("--seed", o.seed)->required();
  gen->add_option("--vocab", o.vocab)->required();
  gen->add_option("--pairs", o.pairs, "Number of pairs")->capture_default_str();
  gen->add_option("--zipf", o.zipf, "Zipf exponent")->capture_default_str();
  gen->add_option("--out", o.out, "Task CSV")->required();
  gen->add_option("--corpus-out", o.corpus_out, "Source-token corpus");

  auto* init = toy->add_subcommand("init", "Initialize a random model");
  init->add_option("--seed", o.seed)->required();
  init->add_option("--vocab", o.vocab)->required();
  init->add_option("--dim", o.dim)->required();
  init->add_option("--out", o.out, "Model checkpoint")->required();

  auto* train = toy->add_subcommand("train", "Train a model");
  train->add_option("--model", o.model, "Starting checkpoint")->required();
  train->add_option("--task", o.task, "Task CSV")->required();
  train->add_option("--mode", o.mode, "full|embed|partial|frozen_complement")
      ->check(CLI::IsMember({"full", "embed", "partial", "frozen_complement"}))
      ->capture_default_str();
  train->add_option("--tickets", o.tickets, "Ticket file");
  train->add_option("--lr", o.lr)->capture_default_str();
  train->add_option("--epochs", o.epochs)->capture_default_str();
  train->add_option("--batch", o.batch)->capture_default_str();
  train->add_option("--seed", o.seed)->capture_default_str();
  train->add_option("--out", o.out, "Tuned checkpoint")->required();
  train->add_option("--loss-out", o.loss_out, "Per-epoch loss CSV");

  auto* eval = toy->add_subcommand("eval", "Accuracy and loss on a task");
  eval->add_option("--model", o.model)->required();
  eval->add_option("--task", o.task)->required();
  eval->add_option("--out", o.out, "Write results here instead of stdout");

  auto* predict_log =
      toy->add_subcommand("predict-log", "Prediction log for certification");
  predict_log->add_option("--tuned", o.tuned)->required();
  predict_log->add_option("--partial", o.partial)->required();
  predict_log->add_option("--base", o.base)->required();
  predict_log->add_option("--task", o.task)->required();
  predict_log->add_option("--out", o.out, "Prediction log CSV")->required();

  auto* gradcheck = toy->add_subcommand("gradcheck", "Finite-difference check");
  gradcheck->add_option("--model", o.model)->required();
  gradcheck->add_option("--task", o.task)->required();
  gradcheck->add_option("--seed", o.seed)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (select->parsed()) {
      const bool by_alpha = alpha_opt->count() > 0;
      const bool by_rank = method_opt->count() > 0;
      if (by_alpha != (dim_opt->count() > 0) ||
          by_rank != (topk_opt->count() > 0) || by_alpha == by_rank) {
        throw UsageError("select needs either --alpha and --dim, or --method "
                         "and --top-k");
      }
    }
  } catch (const CLI::CallForHelp&) {
    out << SelectedHelp(app);
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << SelectedHelp(app);
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << SelectedHelp(app);
    return kExitUsage;
  }

  try {
    if (analyze->parsed()) RunAnalyze(o);
    if (select->parsed()) RunSelect(o, alpha_opt->count() > 0);
    if (mask->parsed()) RunMask(o);
    if (transfer->parsed()) RunTransfer(o);
    if (certify->parsed()) RunCertify(o, first_k_opt->count() > 0);
    if (freq->parsed()) RunFreq(o, freq_topk->count() > 0);
    if (import_csv->parsed()) RunImportCsv(o);
    if (gen->parsed()) RunToyGen(o);
    if (init->parsed()) RunToyInit(o);
    if (train->parsed()) RunToyTrain(o);
    if (eval->parsed()) RunToyEval(o, out);
    if (predict_log->parsed()) RunToyPredictLog(o);
    if (gradcheck->parsed()) RunToyGradCheck(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace ticketdiff::cli
