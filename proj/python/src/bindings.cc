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

// Python bindings for the ticketdiff core.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ticketdiff/certify.h"
#include "ticketdiff/checkpoint.h"
#include "ticketdiff/ksstat.h"
#include "ticketdiff/selection.h"
#include "ticketdiff/text_io.h"
#include "ticketdiff/toytrain.h"
#include "ticketdiff/transfer.h"

namespace py = pybind11;

namespace ticketdiff {
namespace {

using FloatMatrix = py::array_t<float, py::array::c_style | py::array::forcecast>;

Sample ToSample(const std::vector<double>& values) { return Sample(values); }

TensorRecord RecordFromArray(const std::string& name, const FloatMatrix& array) {
  TensorRecord r;
  r.name = name;
  for (py::ssize_t i = 0; i < array.ndim(); ++i) {
    r.shape.push_back(static_cast<size_t>(array.shape(i)));
  }
  r.data.assign(array.data(), array.data() + array.size());
  return r;
}

py::array_t<float> ArrayFromRecord(const TensorRecord& r) {
  std::vector<py::ssize_t> shape(r.shape.begin(), r.shape.end());
  py::array_t<float> out(shape);
  std::copy(r.data.begin(), r.data.end(), out.mutable_data());
  return out;
}

Checkpoint CheckpointFromDict(const py::dict& tensors) {
  Checkpoint ckpt;
  for (const auto& [key, value] : tensors) {
    ckpt.tensors.push_back(
        RecordFromArray(py::cast<std::string>(key), py::cast<FloatMatrix>(value)));
  }
  return ckpt;
}

py::dict DictFromCheckpoint(const Checkpoint& ckpt) {
  py::dict out;
  for (const auto& t : ckpt.tensors) out[py::str(t.name)] = ArrayFromRecord(t);
  return out;
}

// Single-tensor checkpoint named "embed" holding a 2-D array.
Checkpoint MatrixCheckpoint(const FloatMatrix& m) {
  if (m.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  Checkpoint c;
  c.tensors.push_back(RecordFromArray("embed", m));
  return c;
}

WinningTicketSet TicketsFromIds(std::vector<size_t> ids, size_t vocab_size) {
  WinningTicketSet t;
  t.vocab_size = vocab_size;
  t.token_ids = std::move(ids);
  ValidateTickets(t);
  return t;
}

}  // namespace
}  // namespace ticketdiff

PYBIND11_MODULE(_ticketdiff, m) {
  using namespace ticketdiff;
  m.doc() = "Row-wise checkpoint diffing with two-sample KS tests.";

  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_ValueError);

  // KS statistics.
  py::class_<KsResult>(m, "KsResult")
      .def_readonly("statistic", &KsResult::statistic)
      .def_readonly("p_value", &KsResult::p_value)
      .def_readonly("n", &KsResult::n)
      .def_readonly("m", &KsResult::m)
      .def_readonly("tau", &KsResult::tau)
      .def_readonly("alpha", &KsResult::alpha)
      .def_readonly("reject", &KsResult::reject);
  m.def("ks_statistic",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return KsStatistic(ToSample(a), ToSample(b));
        },
        py::arg("a"), py::arg("b"));
  m.def("ks_critical_value", &KsCriticalValue, py::arg("alpha"), py::arg("n"),
        py::arg("m"));
  m.def("ks_threshold", &KsThreshold, py::arg("alpha"), py::arg("n"), py::arg("m"));
  m.def("ks_pvalue_asymptotic", &KsPValueAsymptotic, py::arg("statistic"),
        py::arg("n"), py::arg("m"), py::arg("stephens") = false);
  m.def("ks_pvalue_permutation",
        [](const std::vector<double>& a, const std::vector<double>& b,
           size_t trials, uint64_t seed) {
          return KsPValuePermutation(ToSample(a), ToSample(b), trials, seed);
        },
        py::arg("a"), py::arg("b"), py::arg("trials"), py::arg("seed"));
  m.def("ks_two_sample_test",
        [](const std::vector<double>& a, const std::vector<double>& b,
           double alpha) { return KsTwoSampleTest(ToSample(a), ToSample(b), alpha); },
        py::arg("a"), py::arg("b"), py::arg("alpha"));
  m.def("tau_from_pvalue_inversion", &TauFromPValueInversion, py::arg("alpha"),
        py::arg("n"), py::arg("m"));

  // Checkpoints as {name: float32 ndarray}.
  m.def("read_checkpoint",
        [](const std::filesystem::path& p) { return DictFromCheckpoint(ReadCheckpoint(p)); },
        py::arg("path"));
  m.def("write_checkpoint",
        [](const std::filesystem::path& p, const py::dict& tensors) {
          WriteCheckpoint(CheckpointFromDict(tensors), p);
        },
        py::arg("path"), py::arg("tensors"));

  // Scoring and selection.
  py::class_<TokenScore>(m, "TokenScore")
      .def_readonly("token_id", &TokenScore::token_id)
      .def_readonly("ks_statistic", &TokenScore::ks_statistic)
      .def_readonly("p_value", &TokenScore::p_value)
      .def_readonly("cos", &TokenScore::cos)
      .def_readonly("abs_l2", &TokenScore::abs_l2)
      .def_readonly("relative", &TokenScore::relative)
      .def_readonly("ratio", &TokenScore::ratio)
      .def_readonly("kl", &TokenScore::kl)
      .def_readwrite("frequency", &TokenScore::frequency);
  py::class_<WinningTicketSet>(m, "WinningTicketSet")
      .def_property_readonly("method",
                             [](const WinningTicketSet& t) {
                               return std::string(MetricName(t.method));
                             })
      .def_readonly("alpha", &WinningTicketSet::alpha)
      .def_readonly("tau", &WinningTicketSet::tau)
      .def_readonly("vocab_size", &WinningTicketSet::vocab_size)
      .def_readonly("token_ids", &WinningTicketSet::token_ids)
      .def("__contains__", &WinningTicketSet::Contains)
      .def("__len__", [](const WinningTicketSet& t) { return t.token_ids.size(); })
      .def("to_json", &TicketsToJson)
      .def_static("from_json", &TicketsFromJson)
      .def_static("from_ids", &TicketsFromIds, py::arg("token_ids"),
                  py::arg("vocab_size"));

  m.def("analyze_pair",
        [](const FloatMatrix& base, const FloatMatrix& tuned) {
          const auto b = MatrixCheckpoint(base);
          const auto t = MatrixCheckpoint(tuned);
          ValidatePair(b, t, "embed");
          return AnalyzePair(GetEmbedding(b, "embed"), GetEmbedding(t, "embed"));
        },
        py::arg("base"), py::arg("tuned"));
  m.def("select_by_alpha",
        [](const std::vector<TokenScore>& s, double alpha, size_t dim) {
          return SelectByAlpha(s, alpha, dim);
        },
        py::arg("scores"), py::arg("alpha"), py::arg("dim"));
  m.def("select_top_k",
        [](const std::vector<TokenScore>& s, const std::string& metric, size_t k) {
          return SelectTopK(s, ParseMetric(metric), k);
        },
        py::arg("scores"), py::arg("metric"), py::arg("k"));
  m.def("normalized_rank",
        [](const std::vector<TokenScore>& s, const std::string& metric,
           size_t token_id) { return NormalizedRank(s, ParseMetric(metric), token_id); },
        py::arg("scores"), py::arg("metric"), py::arg("token_id"));
  m.def("count_frequencies",
        [](const std::vector<uint32_t>& corpus, size_t vocab_size) {
          return CountFrequencies(corpus, vocab_size);
        },
        py::arg("corpus"), py::arg("vocab_size"));
  m.def("select_by_frequency",
        [](const std::vector<uint64_t>& counts, size_t k) {
          return SelectByFrequency(counts, k);
        },
        py::arg("counts"), py::arg("k"));
  m.def("compare_ticket_distributions",
        [](const FloatMatrix& a, const FloatMatrix& b,
           const WinningTicketSet& tickets, double alpha) {
          const auto ca = MatrixCheckpoint(a);
          const auto cb = MatrixCheckpoint(b);
          return CompareTicketDistributions(GetEmbedding(ca, "embed"),
                                            GetEmbedding(cb, "embed"), tickets,
                                            alpha);
        },
        py::arg("tuned_a"), py::arg("tuned_b"), py::arg("tickets"),
        py::arg("alpha"));

  // Transfer.
  m.def("splice_rows",
        [](const FloatMatrix& base, const FloatMatrix& tuned,
           const WinningTicketSet& tickets) {
          const auto out = SplicePartialTransfer(MatrixCheckpoint(base),
                                                 MatrixCheckpoint(tuned), "embed",
                                                 tickets);
          return ArrayFromRecord(out.tensors[0]);
        },
        py::arg("base"), py::arg("tuned"), py::arg("tickets"),
        "Copy of base with the ticket rows taken from tuned, bit for bit.");
  m.def("emit_mask",
        [](const WinningTicketSet& tickets, bool complement) {
          const auto mask = EmitMask(tickets, complement);
          return std::vector<bool>(mask.trainable.begin(), mask.trainable.end());
        },
        py::arg("tickets"), py::arg("complement") = false);

  // Certification.
  py::class_<PredictionRecord>(m, "PredictionRecord")
      .def(py::init([](int64_t example_id, int64_t position, uint32_t reference,
                       uint32_t tuned_prediction, double p1, double p2,
                       std::optional<uint32_t> partial_prediction,
                       std::optional<double> base_p1, std::optional<double> base_p2) {
             PredictionRecord r{example_id, position, reference, tuned_prediction,
                                p1, p2, partial_prediction, base_p1, base_p2};
             ValidateRecord(r);
             return r;
           }),
           py::arg("example_id"), py::arg("position"), py::arg("reference_token"),
           py::arg("tuned_prediction"), py::arg("p1"), py::arg("p2"),
           py::arg("partial_prediction") = py::none(),
           py::arg("base_p1") = py::none(), py::arg("base_p2") = py::none())
      .def_readonly("example_id", &PredictionRecord::example_id)
      .def_readonly("position", &PredictionRecord::position)
      .def_readonly("reference_token", &PredictionRecord::reference_token)
      .def_readonly("tuned_prediction", &PredictionRecord::tuned_prediction)
      .def_readonly("p1", &PredictionRecord::p1)
      .def_readonly("p2", &PredictionRecord::p2)
      .def_readonly("partial_prediction", &PredictionRecord::partial_prediction)
      .def_readonly("base_p1", &PredictionRecord::base_p1)
      .def_readonly("base_p2", &PredictionRecord::base_p2);
  py::class_<CertificationReport>(m, "CertificationReport")
      .def_readonly("alpha", &CertificationReport::alpha)
      .def_readonly("tau", &CertificationReport::tau)
      .def_readonly("dim", &CertificationReport::dim)
      .def_readonly("n_records", &CertificationReport::n_records)
      .def_readonly("certified_accuracy", &CertificationReport::certified_accuracy)
      .def_readonly("prediction_accuracy", &CertificationReport::prediction_accuracy)
      .def_readonly("tuned_accuracy", &CertificationReport::tuned_accuracy)
      .def_readonly("verified_percentage", &CertificationReport::verified_percentage);
  m.def("certify_record",
        [](const PredictionRecord& r, double tau, const std::string& source) {
          return CertifyRecord(r, tau, ParseProbSource(source));
        },
        py::arg("record"), py::arg("tau"), py::arg("prob_source") = "tuned");
  m.def("certification_report",
        [](const std::vector<PredictionRecord>& records, double alpha, size_t dim,
           const std::string& source, std::optional<size_t> first_k) {
          return MakeCertificationReport(records, alpha, dim,
                                         ParseProbSource(source), first_k);
        },
        py::arg("records"), py::arg("alpha"), py::arg("dim"),
        py::arg("prob_source") = "tuned", py::arg("first_k") = py::none());
  m.def("alpha_sweep",
        [](const std::vector<PredictionRecord>& records,
           const std::vector<double>& alphas, size_t dim, const std::string& source,
           std::optional<size_t> first_k) {
          return AlphaSweep(records, alphas, dim, ParseProbSource(source), first_k);
        },
        py::arg("records"), py::arg("alphas"), py::arg("dim"),
        py::arg("prob_source") = "tuned", py::arg("first_k") = py::none());

  // Toy trainer.
  py::class_<SyntheticTask>(m, "SyntheticTask")
      .def_readonly("vocab_size", &SyntheticTask::vocab_size)
      .def_readonly("content_tokens", &SyntheticTask::content_tokens)
      .def_readonly("pairs", &SyntheticTask::pairs)
      .def("source_corpus", &SyntheticTask::SourceCorpus);
  py::class_<ToyModel>(m, "ToyModel")
      .def_readonly("vocab_size", &ToyModel::vocab_size)
      .def_readonly("dim", &ToyModel::dim)
      .def_property_readonly("embedding",
                             [](const ToyModel& t) {
                               return ArrayFromRecord(*ToCheckpoint(t).Find(kEmbeddingTensor));
                             })
      .def_property_readonly("output_weights",
                             [](const ToyModel& t) {
                               return ArrayFromRecord(*ToCheckpoint(t).Find(kOutputTensor));
                             })
      .def("to_checkpoint",
           [](const ToyModel& t) { return DictFromCheckpoint(ToCheckpoint(t)); })
      .def_static("from_checkpoint", [](const py::dict& tensors) {
        return ModelFromCheckpoint(CheckpointFromDict(tensors));
      });
  m.def("generate_task", &GenerateTask, py::arg("seed"), py::arg("vocab_size"),
        py::arg("n_pairs") = 4096, py::arg("zipf_exponent") = 1.0);
  m.def("init_model", &InitModel, py::arg("seed"), py::arg("vocab_size"),
        py::arg("dim"));
  m.def("forward", &Forward, py::arg("model"), py::arg("source_token"));
  m.def("train",
        [](const ToyModel& model, const SyntheticTask& task, const std::string& mode,
           std::optional<WinningTicketSet> tickets, double lr, size_t epochs,
           uint64_t seed, size_t batch_size) {
          TrainConfig c;
          c.mode = ParseTrainMode(mode);
          c.tickets = std::move(tickets);
          c.learning_rate = lr;
          c.epochs = epochs;
          c.seed = seed;
          c.batch_size = batch_size;
          const auto result = Train(model, task, c);
          return py::make_tuple(result.model, result.loss_curve);
        },
        py::arg("model"), py::arg("task"), py::arg("mode") = "embed",
        py::arg("tickets") = py::none(), py::arg("lr") = 0.1,
        py::arg("epochs") = 50, py::arg("seed") = 0, py::arg("batch_size") = 32,
        "Returns (tuned_model, loss_curve).");
  m.def("evaluate", &Evaluate, py::arg("model"), py::arg("task"));
  m.def("mean_loss", &MeanLoss, py::arg("model"), py::arg("task"));
  m.def("emit_prediction_log", &EmitPredictionLog, py::arg("tuned"),
        py::arg("partial"), py::arg("base"), py::arg("task"));
  m.def("grad_check",
        [](const ToyModel& model, const SyntheticTask& task, double epsilon,
           uint64_t seed) {
          GradCheckOptions o;
          o.epsilon = epsilon;
          o.seed = seed;
          return GradCheck(model, task, o);
        },
        py::arg("model"), py::arg("task"), py::arg("epsilon") = 1e-4,
        py::arg("seed") = 0);
}
