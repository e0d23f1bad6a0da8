// python/bindings.cc


// Copyright 2026  The mhctc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mhctc/ctc.h"
#include "mhctc/decode.h"
#include "mhctc/errors.h"
#include "mhctc/features.h"
#include "mhctc/io.h"
#include "mhctc/mh_loss.h"
#include "mhctc/model.h"
#include "mhctc/oracle.h"
#include "mhctc/pipeline.h"
#include "mhctc/scoring.h"

namespace py = pybind11;
using namespace mhctc;

namespace {

Transcription labels(const std::vector<int> &v) { return Transcription{v}; }

HypothesisSet hypothesis_set(const std::vector<std::vector<int>> &hyps,
                             std::optional<std::vector<std::string>> tags) {
  if (tags && tags->size() != hyps.size())
    throw InvalidInput("need one source tag per hypothesis");
  HypothesisSet hs;
  for (size_t i = 0; i < hyps.size(); ++i) {
    hs.hypotheses.push_back(labels(hyps[i]));
    hs.source_tags.push_back(tags ? (*tags)[i] : "h" + std::to_string(i));
  }
  return hs;
}

py::dict wer_dict(const WerReport &r) {
  py::dict d;
  d["substitutions"] = r.substitutions;
  d["insertions"] = r.insertions;
  d["deletions"] = r.deletions;
  d["ref_words"] = r.ref_words;
  d["errors"] = r.errors();
  d["wer"] = r.wer();
  return d;
}

FeatureConfig feature_config(const std::string &kind, bool add_deltas) {
  FeatureConfig f;
  f.kind = feature_kind_from_string(kind);
  f.add_deltas = add_deltas;
  return f;
}

}  // namespace

PYBIND11_MODULE(_mhctc, m) {
  m.doc() = "Multiple-hypothesis CTC toolkit";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidLabel>(m, "InvalidLabel", error.ptr());
  py::register_exception<InvalidInput>(m, "InvalidInput", error.ptr());
  py::register_exception<InfeasibleAlignment>(m, "InfeasibleAlignment", error.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<DivergedError>(m, "DivergedError", error.ptr());
  py::register_exception<TooShort>(m, "TooShort", error.ptr());
  py::register_exception<SizeError>(m, "SizeError", error.ptr());
  py::register_exception<OracleTooLarge>(m, "OracleTooLarge", error.ptr());

  m.attr("BLANK") = kBlank;

  m.def("log_softmax", [](const Matrix &logits) { return FrameLogProbs::from_logits(logits).matrix(); },
        py::arg("logits"));

  m.def("ctc_loss",
        [](const Matrix &logp, const std::vector<int> &c) {
          auto r = ctc_loss(FrameLogProbs(logp), labels(c));
          return py::make_tuple(r.loss, r.grad);
        },
        py::arg("logp"), py::arg("labels"),
        "Returns (loss, d loss / d logp) for T x K log-probabilities.");

  m.def("ctc_loss_bruteforce",
        [](const Matrix &logp, const std::vector<int> &c) {
          return ctc_loss_bruteforce(FrameLogProbs(logp), labels(c));
        },
        py::arg("logp"), py::arg("labels"));

  m.def("logits_grad",
        [](const Matrix &logp, const Matrix &grad) { return logits_grad(FrameLogProbs(logp), grad); },
        py::arg("logp"), py::arg("grad_logp"));

  m.def("mh_ctc_loss",
        [](const Matrix &logp, const std::vector<std::vector<int>> &hyps,
           std::optional<std::vector<std::string>> tags) {
          auto r = mh_ctc_loss(FrameLogProbs(logp), hypothesis_set(hyps, tags));
          return py::make_tuple(r.loss, r.per_hypothesis, r.grad);
        },
        py::arg("logp"), py::arg("hypotheses"), py::arg("tags") = py::none(),
        "Returns (loss, per-hypothesis losses, gradient).");

  m.def("greedy_decode",
        [](const Matrix &logp) {
          auto h = greedy_decode(FrameLogProbs(logp));
          return py::make_tuple(h.transcription.labels, h.log_prob);
        },
        py::arg("logp"));

  m.def("beam_decode",
        [](const Matrix &logp, int beam_width) {
          DecodeConfig cfg;
          cfg.beam_width = beam_width;
          auto h = beam_decode(FrameLogProbs(logp), cfg);
          return py::make_tuple(h.transcription.labels, h.log_prob);
        },
        py::arg("logp"), py::arg("beam_width") = 20);

  m.def("edit_distance",
        [](const std::vector<std::string> &ref, const std::vector<std::string> &hyp) {
          return wer_dict(edit_distance(ref, hyp));
        },
        py::arg("ref"), py::arg("hyp"));
  m.def("chunk_words", &chunk_words, py::arg("symbols"), py::arg("word_length") = kWordLength);

  m.def("fbank",
        [](const std::vector<double> &wave, int sr, bool add_deltas) {
          return fbank(wave, sr, feature_config("fbank", add_deltas));
        },
        py::arg("wave"), py::arg("sample_rate") = 8000, py::arg("add_deltas") = true);
  m.def("ste",
        [](const std::vector<double> &wave, int sr, bool add_deltas) {
          return ste(wave, sr, feature_config("ste", add_deltas));
        },
        py::arg("wave"), py::arg("sample_rate") = 8000, py::arg("add_deltas") = true);

  m.def("synth",
        [](int n, std::uint64_t seed, const std::string &noise, double snr_db) {
          SynthConfig cfg;
          cfg.seed = seed;
          cfg.noise_kind = noise_kind_from_string(noise);
          cfg.snr_db = snr_db;
          py::list out;
          for (const auto &u : synth_corpus(cfg, n, 4, 10)) {
            py::dict d;
            d["id"] = u.id;
            d["waveform"] = u.waveform;
            d["sample_rate"] = u.sample_rate;
            d["text"] = decode(cfg.alphabet, u.transcription);
            d["condition"] = to_string(u.condition);
            d["realized_snr_db"] = u.realized_snr_db;
            out.append(d);
          }
          return out;
        },
        py::arg("n"), py::arg("seed") = 1, py::arg("noise") = "none", py::arg("snr_db") = 10.0);

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_static("load", &load_checkpoint, py::arg("path"))
      .def("save", [](const Checkpoint &c, const std::string &path) { save_checkpoint(path, c); })
      .def_property_readonly("lineage", [](const Checkpoint &c) { return c.lineage; })
      .def_property_readonly("parent_digest", [](const Checkpoint &c) { return c.parent_digest; })
      .def_property_readonly("alphabet", [](const Checkpoint &c) { return c.alphabet.symbols(); })
      .def_property_readonly("feature_kind", [](const Checkpoint &c) { return to_string(c.features.kind); })
      .def("digest", [](const Checkpoint &c) { return digest(c); })
      .def("forward", [](const Checkpoint &c, const Matrix &features) {
        return forward(c.params, features).matrix();
      }, py::arg("features"), "Frame log-probabilities for a T x d feature matrix.");

  m.def("default_plan", [] { return to_json(ExperimentPlan{}).dump(); },
        "Default experiment plan as a JSON string.");
  m.def("run_experiment",
        [](const std::string &plan_json, const std::string &out_root) {
          ExperimentPlan plan;
          try {
            plan = plan_from_json(nlohmann::json::parse(plan_json));
          } catch (const nlohmann::json::exception &e) {
            throw ConfigError(e.what());
          }
          std::string run_dir;
          ExperimentReport report;
          {
            py::gil_scoped_release release;
            report = run_experiment(plan, out_root, &run_dir);
          }
          return py::make_tuple(report.to_json().dump(), run_dir);
        },
        py::arg("plan_json"), py::arg("out_root"),
        "Runs the grid; returns (report JSON string, run directory).");
}
