// src/json.cc


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

#include "mhctc/json.h"

#include <set>

#include "mhctc/errors.h"
#include "mhctc/io.h"

namespace mhctc {

using nlohmann::json;

namespace {

void reject_unknown(const json &j, std::initializer_list<const char *> keys,
                    const char *what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  std::set<std::string> known(keys.begin(), keys.end());
  for (const auto &item : j.items())
    if (!known.count(item.key()))
      throw ConfigError(std::string("unknown key '") + item.key() + "' in " + what);
}

template <typename T>
void read_opt(const json &j, const char *key, T &out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void to_json(json &j, const ModelConfig &c) {
  j = json{{"input_dim", c.input_dim}, {"context", c.context},
           {"hidden", c.hidden}, {"num_classes", c.num_classes}};
}

void from_json(const json &j, ModelConfig &c) {
  reject_unknown(j, {"input_dim", "context", "hidden", "num_classes"}, "model config");
  read_opt(j, "input_dim", c.input_dim);
  read_opt(j, "context", c.context);
  read_opt(j, "hidden", c.hidden);
  read_opt(j, "num_classes", c.num_classes);
}

void to_json(json &j, const TrainConfig &c) {
  j = json{{"learning_rate", c.learning_rate}, {"epochs", c.epochs},
           {"batch_size", c.batch_size}, {"seed", c.seed},
           {"grad_clip", c.grad_clip ? json(*c.grad_clip) : json(nullptr)}};
}

void from_json(const json &j, TrainConfig &c) {
  reject_unknown(j, {"learning_rate", "epochs", "batch_size", "seed", "grad_clip"},
                 "train config");
  read_opt(j, "learning_rate", c.learning_rate);
  read_opt(j, "epochs", c.epochs);
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "seed", c.seed);
  if (j.contains("grad_clip")) {
    if (j.at("grad_clip").is_null()) c.grad_clip.reset();
    else c.grad_clip = j.at("grad_clip").get<double>();
  }
}

void to_json(json &j, const FeatureConfig &c) {
  j = json{{"kind", to_string(c.kind)}, {"n_bands", c.n_bands},
           {"frame_ms", c.frame_ms}, {"hop_ms", c.hop_ms},
           {"add_deltas", c.add_deltas}, {"log_floor", c.log_floor},
           {"low_hz", c.low_hz}, {"envelope_cutoff_hz", c.envelope_cutoff_hz}};
}

void from_json(const json &j, FeatureConfig &c) {
  reject_unknown(j, {"kind", "n_bands", "frame_ms", "hop_ms", "add_deltas", "log_floor",
                     "low_hz", "envelope_cutoff_hz"},
                 "feature config");
  if (j.contains("kind")) c.kind = feature_kind_from_string(j.at("kind").get<std::string>());
  read_opt(j, "n_bands", c.n_bands);
  read_opt(j, "frame_ms", c.frame_ms);
  read_opt(j, "hop_ms", c.hop_ms);
  read_opt(j, "add_deltas", c.add_deltas);
  read_opt(j, "log_floor", c.log_floor);
  read_opt(j, "low_hz", c.low_hz);
  read_opt(j, "envelope_cutoff_hz", c.envelope_cutoff_hz);
}

void to_json(json &j, const DecodeConfig &c) {
  j = json{{"beam_width", c.beam_width},
           {"mode", c.mode == DecodeMode::kGreedy ? "greedy" : "beam"}};
}

void from_json(const json &j, DecodeConfig &c) {
  reject_unknown(j, {"beam_width", "mode"}, "decode config");
  read_opt(j, "beam_width", c.beam_width);
  if (j.contains("mode")) {
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "greedy") c.mode = DecodeMode::kGreedy;
    else if (mode == "beam") c.mode = DecodeMode::kBeam;
    else throw ConfigError("decode mode must be greedy or beam");
  }
  if (c.beam_width < 1) throw ConfigError("beam_width must be >= 1");
}

void to_json(json &j, const SynthConfig &c) {
  json templates = json::array();
  for (const auto &t : c.templates) templates.push_back(json::array({t.f1, t.f2}));
  j = json{{"alphabet", c.alphabet.symbols()},
           {"sample_rate", c.sample_rate},
           {"symbol_ms_min", c.symbol_ms_min},
           {"symbol_ms_max", c.symbol_ms_max},
           {"templates", templates},
           {"noise_kind", to_string(c.noise_kind)},
           {"snr_db", c.snr_db},
           {"snr_db_max", c.snr_db_max ? json(*c.snr_db_max) : json(nullptr)},
           {"clean_fraction", c.clean_fraction},
           {"freq_jitter", c.freq_jitter},
           {"seed", c.seed}};
}

void from_json(const json &j, SynthConfig &c) {
  reject_unknown(j, {"alphabet", "sample_rate", "symbol_ms_min", "symbol_ms_max", "templates",
                     "noise_kind", "snr_db", "snr_db_max", "clean_fraction", "freq_jitter",
                     "seed"},
                 "synth config");
  if (j.contains("alphabet")) c.alphabet = LabelAlphabet(j.at("alphabet").get<std::string>());
  read_opt(j, "sample_rate", c.sample_rate);
  read_opt(j, "symbol_ms_min", c.symbol_ms_min);
  read_opt(j, "symbol_ms_max", c.symbol_ms_max);
  if (j.contains("templates")) {
    c.templates.clear();
    for (const auto &t : j.at("templates")) {
      if (!t.is_array() || t.size() != 2) throw ConfigError("template must be [f1, f2]");
      c.templates.push_back(SymbolTemplate{t[0].get<double>(), t[1].get<double>()});
    }
  }
  if (j.contains("noise_kind"))
    c.noise_kind = noise_kind_from_string(j.at("noise_kind").get<std::string>());
  read_opt(j, "snr_db", c.snr_db);
  if (j.contains("snr_db_max")) {
    if (j.at("snr_db_max").is_null()) c.snr_db_max.reset();
    else c.snr_db_max = j.at("snr_db_max").get<double>();
  }
  read_opt(j, "clean_fraction", c.clean_fraction);
  read_opt(j, "freq_jitter", c.freq_jitter);
  read_opt(j, "seed", c.seed);
}

std::string config_hash(const json &j) { return hex64(fnv1a64(j.dump())); }

}  // namespace mhctc
