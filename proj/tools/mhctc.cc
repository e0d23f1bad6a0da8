// tools/mhctc.cc


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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "mhctc/errors.h"
#include "mhctc/io.h"
#include "mhctc/json.h"
#include "mhctc/pipeline.h"

namespace fs = std::filesystem;
using namespace mhctc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

nlohmann::json read_json(const std::string &path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const FormatError &e) {
    throw ConfigError(e.what());
  }
}

template <typename T>
T config_from(const std::string &path) {
  T value{};
  if (path.empty()) return value;
  try {
    value = read_json(path).get<T>();
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(path + ": " + e.what());
  }
  return value;
}

void write_json(const std::string &path, const nlohmann::json &j) {
  write_file(path, j.dump(2) + "\n");
}

std::vector<Utterance> load_manifest_utterances(const std::string &manifest,
                                                const LabelAlphabet &alphabet) {
  std::vector<Utterance> out;
  const fs::path base = fs::path(manifest).parent_path();
  for (const auto &e : read_manifest(manifest)) {
    if (e.wav_path == "-") throw ConfigError(manifest + ": '" + e.id + "' has no waveform");
    Utterance u;
    u.id = e.id;
    u.waveform = read_wav((base / e.wav_path).string(), &u.sample_rate);
    u.transcription = encode(alphabet, e.text);
    u.condition = condition_from_string(e.condition);
    out.push_back(std::move(u));
  }
  return out;
}

PseudoLabels labels_from_records(const std::string &path, const std::string &tag,
                                 const LabelAlphabet &alphabet) {
  PseudoLabels labels;
  labels.source_tag = tag;
  for (const auto &r : read_decode_records(path)) {
    labels.by_id[r.id] = encode(alphabet, r.hypothesis);
    labels.log_prob[r.id] = r.log_prob;
    if (r.hypothesis.empty()) ++labels.empty_hypotheses;
  }
  return labels;
}

void apply_train_flags(TrainConfig &cfg, std::optional<double> lr, std::optional<int> epochs,
                       std::optional<int> batch, std::optional<std::uint64_t> seed) {
  if (lr) cfg.learning_rate = *lr;
  if (epochs) cfg.epochs = *epochs;
  if (batch) cfg.batch_size = *batch;
  if (seed) cfg.seed = *seed;
}

struct TrainFlags {
  std::optional<double> lr;
  std::optional<int> epochs;
  std::optional<int> batch;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App *cmd) {
    cmd->add_option("--lr", lr, "learning rate");
    cmd->add_option("--epochs", epochs, "training epochs");
    cmd->add_option("--batch", batch, "mini-batch size");
    cmd->add_option("--seed", seed, "shuffle and init seed");
  }
};

// synth ---------------------------------------------------------------------

struct SynthArgs {
  std::string config, out, prefix = "utt", noise;
  int n = 20, len_min = 4, len_max = 10;
  std::optional<double> snr, snr_max, clean_fraction;
  std::optional<std::uint64_t> seed;
};

int run_synth(const SynthArgs &a) {
  SynthConfig cfg = config_from<SynthConfig>(a.config);
  if (!a.noise.empty()) cfg.noise_kind = noise_kind_from_string(a.noise);
  if (a.snr) cfg.snr_db = *a.snr;
  if (a.snr_max) cfg.snr_db_max = *a.snr_max;
  if (a.clean_fraction) cfg.clean_fraction = *a.clean_fraction;
  if (a.seed) cfg.seed = *a.seed;
  auto corpus = synth_corpus(cfg, a.n, a.len_min, a.len_max, a.prefix);
  fs::create_directories(fs::path(a.out) / "wav");
  std::vector<ManifestEntry> entries;
  for (const auto &u : corpus) {
    const std::string rel = "wav/" + u.id + ".wav";
    write_wav((fs::path(a.out) / rel).string(), u.waveform, u.sample_rate);
    entries.push_back({u.id, decode(cfg.alphabet, u.transcription), to_string(u.condition), rel});
  }
  write_manifest((fs::path(a.out) / "manifest.tsv").string(), entries);
  nlohmann::json j = cfg;
  write_json((fs::path(a.out) / "synth.json").string(), j);
  spdlog::info("wrote {} utterances to {}", corpus.size(), a.out);
  return kExitOk;
}

// train ---------------------------------------------------------------------

struct TrainArgs {
  std::string manifest, out, features = "fbank", alphabet = "abcde";
  std::string train_config, feature_config, model_config;
  std::optional<int> hidden, context;
  std::uint64_t init_seed = 1;
  TrainFlags flags;
};

int run_train(const TrainArgs &a) {
  TrainConfig tc = config_from<TrainConfig>(a.train_config);
  apply_train_flags(tc, a.flags.lr, a.flags.epochs, a.flags.batch, a.flags.seed);
  FeatureConfig fc = config_from<FeatureConfig>(a.feature_config);
  fc.kind = feature_kind_from_string(a.features);
  ModelConfig mc = config_from<ModelConfig>(a.model_config);
  if (a.hidden) mc.hidden = *a.hidden;
  if (a.context) mc.context = *a.context;
  LabelAlphabet alphabet(a.alphabet);
  mc.input_dim = fc.dim();
  mc.num_classes = alphabet.output_dim();

  auto utts = load_manifest_utterances(a.manifest, alphabet);
  FeatureStore store(fc);
  std::vector<double> curve;
  Checkpoint ckpt = train_initial(utts, alphabet, fc, mc, tc, a.init_seed, store, &curve);
  save_checkpoint(a.out, ckpt);
  for (size_t e = 0; e < curve.size(); ++e) spdlog::info("epoch {} loss {:.4f}", e, curve[e]);
  std::cout << digest(ckpt) << "\n";
  return kExitOk;
}

// adapt ---------------------------------------------------------------------

struct AdaptArgs {
  std::string init, labeled, unlabeled, hyp_a, hyp_b, condition, out, train_config;
  TrainFlags flags;
};

int run_adapt(const AdaptArgs &a) {
  const AdaptCondition condition = condition_from_name(a.condition);
  Checkpoint init = load_checkpoint(a.init);
  TrainConfig tc = config_from<TrainConfig>(a.train_config);
  apply_train_flags(tc, a.flags.lr, a.flags.epochs, a.flags.batch, a.flags.seed);

  AdaptationSplit split;
  if (!a.labeled.empty()) split.labeled = load_manifest_utterances(a.labeled, init.alphabet);
  if (!a.unlabeled.empty()) split.unlabeled = load_manifest_utterances(a.unlabeled, init.alphabet);
  std::optional<PseudoLabels> ha, hb;
  if (!a.hyp_a.empty()) ha = labels_from_records(a.hyp_a, "A", init.alphabet);
  if (!a.hyp_b.empty()) hb = labels_from_records(a.hyp_b, "B", init.alphabet);

  FeatureStore store(init.features);
  FineTuneResult r = run_adaptation_condition(condition, init, split, ha ? &*ha : nullptr,
                                              hb ? &*hb : nullptr, tc, store);
  for (const auto &id : r.skipped) spdlog::warn("skipped infeasible utterance {}", id);
  save_checkpoint(a.out, r.checkpoint);
  std::cout << digest(r.checkpoint) << "\n";
  return kExitOk;
}

// decode --------------------------------------------------------------------

struct DecodeArgs {
  std::string model, manifest, out, mode, decode_config;
  std::optional<int> beam;
};

int run_decode(const DecodeArgs &a) {
  DecodeConfig dc = config_from<DecodeConfig>(a.decode_config);
  if (a.beam) dc.beam_width = *a.beam;
  if (a.mode == "greedy") dc.mode = DecodeMode::kGreedy;
  else if (a.mode == "beam") dc.mode = DecodeMode::kBeam;
  else if (!a.mode.empty()) throw ConfigError("unknown decode mode '" + a.mode + "'");
  if (dc.beam_width < 1) throw ConfigError("beam width must be >= 1");

  Checkpoint model = load_checkpoint(a.model);
  auto utts = load_manifest_utterances(a.manifest, model.alphabet);
  FeatureStore store(model.features);
  Evaluation ev = evaluate(model, utts, dc, store);
  write_decode_records(a.out, ev.records);
  spdlog::info("decoded {} utterances, WER {:.2f}", ev.records.size(), ev.wer.wer());
  return kExitOk;
}

// score ---------------------------------------------------------------------

struct ScoreArgs {
  std::string ref, hyp;
  bool json = false;
};

int run_score(const ScoreArgs &a) {
  std::map<std::string, std::string> hyps;
  for (const auto &r : read_decode_records(a.hyp)) hyps[r.id] = r.hypothesis;
  WerReport wer, cer;
  int missing = 0;
  for (const auto &e : read_manifest(a.ref)) {
    auto it = hyps.find(e.id);
    std::string h;
    if (it == hyps.end()) ++missing;
    else h = it->second;
    wer += edit_distance(chunk_words(e.text, kWordLength), chunk_words(h, kWordLength));
    cer += edit_distance(characters(e.text), characters(h));
  }
  if (missing > 0) spdlog::warn("{} reference utterances have no hypothesis", missing);
  if (a.json) {
    nlohmann::json j{{"wer", wer.wer()}, {"cer", cer.wer()},
                     {"substitutions", wer.substitutions}, {"insertions", wer.insertions},
                     {"deletions", wer.deletions}, {"ref_words", wer.ref_words},
                     {"missing", missing}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("WER %.2f%% [S=%d I=%d D=%d / %d words]  CER %.2f%%\n", wer.wer(),
                wer.substitutions, wer.insertions, wer.deletions, wer.ref_words, cer.wer());
  }
  return kExitOk;
}

// experiment ----------------------------------------------------------------

struct ExperimentArgs {
  std::string config, out = "runs";
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> scenarios, conditions;
  bool print_config = false;
};

int run_experiment_cmd(const ExperimentArgs &a) {
  ExperimentPlan plan;
  if (!a.config.empty()) plan = plan_from_json(read_json(a.config));
  if (!a.seeds.empty()) plan.seeds = a.seeds;
  if (!a.scenarios.empty()) {
    plan.scenarios.clear();
    for (const auto &s : a.scenarios) plan.scenarios.push_back(scenario_from_string(s));
  }
  if (!a.conditions.empty()) {
    plan.conditions.clear();
    for (const auto &c : a.conditions) plan.conditions.push_back(condition_from_name(c));
  }
  plan.validate();
  if (a.print_config) {
    std::cout << to_json(plan).dump(2) << "\n";
    return kExitOk;
  }
  std::string run_dir;
  ExperimentReport report = run_experiment(plan, a.out, &run_dir);
  std::cout << report.to_text();
  std::cout << "run directory: " << run_dir << "\n";
  return report.any_failed() ? kExitStage : kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Multiple-hypothesis CTC adaptation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "warnings and errors only");

  SynthArgs sa;
  auto *synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--config", sa.config, "synth config JSON");
  synth->add_option("--out", sa.out, "output directory")->required();
  synth->add_option("-n,--num", sa.n, "number of utterances")->check(CLI::NonNegativeNumber);
  synth->add_option("--len-min", sa.len_min, "minimum symbols per utterance");
  synth->add_option("--len-max", sa.len_max, "maximum symbols per utterance");
  synth->add_option("--prefix", sa.prefix, "utterance id prefix");
  synth->add_option("--noise", sa.noise, "none, babble or band");
  synth->add_option("--snr", sa.snr, "SNR in dB (lower bound with --snr-max)");
  synth->add_option("--snr-max", sa.snr_max, "upper SNR bound in dB");
  synth->add_option("--clean-fraction", sa.clean_fraction, "fraction left clean");
  synth->add_option("--seed", sa.seed, "corpus seed");

  TrainArgs ta;
  auto *train = app.add_subcommand("train", "train an initial model on a manifest");
  train->add_option("--manifest", ta.manifest, "training manifest")->required();
  train->add_option("--out", ta.out, "checkpoint path")->required();
  train->add_option("--features", ta.features, "fbank or ste");
  train->add_option("--alphabet", ta.alphabet, "label symbols");
  train->add_option("--train-config", ta.train_config, "training config JSON");
  train->add_option("--feature-config", ta.feature_config, "feature config JSON");
  train->add_option("--model-config", ta.model_config, "model config JSON");
  train->add_option("--hidden", ta.hidden, "hidden units");
  train->add_option("--context", ta.context, "context frames per side");
  train->add_option("--init-seed", ta.init_seed, "weight init seed");
  ta.flags.add_to(train);

  AdaptArgs aa;
  auto *adapt = app.add_subcommand("adapt", "adapt a model under one condition");
  adapt->add_option("--init", aa.init, "initial checkpoint")->required();
  adapt->add_option("--condition", aa.condition, "adaptation condition")->required();
  adapt->add_option("--out", aa.out, "output checkpoint")->required();
  adapt->add_option("--labeled", aa.labeled, "labeled manifest");
  adapt->add_option("--unlabeled", aa.unlabeled, "unlabeled manifest");
  adapt->add_option("--hyp-a", aa.hyp_a, "system A decode records");
  adapt->add_option("--hyp-b", aa.hyp_b, "system B decode records");
  adapt->add_option("--train-config", aa.train_config, "training config JSON");
  aa.flags.add_to(adapt);

  DecodeArgs da;
  auto *dec = app.add_subcommand("decode", "decode a manifest with a checkpoint");
  dec->add_option("--model", da.model, "checkpoint")->required();
  dec->add_option("--manifest", da.manifest, "manifest to decode")->required();
  dec->add_option("--out", da.out, "decode records TSV")->required();
  dec->add_option("--mode", da.mode, "beam or greedy");
  dec->add_option("--beam", da.beam, "beam width");
  dec->add_option("--decode-config", da.decode_config, "decode config JSON");

  ScoreArgs sc;
  auto *score = app.add_subcommand("score", "score decode records against a manifest");
  score->add_option("--ref", sc.ref, "reference manifest")->required();
  score->add_option("--hyp", sc.hyp, "decode records")->required();
  score->add_flag("--json", sc.json, "machine-readable output");

  ExperimentArgs ea;
  auto *exp = app.add_subcommand("experiment", "run the full comparison grid");
  exp->add_option("--config", ea.config, "experiment plan JSON");
  exp->add_option("--out", ea.out, "output root");
  exp->add_option("--seeds", ea.seeds, "override seeds")->delimiter(',');
  exp->add_option("--scenarios", ea.scenarios, "override scenarios")->delimiter(',');
  exp->add_option("--conditions", ea.conditions, "override conditions")->delimiter(',');
  exp->add_flag("--print-config", ea.print_config, "print the effective plan and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  spdlog::set_level(verbose ? spdlog::level::debug
                            : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*synth) return run_synth(sa);
    if (*train) return run_train(ta);
    if (*adapt) return run_adapt(aa);
    if (*dec) return run_decode(da);
    if (*score) return run_score(sc);
    if (*exp) return run_experiment_cmd(ea);
  } catch (const ConfigError &e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const InvalidLabel &e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const FormatError &e) {
    spdlog::error("input error: {}", e.what());
    return kExitConfig;
  } catch (const Error &e) {
    spdlog::error("stage failure: {}", e.what());
    return kExitStage;
  } catch (const std::exception &e) {
    spdlog::error("stage failure: {}", e.what());
    return kExitStage;
  }
  return kExitConfig;
}
