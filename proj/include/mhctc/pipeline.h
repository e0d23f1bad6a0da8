// mhctc/pipeline.h


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

#ifndef MHCTC_PIPELINE_H_
#define MHCTC_PIPELINE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mhctc/decode.h"
#include "mhctc/features.h"
#include "mhctc/io.h"
#include "mhctc/model.h"
#include "mhctc/scoring.h"

namespace mhctc {

enum class Scenario { kCleanTrain, kMultiConditionTrain };

enum class AdaptCondition {
  kNoAdapt,
  kSupervisedLabeled,
  kSemiSupA,
  kSemiSupB,
  kMhCtc,
  kSupervisedAll,
};

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string &name);
std::string to_string(AdaptCondition c);
AdaptCondition condition_from_name(const std::string &name);
const std::vector<AdaptCondition> &all_conditions();

/// Symbols per synthetic word when scoring WER.
inline constexpr int kWordLength = 3;

struct SplitSizes {
  int labeled = 30;
  int unlabeled = 61;
  int test = 140;
};

/// Labeled / unlabeled / test partition of one corpus, disjoint by id. The
/// unlabeled utterances keep their reference transcription, which only the
/// supervised-all condition and diagnostics read.
struct AdaptationSplit {
  std::vector<Utterance> labeled;
  std::vector<Utterance> unlabeled;
  std::vector<Utterance> test;
};

/// Seeded shuffle of the corpus, then consecutive slices. Throws SizeError
/// when the sizes exceed the corpus.
AdaptationSplit make_splits(const std::vector<Utterance> &corpus, const SplitSizes &sizes,
                            std::uint64_t seed);

/// Manifest rows for the three split members, ids prefixed with the member.
std::vector<ManifestEntry> split_manifest(const AdaptationSplit &split,
                                          const LabelAlphabet &alphabet);

/// Memoizes feature extraction by (kind, utterance id).
class FeatureStore {
 public:
  explicit FeatureStore(FeatureConfig base) : base_(std::move(base)) {}

  const Matrix &get(const Utterance &u, FeatureKind kind);
  FeatureConfig config(FeatureKind kind) const;

 private:
  FeatureConfig base_;
  std::map<std::pair<FeatureKind, std::string>, Matrix> cache_;
};

/// Ground-truth training items for `utts` in the features of `kind`.
std::vector<TrainItem> supervised_items(const std::vector<Utterance> &utts, FeatureKind kind,
                                        FeatureStore &store);

/// Trains a fresh model from `seed` on ground-truth transcriptions, fitting
/// input normalization on the training features first.
Checkpoint train_initial(const std::vector<Utterance> &corpus, const LabelAlphabet &alphabet,
                         const FeatureConfig &features, const ModelConfig &model,
                         const TrainConfig &cfg, std::uint64_t seed, FeatureStore &store,
                         std::vector<double> *loss_curve = nullptr);

/// Fine-tunes `base` on `items`; lineage gains `stage`, parent becomes
/// digest(base).
struct FineTuneResult {
  Checkpoint checkpoint;
  std::vector<double> loss_curve;
  std::vector<std::string> skipped;
};
FineTuneResult fine_tune(const Checkpoint &base, const std::vector<TrainItem> &items,
                         const TrainConfig &cfg, const std::string &stage);

/// Fine-tunes both systems on the labeled subset with the standard loss.
/// With an empty labeled set the models come back unchanged.
std::pair<FineTuneResult, FineTuneResult> run_supervised_stage(
    const Checkpoint &model_a, const Checkpoint &model_b, const AdaptationSplit &split,
    const TrainConfig &cfg, FeatureStore &store);

/// One-best hypotheses of one system over the unlabeled set.
struct PseudoLabels {
  std::string source_tag;
  std::map<std::string, Transcription> by_id;
  std::map<std::string, double> log_prob;
  /// Utterances whose decode failed; they carry no hypothesis.
  std::vector<std::string> dropped;
  int empty_hypotheses = 0;
  /// Hypotheses scored against the held-back references (diagnostic only).
  WerReport wer;
  WerReport cer;
};

PseudoLabels pseudo_label(const Checkpoint &model, const std::vector<Utterance> &unlabeled,
                          const DecodeConfig &cfg, const std::string &tag, FeatureStore &store);

std::pair<PseudoLabels, PseudoLabels> run_pseudo_label_stage(
    const Checkpoint &adapted_a, const Checkpoint &adapted_b, const AdaptationSplit &split,
    const DecodeConfig &cfg, FeatureStore &store);

/// Training items for one adaptation condition, in system-A features.
/// Manual transcriptions are N=1 sets; under mh-ctc each unlabeled utterance
/// carries the hypotheses of both systems, and utterances missing from
/// either pseudo-label set are left out.
std::vector<TrainItem> adaptation_items(AdaptCondition condition, const AdaptationSplit &split,
                                        const PseudoLabels *labels_a,
                                        const PseudoLabels *labels_b, FeatureKind kind,
                                        FeatureStore &store);

/// Adapts the initial system-A model (never the supervised-stage output)
/// under `condition`. no-adapt returns the initial model unchanged.
FineTuneResult run_adaptation_condition(AdaptCondition condition, const Checkpoint &initial_a,
                                        const AdaptationSplit &split,
                                        const PseudoLabels *labels_a,
                                        const PseudoLabels *labels_b, const TrainConfig &cfg,
                                        FeatureStore &store);

struct Evaluation {
  WerReport wer;
  WerReport cer;
  std::vector<DecodeRecord> records;
};

Evaluation evaluate(const Checkpoint &model, const std::vector<Utterance> &utts,
                    const DecodeConfig &cfg, FeatureStore &store);

/// Everything a full grid run needs. Serialized to JSON as the `experiment`
/// config file; see README for the schema.
struct ExperimentPlan {
  std::vector<Scenario> scenarios{Scenario::kCleanTrain, Scenario::kMultiConditionTrain};
  std::vector<AdaptCondition> conditions = all_conditions();
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  SynthConfig synth;  // alphabet, rendering; noise fields are set per corpus
  int len_min = 4;
  int len_max = 10;
  int train_utts = 200;
  SplitSizes split;

  NoiseKind test_noise = NoiseKind::kBabble;
  double test_snr_min = 5.0;
  double test_snr_max = 15.0;
  double test_clean_fraction = 0.0;
  NoiseKind multi_noise = NoiseKind::kBandLimited;
  double multi_snr_min = 5.0;
  double multi_snr_max = 20.0;
  double multi_clean_fraction = 0.5;

  FeatureConfig features;  // kind is overridden per system
  ModelConfig model;       // input_dim and num_classes are derived
  TrainConfig train;
  int adapt_epochs = 10;
  /// Defaults to train.learning_rate.
  std::optional<double> adapt_learning_rate;
  DecodeConfig decode;
  bool write_waveforms = true;

  TrainConfig adapt_config(std::uint64_t seed) const;
  void validate() const;
};

nlohmann::json to_json(const ExperimentPlan &plan);
ExperimentPlan plan_from_json(const nlohmann::json &j);

struct ReportRow {
  Scenario scenario = Scenario::kCleanTrain;
  AdaptCondition condition = AdaptCondition::kNoAdapt;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  WerReport wer;
  WerReport cer;
  std::string config_hash;
  std::string checkpoint_digest;
  std::string parent_digest;
  std::vector<std::string> lineage;
};

/// Per scenario and seed: pseudo-label quality and supervised-stage WERs.
struct SeedDiagnostics {
  Scenario scenario = Scenario::kCleanTrain;
  std::uint64_t seed = 0;
  double initial_b_test_wer = 0.0;
  double adapted_a_test_wer = 0.0;
  double adapted_b_test_wer = 0.0;
  double hyp_a_unlabeled_wer = 0.0;
  double hyp_b_unlabeled_wer = 0.0;
  int hyp_agreement = 0;  // unlabeled utterances where both systems agree
  int unlabeled = 0;
};

struct ExperimentReport {
  std::string config_hash;
  std::vector<ReportRow> rows;
  std::vector<SeedDiagnostics> diagnostics;

  /// Mean word error rate over seeds of the successful rows; NaN if none.
  double mean_wer(Scenario s, AdaptCondition c) const;
  /// 100 (WER_base - WER_cond) / WER_base on the seed means.
  double relative_reduction(Scenario s, AdaptCondition c,
                            AdaptCondition base = AdaptCondition::kSupervisedLabeled) const;
  bool any_failed() const;

  nlohmann::json to_json() const;
  /// Aligned plain-text table, one block per scenario.
  std::string to_text() const;
};

/// Runs every scenario x seed x condition and writes the run directory
/// `<out_root>/run-<config hash>`. Returns the report; the run directory
/// path is stored in *run_dir when given.
ExperimentReport run_experiment(const ExperimentPlan &plan, const std::string &out_root,
                                std::string *run_dir = nullptr);

}  // namespace mhctc

#endif  // MHCTC_PIPELINE_H_
