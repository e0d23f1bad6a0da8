// src/pipeline.cc


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

#include "mhctc/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "mhctc/errors.h"
#include "mhctc/json.h"

namespace mhctc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::pair<Scenario, std::string>> kScenarioNames = {
    {Scenario::kCleanTrain, "clean-train"},
    {Scenario::kMultiConditionTrain, "multi-condition-train"},
};

const std::vector<std::pair<AdaptCondition, std::string>> kConditionNames = {
    {AdaptCondition::kNoAdapt, "no-adapt"},
    {AdaptCondition::kSupervisedLabeled, "supervised-labeled"},
    {AdaptCondition::kSemiSupA, "semi-sup-A"},
    {AdaptCondition::kSemiSupB, "semi-sup-B"},
    {AdaptCondition::kMhCtc, "mh-ctc"},
    {AdaptCondition::kSupervisedAll, "supervised-all"},
};

// Independent RNG stream per stage of one seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return seed * 1000003ULL + stream;
}

std::string fixed(double v, int digits = 2) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string to_string(Scenario s) {
  for (const auto &[value, name] : kScenarioNames)
    if (value == s) return name;
  return "?";
}

Scenario scenario_from_string(const std::string &name) {
  for (const auto &[value, n] : kScenarioNames)
    if (n == name) return value;
  throw ConfigError("unknown scenario '" + name + "'");
}

std::string to_string(AdaptCondition c) {
  for (const auto &[value, name] : kConditionNames)
    if (value == c) return name;
  return "?";
}

AdaptCondition condition_from_name(const std::string &name) {
  for (const auto &[value, n] : kConditionNames)
    if (n == name) return value;
  throw ConfigError("unknown adaptation condition '" + name + "'");
}

const std::vector<AdaptCondition> &all_conditions() {
  static const std::vector<AdaptCondition> all = [] {
    std::vector<AdaptCondition> v;
    for (const auto &entry : kConditionNames) v.push_back(entry.first);
    return v;
  }();
  return all;
}

AdaptationSplit make_splits(const std::vector<Utterance> &corpus, const SplitSizes &sizes,
                            std::uint64_t seed) {
  if (sizes.labeled < 0 || sizes.unlabeled < 0 || sizes.test < 0)
    throw SizeError("split sizes must be nonnegative");
  const size_t need = static_cast<size_t>(sizes.labeled) + sizes.unlabeled + sizes.test;
  if (need > corpus.size())
    throw SizeError("split sizes need " + std::to_string(need) + " utterances, corpus has " +
                    std::to_string(corpus.size()));
  std::set<std::string> ids;
  for (const auto &u : corpus)
    if (!ids.insert(u.id).second) throw SizeError("duplicate utterance id '" + u.id + "'");

  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  AdaptationSplit split;
  size_t pos = 0;
  auto take = [&](int n, std::vector<Utterance> &dst) {
    for (int i = 0; i < n; ++i) dst.push_back(corpus[order[pos++]]);
  };
  take(sizes.labeled, split.labeled);
  take(sizes.unlabeled, split.unlabeled);
  take(sizes.test, split.test);
  return split;
}

std::vector<ManifestEntry> split_manifest(const AdaptationSplit &split,
                                          const LabelAlphabet &alphabet) {
  std::vector<ManifestEntry> out;
  auto add = [&](const std::vector<Utterance> &utts, const char *member) {
    for (const auto &u : utts)
      out.push_back(ManifestEntry{u.id, decode(alphabet, u.transcription),
                                  to_string(u.condition), std::string(member)});
  };
  add(split.labeled, "labeled");
  add(split.unlabeled, "unlabeled");
  add(split.test, "test");
  return out;
}

FeatureConfig FeatureStore::config(FeatureKind kind) const {
  FeatureConfig cfg = base_;
  cfg.kind = kind;
  return cfg;
}

const Matrix &FeatureStore::get(const Utterance &u, FeatureKind kind) {
  auto key = std::make_pair(kind, u.id);
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, extract_features(u, config(kind))).first;
  return it->second;
}

std::vector<TrainItem> supervised_items(const std::vector<Utterance> &utts, FeatureKind kind,
                                        FeatureStore &store) {
  std::vector<TrainItem> items;
  items.reserve(utts.size());
  for (const auto &u : utts)
    items.push_back(TrainItem{u.id, store.get(u, kind), HypothesisSet::single(u.transcription)});
  return items;
}

Checkpoint train_initial(const std::vector<Utterance> &corpus, const LabelAlphabet &alphabet,
                         const FeatureConfig &features, const ModelConfig &model,
                         const TrainConfig &cfg, std::uint64_t seed, FeatureStore &store,
                         std::vector<double> *loss_curve) {
  ModelConfig mc = model;
  mc.input_dim = features.dim();
  mc.num_classes = alphabet.output_dim();
  ModelParams params = init_model(mc, seed);

  std::vector<TrainItem> items = supervised_items(corpus, features.kind, store);
  std::vector<Matrix> feats;
  feats.reserve(items.size());
  for (const auto &item : items) feats.push_back(item.features);
  fit_normalization(params, feats);

  TrainResult r = sgd_train(params, items, cfg);
  if (loss_curve != nullptr) *loss_curve = r.loss_curve;
  return Checkpoint{std::move(r.params), alphabet, features, {"init-" + to_string(features.kind)}, ""};
}

FineTuneResult fine_tune(const Checkpoint &base, const std::vector<TrainItem> &items,
                         const TrainConfig &cfg, const std::string &stage) {
  TrainResult r = sgd_train(base.params, items, cfg);
  FineTuneResult out;
  out.checkpoint = base;
  out.checkpoint.params = std::move(r.params);
  out.checkpoint.lineage.push_back(stage);
  out.checkpoint.parent_digest = digest(base);
  out.loss_curve = std::move(r.loss_curve);
  out.skipped = std::move(r.skipped);
  return out;
}

std::pair<FineTuneResult, FineTuneResult> run_supervised_stage(
    const Checkpoint &model_a, const Checkpoint &model_b, const AdaptationSplit &split,
    const TrainConfig &cfg, FeatureStore &store) {
  if (split.labeled.empty()) {
    spdlog::info("supervised stage skipped: labeled set is empty");
    return {FineTuneResult{model_a, {}, {}}, FineTuneResult{model_b, {}, {}}};
  }
  auto adapt = [&](const Checkpoint &m) {
    try {
      return fine_tune(m, supervised_items(split.labeled, m.features.kind, store), cfg,
                       "supervised-" + to_string(m.features.kind));
    } catch (const DivergedError &e) {
      throw DivergedError("supervised stage (" + to_string(m.features.kind) + "): " + e.what(),
                          e.epoch());
    }
  };
  return {adapt(model_a), adapt(model_b)};
}

PseudoLabels pseudo_label(const Checkpoint &model, const std::vector<Utterance> &unlabeled,
                          const DecodeConfig &cfg, const std::string &tag, FeatureStore &store) {
  PseudoLabels out;
  out.source_tag = tag;
  for (const auto &u : unlabeled) {
    try {
      DecodedHypothesis h = decode(forward(model.params, store.get(u, model.features.kind)), cfg);
      if (h.transcription.empty()) ++out.empty_hypotheses;
      const std::string ref = mhctc::decode(model.alphabet, u.transcription);
      const std::string hyp = mhctc::decode(model.alphabet, h.transcription);
      out.wer += edit_distance(chunk_words(ref, kWordLength), chunk_words(hyp, kWordLength));
      out.cer += edit_distance(characters(ref), characters(hyp));
      out.log_prob[u.id] = h.log_prob;
      out.by_id[u.id] = std::move(h.transcription);
    } catch (const Error &e) {
      spdlog::warn("pseudo-label {}: dropping '{}': {}", tag, u.id, e.what());
      out.dropped.push_back(u.id);
    }
  }
  if (out.empty_hypotheses > 0)
    spdlog::info("pseudo-label {}: {} empty hypotheses", tag, out.empty_hypotheses);
  return out;
}

std::pair<PseudoLabels, PseudoLabels> run_pseudo_label_stage(
    const Checkpoint &adapted_a, const Checkpoint &adapted_b, const AdaptationSplit &split,
    const DecodeConfig &cfg, FeatureStore &store) {
  if (split.unlabeled.empty()) throw SizeError("pseudo-label stage needs unlabeled utterances");
  return {pseudo_label(adapted_a, split.unlabeled, cfg, "A", store),
          pseudo_label(adapted_b, split.unlabeled, cfg, "B", store)};
}

std::vector<TrainItem> adaptation_items(AdaptCondition condition, const AdaptationSplit &split,
                                        const PseudoLabels *labels_a,
                                        const PseudoLabels *labels_b, FeatureKind kind,
                                        FeatureStore &store) {
  if (condition == AdaptCondition::kNoAdapt) return {};
  std::vector<TrainItem> items = supervised_items(split.labeled, kind, store);
  auto require = [&](const PseudoLabels *labels, const char *which) {
    if (labels == nullptr)
      throw ConfigError(to_string(condition) + " needs pseudo-labels from system " + which);
    return labels;
  };
  for (const auto &u : split.unlabeled) {
    HypothesisSet hs;
    switch (condition) {
      case AdaptCondition::kSupervisedLabeled:
        continue;
      case AdaptCondition::kSupervisedAll:
        hs = HypothesisSet::single(u.transcription);
        break;
      case AdaptCondition::kSemiSupA:
      case AdaptCondition::kSemiSupB: {
        const PseudoLabels *labels = condition == AdaptCondition::kSemiSupA
                                         ? require(labels_a, "A")
                                         : require(labels_b, "B");
        auto it = labels->by_id.find(u.id);
        if (it == labels->by_id.end()) continue;
        hs = HypothesisSet::single(it->second, labels->source_tag);
        break;
      }
      case AdaptCondition::kMhCtc: {
        const PseudoLabels *a = require(labels_a, "A"), *b = require(labels_b, "B");
        auto ia = a->by_id.find(u.id), ib = b->by_id.find(u.id);
        if (ia == a->by_id.end() || ib == b->by_id.end()) continue;
        hs.hypotheses = {ia->second, ib->second};
        hs.source_tags = {a->source_tag, b->source_tag};
        break;
      }
      case AdaptCondition::kNoAdapt:
        break;
    }
    items.push_back(TrainItem{u.id, store.get(u, kind), std::move(hs)});
  }
  return items;
}

FineTuneResult run_adaptation_condition(AdaptCondition condition, const Checkpoint &initial_a,
                                        const AdaptationSplit &split,
                                        const PseudoLabels *labels_a,
                                        const PseudoLabels *labels_b, const TrainConfig &cfg,
                                        FeatureStore &store) {
  if (condition == AdaptCondition::kNoAdapt) return FineTuneResult{initial_a, {}, {}};
  auto items = adaptation_items(condition, split, labels_a, labels_b, initial_a.features.kind, store);
  try {
    return fine_tune(initial_a, items, cfg, "adapt-" + to_string(condition));
  } catch (const DivergedError &e) {
    throw DivergedError(to_string(condition) + ": " + e.what(), e.epoch());
  }
}

Evaluation evaluate(const Checkpoint &model, const std::vector<Utterance> &utts,
                    const DecodeConfig &cfg, FeatureStore &store) {
  json cfg_json;
  to_json(cfg_json, cfg);
  const std::string hash = config_hash(cfg_json);
  Evaluation ev;
  for (const auto &u : utts) {
    DecodedHypothesis h = decode(forward(model.params, store.get(u, model.features.kind)), cfg);
    const std::string ref = mhctc::decode(model.alphabet, u.transcription);
    const std::string hyp = mhctc::decode(model.alphabet, h.transcription);
    ev.wer += edit_distance(chunk_words(ref, kWordLength), chunk_words(hyp, kWordLength));
    ev.cer += edit_distance(characters(ref), characters(hyp));
    ev.records.push_back(DecodeRecord{u.id, hyp, h.log_prob, hash});
  }
  return ev;
}

// ---------------------------------------------------------------------------
// Experiment plan.

TrainConfig ExperimentPlan::adapt_config(std::uint64_t seed) const {
  TrainConfig cfg = train;
  cfg.epochs = adapt_epochs;
  cfg.learning_rate = adapt_learning_rate.value_or(train.learning_rate);
  cfg.seed = seed;
  return cfg;
}

void ExperimentPlan::validate() const {
  if (scenarios.empty()) throw ConfigError("plan needs at least one scenario");
  if (conditions.empty()) throw ConfigError("plan needs at least one condition");
  if (seeds.empty()) throw ConfigError("plan needs at least one seed");
  if (len_min < 1 || len_max < len_min) throw ConfigError("invalid utterance length range");
  if (train_utts < 1) throw ConfigError("train_utts must be >= 1");
  if (adapt_epochs < 0) throw ConfigError("adapt_epochs must be >= 0");
  if (adapt_learning_rate && *adapt_learning_rate <= 0.0)
    throw ConfigError("adapt_learning_rate must be positive");
  if (test_snr_max < test_snr_min || multi_snr_max < multi_snr_min)
    throw ConfigError("SNR ranges must satisfy min <= max");
  if (decode.beam_width < 1) throw ConfigError("beam_width must be >= 1");
  const bool semi = std::any_of(conditions.begin(), conditions.end(), [](AdaptCondition c) {
    return c == AdaptCondition::kSemiSupA || c == AdaptCondition::kSemiSupB ||
           c == AdaptCondition::kMhCtc;
  });
  if (semi && split.unlabeled < 1)
    throw ConfigError("semi-supervised and mh-ctc conditions need unlabeled utterances");
  if (split.test < 1) throw ConfigError("test split must be nonempty");
  mhctc::validate(synth);
}

namespace {

void check_keys(const json &j, std::initializer_list<const char *> keys, const char *what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  std::set<std::string> known(keys.begin(), keys.end());
  for (const auto &item : j.items())
    if (!known.count(item.key()))
      throw ConfigError(std::string("unknown key '") + item.key() + "' in " + what);
}

template <typename T>
void opt(const json &j, const char *key, T &out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json to_json(const ExperimentPlan &p) {
  json scenarios = json::array(), conditions = json::array();
  for (auto s : p.scenarios) scenarios.push_back(to_string(s));
  for (auto c : p.conditions) conditions.push_back(to_string(c));
  json j;
  j["scenarios"] = scenarios;
  j["conditions"] = conditions;
  j["seeds"] = p.seeds;
  j["synth"] = p.synth;
  j["len_min"] = p.len_min;
  j["len_max"] = p.len_max;
  j["train_utts"] = p.train_utts;
  j["split"] = json{{"labeled", p.split.labeled}, {"unlabeled", p.split.unlabeled},
                    {"test", p.split.test}};
  j["test_noise"] = json{{"kind", to_string(p.test_noise)}, {"snr_min", p.test_snr_min},
                         {"snr_max", p.test_snr_max}, {"clean_fraction", p.test_clean_fraction}};
  j["multi_noise"] = json{{"kind", to_string(p.multi_noise)}, {"snr_min", p.multi_snr_min},
                          {"snr_max", p.multi_snr_max}, {"clean_fraction", p.multi_clean_fraction}};
  j["features"] = p.features;
  j["model"] = json{{"context", p.model.context}, {"hidden", p.model.hidden}};
  j["train"] = p.train;
  j["adapt_epochs"] = p.adapt_epochs;
  j["adapt_learning_rate"] = p.adapt_learning_rate ? json(*p.adapt_learning_rate) : json(nullptr);
  j["decode"] = p.decode;
  j["write_waveforms"] = p.write_waveforms;
  return j;
}

ExperimentPlan plan_from_json(const json &j) {
  ExperimentPlan p;
  try {
    check_keys(j, {"scenarios", "conditions", "seeds", "synth", "len_min", "len_max", "train_utts",
                   "split", "test_noise", "multi_noise", "features", "model", "train",
                   "adapt_epochs", "adapt_learning_rate", "decode", "write_waveforms"},
               "experiment plan");
    if (j.contains("scenarios")) {
      p.scenarios.clear();
      for (const auto &s : j.at("scenarios")) p.scenarios.push_back(scenario_from_string(s.get<std::string>()));
    }
    if (j.contains("conditions")) {
      p.conditions.clear();
      for (const auto &c : j.at("conditions")) p.conditions.push_back(condition_from_name(c.get<std::string>()));
    }
    opt(j, "seeds", p.seeds);
    opt(j, "synth", p.synth);
    opt(j, "len_min", p.len_min);
    opt(j, "len_max", p.len_max);
    opt(j, "train_utts", p.train_utts);
    if (j.contains("split")) {
      const json &s = j.at("split");
      check_keys(s, {"labeled", "unlabeled", "test"}, "split");
      opt(s, "labeled", p.split.labeled);
      opt(s, "unlabeled", p.split.unlabeled);
      opt(s, "test", p.split.test);
    }
    auto noise = [](const json &n, NoiseKind &kind, double &lo, double &hi, double &clean,
                    const char *what) {
      check_keys(n, {"kind", "snr_min", "snr_max", "clean_fraction"}, what);
      if (n.contains("kind")) kind = noise_kind_from_string(n.at("kind").get<std::string>());
      opt(n, "snr_min", lo);
      opt(n, "snr_max", hi);
      opt(n, "clean_fraction", clean);
    };
    if (j.contains("test_noise"))
      noise(j.at("test_noise"), p.test_noise, p.test_snr_min, p.test_snr_max, p.test_clean_fraction,
            "test_noise");
    if (j.contains("multi_noise"))
      noise(j.at("multi_noise"), p.multi_noise, p.multi_snr_min, p.multi_snr_max,
            p.multi_clean_fraction, "multi_noise");
    opt(j, "features", p.features);
    if (j.contains("model")) {
      const json &m = j.at("model");
      check_keys(m, {"context", "hidden"}, "model");
      opt(m, "context", p.model.context);
      opt(m, "hidden", p.model.hidden);
    }
    opt(j, "train", p.train);
    opt(j, "adapt_epochs", p.adapt_epochs);
    if (j.contains("adapt_learning_rate") && !j.at("adapt_learning_rate").is_null())
      p.adapt_learning_rate = j.at("adapt_learning_rate").get<double>();
    opt(j, "decode", p.decode);
    opt(j, "write_waveforms", p.write_waveforms);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("experiment plan: ") + e.what());
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Report.

double ExperimentReport::mean_wer(Scenario s, AdaptCondition c) const {
  double total = 0.0;
  int n = 0;
  for (const auto &r : rows)
    if (r.scenario == s && r.condition == c && r.ok) {
      total += r.wer.wer();
      ++n;
    }
  return n > 0 ? total / n : std::numeric_limits<double>::quiet_NaN();
}

double ExperimentReport::relative_reduction(Scenario s, AdaptCondition c,
                                            AdaptCondition base) const {
  const double wb = mean_wer(s, base), wc = mean_wer(s, c);
  if (std::isnan(wb) || std::isnan(wc) || wb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * (wb - wc) / wb;
}

bool ExperimentReport::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const ReportRow &r) { return !r.ok; });
}

namespace {

json wer_json(const WerReport &w) {
  return json{{"substitutions", w.substitutions}, {"insertions", w.insertions},
              {"deletions", w.deletions}, {"ref_words", w.ref_words},
              {"empty_reference", w.empty_reference}, {"rate", w.wer()}};
}

std::vector<Scenario> report_scenarios(const std::vector<ReportRow> &rows) {
  std::vector<Scenario> out;
  for (const auto &r : rows)
    if (std::find(out.begin(), out.end(), r.scenario) == out.end()) out.push_back(r.scenario);
  return out;
}

std::vector<AdaptCondition> report_conditions(const std::vector<ReportRow> &rows) {
  std::vector<AdaptCondition> out;
  for (auto c : all_conditions())
    for (const auto &r : rows)
      if (r.condition == c) {
        out.push_back(c);
        break;
      }
  return out;
}

const char *labels_column(AdaptCondition c) {
  switch (c) {
    case AdaptCondition::kNoAdapt: return "n/a";
    case AdaptCondition::kSupervisedLabeled: return "T_lab";
    case AdaptCondition::kSemiSupA: return "T_lab + H_A";
    case AdaptCondition::kSemiSupB: return "T_lab + H_B";
    case AdaptCondition::kMhCtc: return "T_lab + H_A + H_B";
    case AdaptCondition::kSupervisedAll: return "T_all";
  }
  return "";
}

}  // namespace

json ExperimentReport::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  json jrows = json::array();
  for (const auto &r : rows) {
    jrows.push_back(json{{"scenario", to_string(r.scenario)},
                         {"condition", to_string(r.condition)},
                         {"seed", r.seed},
                         {"status", r.ok ? "ok" : "failed"},
                         {"error", r.error},
                         {"wer", wer_json(r.wer)},
                         {"cer", wer_json(r.cer)},
                         {"config_hash", r.config_hash},
                         {"checkpoint", r.checkpoint_digest},
                         {"parent", r.parent_digest},
                         {"lineage", r.lineage}});
  }
  j["rows"] = jrows;
  json summary = json::array();
  for (auto s : report_scenarios(rows)) {
    json conds = json::array();
    for (auto c : report_conditions(rows)) {
      const double m = mean_wer(s, c);
      conds.push_back(json{{"condition", to_string(c)}, {"mean_wer", std::isnan(m) ? json(nullptr) : json(m)}});
    }
    const double rr = relative_reduction(s, AdaptCondition::kMhCtc);
    summary.push_back(json{{"scenario", to_string(s)},
                           {"conditions", conds},
                           {"mh_ctc_relative_reduction", std::isnan(rr) ? json(nullptr) : json(rr)}});
  }
  j["summary"] = summary;
  json diag = json::array();
  for (const auto &d : diagnostics)
    diag.push_back(json{{"scenario", to_string(d.scenario)},
                        {"seed", d.seed},
                        {"initial_b_test_wer", d.initial_b_test_wer},
                        {"supervised_a_test_wer", d.adapted_a_test_wer},
                        {"supervised_b_test_wer", d.adapted_b_test_wer},
                        {"hyp_a_unlabeled_wer", d.hyp_a_unlabeled_wer},
                        {"hyp_b_unlabeled_wer", d.hyp_b_unlabeled_wer},
                        {"hyp_agreement", d.hyp_agreement},
                        {"unlabeled", d.unlabeled}});
  j["diagnostics"] = diag;
  return j;
}

std::string ExperimentReport::to_text() const {
  std::ostringstream os;
  os << "config " << config_hash << "\n";
  char line[256];
  for (auto s : report_scenarios(rows)) {
    std::vector<std::uint64_t> seeds;
    for (const auto &r : rows)
      if (r.scenario == s && std::find(seeds.begin(), seeds.end(), r.seed) == seeds.end())
        seeds.push_back(r.seed);
    os << "\nScenario: " << to_string(s) << "\n";
    std::snprintf(line, sizeof(line), "%-20s %-18s %9s", "Adaptation", "Labels", "WER");
    os << line;
    for (auto seed : seeds) {
      std::snprintf(line, sizeof(line), " %8s", ("s" + std::to_string(seed)).c_str());
      os << line;
    }
    os << "\n";
    for (auto c : report_conditions(rows)) {
      std::snprintf(line, sizeof(line), "%-20s %-18s %9s", to_string(c).c_str(), labels_column(c),
                    fixed(mean_wer(s, c)).c_str());
      os << line;
      for (auto seed : seeds) {
        std::string cell = "-";
        for (const auto &r : rows)
          if (r.scenario == s && r.condition == c && r.seed == seed)
            cell = r.ok ? fixed(r.wer.wer()) : "FAILED";
        std::snprintf(line, sizeof(line), " %8s", cell.c_str());
        os << line;
      }
      os << "\n";
    }
    os << "mh-ctc relative WER reduction vs supervised-labeled: "
       << fixed(relative_reduction(s, AdaptCondition::kMhCtc)) << "%\n";
    for (const auto &d : diagnostics)
      if (d.scenario == s)
        os << "  seed " << d.seed << ": pseudo-label WER A " << fixed(d.hyp_a_unlabeled_wer)
           << ", B " << fixed(d.hyp_b_unlabeled_wer) << ", agreement " << d.hyp_agreement << "/"
           << d.unlabeled << "\n";
  }
  for (const auto &r : rows)
    if (!r.ok)
      os << "FAILED " << to_string(r.scenario) << " " << to_string(r.condition) << " seed "
         << r.seed << ": " << r.error << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Grid runner.

namespace {

struct SeedRun {
  const ExperimentPlan &plan;
  Scenario scenario;
  std::uint64_t seed;
  fs::path dir;
  std::string plan_hash;
};

ReportRow new_row(const SeedRun &run, AdaptCondition c) {
  ReportRow row;
  row.scenario = run.scenario;
  row.condition = c;
  row.seed = run.seed;
  row.config_hash = run.plan_hash;
  return row;
}

bool needs_pseudo_labels(const std::vector<AdaptCondition> &conditions) {
  return std::any_of(conditions.begin(), conditions.end(), [](AdaptCondition c) {
    return c == AdaptCondition::kSemiSupA || c == AdaptCondition::kSemiSupB ||
           c == AdaptCondition::kMhCtc;
  });
}

std::vector<ManifestEntry> corpus_manifest(const std::vector<Utterance> &corpus,
                                           const LabelAlphabet &alphabet, const fs::path &wav_dir,
                                           bool write_waveforms) {
  std::vector<ManifestEntry> out;
  if (write_waveforms) fs::create_directories(wav_dir);
  for (const auto &u : corpus) {
    std::string path = "-";
    if (write_waveforms) {
      // relative to the manifest, which sits next to wav_dir
      path = (wav_dir.filename() / (u.id + ".wav")).string();
      write_wav((wav_dir / (u.id + ".wav")).string(), u.waveform, u.sample_rate);
    }
    out.push_back(ManifestEntry{u.id, decode(alphabet, u.transcription), to_string(u.condition), path});
  }
  return out;
}

std::vector<DecodeRecord> hypothesis_records(const PseudoLabels &labels, const LabelAlphabet &alphabet,
                                             const std::string &hash) {
  std::vector<DecodeRecord> out;
  for (const auto &[id, c] : labels.by_id)
    out.push_back(DecodeRecord{id, decode(alphabet, c), labels.log_prob.at(id), hash});
  return out;
}

void run_seed(const SeedRun &run, ExperimentReport &report) {
  const ExperimentPlan &plan = run.plan;
  const LabelAlphabet &alphabet = plan.synth.alphabet;
  fs::create_directories(run.dir / "ckpt");
  fs::create_directories(run.dir / "hyp");
  fs::create_directories(run.dir / "decode");

  auto fail_all = [&](const std::string &why) {
    spdlog::error("{} seed {}: {}", to_string(run.scenario), run.seed, why);
    for (auto c : plan.conditions) {
      ReportRow row = new_row(run, c);
      row.ok = false;
      row.error = why;
      report.rows.push_back(row);
    }
  };

  SynthConfig train_cfg = plan.synth;
  train_cfg.seed = stream_seed(run.seed, 1);
  if (run.scenario == Scenario::kCleanTrain) {
    train_cfg.noise_kind = NoiseKind::kNone;
  } else {
    train_cfg.noise_kind = plan.multi_noise;
    train_cfg.snr_db = plan.multi_snr_min;
    train_cfg.snr_db_max = plan.multi_snr_max;
    train_cfg.clean_fraction = plan.multi_clean_fraction;
  }
  SynthConfig adapt_cfg = plan.synth;
  adapt_cfg.seed = stream_seed(run.seed, 2);
  adapt_cfg.noise_kind = plan.test_noise;
  adapt_cfg.snr_db = plan.test_snr_min;
  adapt_cfg.snr_db_max = plan.test_snr_max;
  adapt_cfg.clean_fraction = plan.test_clean_fraction;

  const int n_adapt = plan.split.labeled + plan.split.unlabeled + plan.split.test;
  auto train_corpus = synth_corpus(train_cfg, plan.train_utts, plan.len_min, plan.len_max, "tr");
  auto adapt_corpus = synth_corpus(adapt_cfg, n_adapt, plan.len_min, plan.len_max, "ad");
  write_manifest((run.dir / "train.tsv").string(),
                 corpus_manifest(train_corpus, alphabet, run.dir / "wav", plan.write_waveforms));
  write_manifest((run.dir / "adapt.tsv").string(),
                 corpus_manifest(adapt_corpus, alphabet, run.dir / "wav", plan.write_waveforms));
  AdaptationSplit split = make_splits(adapt_corpus, plan.split, stream_seed(run.seed, 3));
  write_manifest((run.dir / "splits.tsv").string(), split_manifest(split, alphabet));

  FeatureStore store(plan.features);
  TrainConfig train = plan.train;
  train.seed = stream_seed(run.seed, 6);
  Checkpoint init_a, init_b;
  try {
    init_a = train_initial(train_corpus, alphabet, store.config(FeatureKind::kFbank), plan.model,
                           train, stream_seed(run.seed, 4), store);
    init_b = train_initial(train_corpus, alphabet, store.config(FeatureKind::kSte), plan.model,
                           train, stream_seed(run.seed, 5), store);
  } catch (const Error &e) {
    fail_all(std::string("initial training: ") + e.what());
    return;
  }
  save_checkpoint((run.dir / "ckpt" / "init-A.ckpt").string(), init_a);
  save_checkpoint((run.dir / "ckpt" / "init-B.ckpt").string(), init_b);

  json decode_json;
  to_json(decode_json, plan.decode);
  const std::string decode_hash = config_hash(decode_json);
  const TrainConfig adapt = plan.adapt_config(stream_seed(run.seed, 7));

  SeedDiagnostics diag;
  diag.scenario = run.scenario;
  diag.seed = run.seed;
  diag.unlabeled = static_cast<int>(split.unlabeled.size());
  diag.initial_b_test_wer = evaluate(init_b, split.test, plan.decode, store).wer.wer();

  std::optional<PseudoLabels> labels_a, labels_b;
  std::string pseudo_error;
  if (needs_pseudo_labels(plan.conditions)) {
    try {
      auto [sup_a, sup_b] = run_supervised_stage(init_a, init_b, split, adapt, store);
      save_checkpoint((run.dir / "ckpt" / "supervised-A.ckpt").string(), sup_a.checkpoint);
      save_checkpoint((run.dir / "ckpt" / "supervised-B.ckpt").string(), sup_b.checkpoint);
      diag.adapted_a_test_wer = evaluate(sup_a.checkpoint, split.test, plan.decode, store).wer.wer();
      diag.adapted_b_test_wer = evaluate(sup_b.checkpoint, split.test, plan.decode, store).wer.wer();
      auto [ha, hb] = run_pseudo_label_stage(sup_a.checkpoint, sup_b.checkpoint, split, plan.decode, store);
      write_decode_records((run.dir / "hyp" / "H_A.tsv").string(), hypothesis_records(ha, alphabet, decode_hash));
      write_decode_records((run.dir / "hyp" / "H_B.tsv").string(), hypothesis_records(hb, alphabet, decode_hash));
      diag.hyp_a_unlabeled_wer = ha.wer.wer();
      diag.hyp_b_unlabeled_wer = hb.wer.wer();
      for (const auto &[id, c] : ha.by_id) {
        auto it = hb.by_id.find(id);
        if (it != hb.by_id.end() && it->second == c) ++diag.hyp_agreement;
      }
      labels_a = std::move(ha);
      labels_b = std::move(hb);
    } catch (const Error &e) {
      pseudo_error = std::string("supervised/pseudo-label stage: ") + e.what();
      spdlog::error("{} seed {}: {}", to_string(run.scenario), run.seed, pseudo_error);
    }
  }
  report.diagnostics.push_back(diag);

  for (auto c : plan.conditions) {
    ReportRow row = new_row(run, c);
    const bool uses_pseudo = c == AdaptCondition::kSemiSupA || c == AdaptCondition::kSemiSupB ||
                             c == AdaptCondition::kMhCtc;
    try {
      if (uses_pseudo && !labels_a) throw Error(pseudo_error);
      FineTuneResult r = run_adaptation_condition(c, init_a, split, labels_a ? &*labels_a : nullptr,
                                                  labels_b ? &*labels_b : nullptr, adapt, store);
      save_checkpoint((run.dir / "ckpt" / ("adapt-" + to_string(c) + ".ckpt")).string(), r.checkpoint);
      Evaluation ev = evaluate(r.checkpoint, split.test, plan.decode, store);
      write_decode_records((run.dir / "decode" / (to_string(c) + ".tsv")).string(), ev.records);
      row.wer = ev.wer;
      row.cer = ev.cer;
      row.checkpoint_digest = digest(r.checkpoint);
      row.parent_digest = r.checkpoint.parent_digest;
      row.lineage = r.checkpoint.lineage;
      spdlog::info("{} seed {} {}: WER {:.2f}", to_string(run.scenario), run.seed, to_string(c),
                   row.wer.wer());
    } catch (const Error &e) {
      row.ok = false;
      row.error = e.what();
      spdlog::error("{} seed {} {}: {}", to_string(run.scenario), run.seed, to_string(c), e.what());
    }
    report.rows.push_back(std::move(row));
  }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentPlan &plan, const std::string &out_root,
                                std::string *run_dir) {
  plan.validate();
  const json plan_json = to_json(plan);
  ExperimentReport report;
  report.config_hash = config_hash(plan_json);
  const fs::path dir = fs::path(out_root) / ("run-" + report.config_hash);
  fs::create_directories(dir);
  write_file((dir / "plan.json").string(), plan_json.dump(2) + "\n");

  for (auto scenario : plan.scenarios)
    for (auto seed : plan.seeds) {
      SeedRun run{plan, scenario, seed,
                  dir / to_string(scenario) / ("seed-" + std::to_string(seed)), report.config_hash};
      run_seed(run, report);
    }

  write_file((dir / "report.json").string(), report.to_json().dump(2) + "\n");
  write_file((dir / "report.txt").string(), report.to_text());
  if (run_dir != nullptr) *run_dir = dir.string();
  return report;
}

}  // namespace mhctc
