// tests/test_pipeline.cc


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

#include <doctest.h>

#include <filesystem>
#include <set>

#include "mhctc/errors.h"
#include "mhctc/json.h"
#include "mhctc/pipeline.h"

using namespace mhctc;

namespace {

std::vector<Utterance> corpus(int n, std::uint64_t seed = 3) {
  SynthConfig cfg;
  cfg.seed = seed;
  return synth_corpus(cfg, n, 3, 5);
}

ModelConfig tiny_model() {
  ModelConfig m;
  m.context = 1;
  m.hidden = 16;
  return m;
}

TrainConfig short_train(int epochs = 3) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 4;
  return t;
}

ExperimentPlan tiny_plan() {
  ExperimentPlan p;
  p.seeds = {1};
  p.train_utts = 16;
  p.split = SplitSizes{3, 4, 5};
  p.len_min = 3;
  p.len_max = 5;
  p.model = tiny_model();
  p.train = short_train(2);
  p.adapt_epochs = 1;
  p.decode.beam_width = 4;
  p.write_waveforms = false;
  return p;
}

std::set<std::string> ids(const std::vector<Utterance> &u) {
  std::set<std::string> out;
  for (const auto &x : u) out.insert(x.id);
  return out;
}

std::string fresh_dir(const std::string &name) {
  auto dir = std::filesystem::temp_directory_path() / ("mhctc_pipe_" + name);
  std::filesystem::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("splits") {
  auto c = corpus(20);
  SUBCASE("everything to test") {
    auto s = make_splits(c, SplitSizes{0, 0, 20}, 1);
    CHECK(s.labeled.empty());
    CHECK(s.unlabeled.empty());
    CHECK(s.test.size() == 20);
  }
  SUBCASE("disjoint and deterministic") {
    auto s = make_splits(c, SplitSizes{3, 6, 11}, 5);
    auto t = make_splits(c, SplitSizes{3, 6, 11}, 5);
    CHECK(ids(s.labeled) == ids(t.labeled));
    CHECK(ids(s.test) == ids(t.test));
    std::set<std::string> all = ids(s.labeled);
    for (const auto &id : ids(s.unlabeled)) CHECK(all.insert(id).second);
    for (const auto &id : ids(s.test)) CHECK(all.insert(id).second);
    CHECK(all.size() == 20);
  }
  SUBCASE("default sizes need 231 utterances") {
    auto big = corpus(231);
    auto s = make_splits(big, SplitSizes{}, 1);
    CHECK(s.labeled.size() == 30);
    CHECK(s.unlabeled.size() == 61);
    CHECK(s.test.size() == 140);
    CHECK_THROWS_AS(make_splits(corpus(230), SplitSizes{}, 1), SizeError);
  }
  SUBCASE("duplicate ids") {
    auto dup = c;
    dup[1].id = dup[0].id;
    CHECK_THROWS_AS(make_splits(dup, SplitSizes{1, 1, 1}, 1), SizeError);
  }
}

TEST_CASE("initial training and supervised stage") {
  auto c = corpus(24);
  LabelAlphabet alpha("abcde");
  FeatureStore store{FeatureConfig{}};
  auto split = make_splits(c, SplitSizes{4, 6, 6}, 2);
  std::vector<Utterance> train(c.begin(), c.begin() + 8);
  std::vector<double> curve;
  Checkpoint a = train_initial(train, alpha, store.config(FeatureKind::kFbank), tiny_model(),
                               short_train(4), 11, store, &curve);
  Checkpoint b = train_initial(train, alpha, store.config(FeatureKind::kSte), tiny_model(),
                               short_train(4), 12, store);
  CHECK(a.lineage == std::vector<std::string>{"init-fbank"});
  CHECK(b.lineage == std::vector<std::string>{"init-ste"});
  CHECK(a.parent_digest.empty());
  REQUIRE(curve.size() == 4);
  CHECK(curve.back() < curve.front());

  SUBCASE("empty labeled set leaves models unchanged") {
    AdaptationSplit empty = split;
    empty.labeled.clear();
    auto [ra, rb] = run_supervised_stage(a, b, empty, short_train(), store);
    CHECK(ra.checkpoint == a);
    CHECK(rb.checkpoint == b);
  }
  SUBCASE("supervised stage lowers the labeled loss and reruns identically") {
    TrainConfig cfg = short_train(8);
    auto [ra, rb] = run_supervised_stage(a, b, split, cfg, store);
    auto items = supervised_items(split.labeled, FeatureKind::kFbank, store);
    CHECK(mean_loss(ra.checkpoint.params, items) < mean_loss(a.params, items));
    CHECK(ra.checkpoint.parent_digest == digest(a));
    CHECK(ra.checkpoint.lineage.back() == "supervised-fbank");
    auto again = run_supervised_stage(a, b, split, cfg, store);
    CHECK(again.first.checkpoint == ra.checkpoint);
    CHECK(again.second.checkpoint == rb.checkpoint);
  }
  SUBCASE("pseudo-labels are deterministic and cover the unlabeled set") {
    DecodeConfig dc;
    dc.beam_width = 4;
    auto [ha, hb] = run_pseudo_label_stage(a, b, split, dc, store);
    auto [ha2, hb2] = run_pseudo_label_stage(a, b, split, dc, store);
    CHECK(ha.source_tag == "A");
    CHECK(hb.source_tag == "B");
    CHECK(ha.by_id == ha2.by_id);
    CHECK(hb.log_prob == hb2.log_prob);
    CHECK(ha.by_id.size() + ha.dropped.size() == split.unlabeled.size());
  }
  SUBCASE("identical hypothesis sets double the loss under mh-ctc") {
    DecodeConfig dc;
    dc.beam_width = 4;
    PseudoLabels ha = pseudo_label(a, split.unlabeled, dc, "A", store);
    PseudoLabels hb = ha;
    hb.source_tag = "B";
    auto mh = adaptation_items(AdaptCondition::kMhCtc, split, &ha, &hb, FeatureKind::kFbank, store);
    auto single = adaptation_items(AdaptCondition::kSemiSupA, split, &ha, nullptr,
                                   FeatureKind::kFbank, store);
    REQUIRE(mh.size() == single.size());
    double sum_mh = 0.0, sum_single = 0.0;
    int counted = 0;
    for (size_t i = 0; i < mh.size(); ++i) {
      if (single[i].supervision.hypotheses.size() != 1 ||
          mh[i].supervision.hypotheses.size() != 2)
        continue;  // labeled items
      sum_mh += utterance_loss(a.params, mh[i]).loss;
      sum_single += utterance_loss(a.params, single[i]).loss;
      ++counted;
    }
    REQUIRE(counted > 0);
    CHECK(sum_mh / sum_single == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("adaptation conditions start from the initial model") {
    auto none = run_adaptation_condition(AdaptCondition::kNoAdapt, a, split, nullptr, nullptr,
                                         short_train(1), store);
    CHECK(none.checkpoint == a);
    auto all = run_adaptation_condition(AdaptCondition::kSupervisedAll, a, split, nullptr,
                                        nullptr, short_train(1), store);
    CHECK(all.checkpoint.parent_digest == digest(a));
    CHECK(all.checkpoint.lineage ==
          std::vector<std::string>{"init-fbank", "adapt-supervised-all"});
    auto items = adaptation_items(AdaptCondition::kSupervisedAll, split, nullptr, nullptr,
                                  FeatureKind::kFbank, store);
    CHECK(items.size() == split.labeled.size() + split.unlabeled.size());
  }
  SUBCASE("evaluation") {
    DecodeConfig dc;
    dc.beam_width = 4;
    auto ev = evaluate(a, split.test, dc, store);
    CHECK(ev.records.size() == split.test.size());
    CHECK(ev.wer.ref_words > 0);
    CHECK(ev.cer.ref_words >= ev.wer.ref_words);
  }
}

TEST_CASE("plan json round trip and validation") {
  ExperimentPlan p = tiny_plan();
  p.adapt_learning_rate = 0.02;
  nlohmann::json j = to_json(p);
  CHECK(to_json(plan_from_json(j)) == j);
  auto bad = j;
  bad["no_such_key"] = 1;
  CHECK_THROWS_AS(plan_from_json(bad), ConfigError);
  auto bad_seeds = j;
  bad_seeds["seeds"] = nlohmann::json::array();
  CHECK_THROWS_AS(plan_from_json(bad_seeds).validate(), ConfigError);
  CHECK(p.adapt_config(3).learning_rate == 0.02);
  CHECK(p.adapt_config(3).epochs == 1);
}

TEST_CASE("small experiment runs end to end and is reproducible") {
  ExperimentPlan p = tiny_plan();
  p.write_waveforms = true;
  const std::string root = fresh_dir("run");
  std::string run_dir;
  ExperimentReport r = run_experiment(p, root, &run_dir);
  CHECK(r.rows.size() == 2 * all_conditions().size());
  CHECK_FALSE(r.any_failed());
  CHECK(std::filesystem::exists(run_dir + "/report.json"));
  CHECK(std::filesystem::exists(run_dir + "/plan.json"));
  for (const auto &row : r.rows) {
    CHECK(row.ok);
    CHECK(row.lineage.front() == "init-fbank");
    if (row.condition == AdaptCondition::kNoAdapt) CHECK(row.parent_digest.empty());
    else CHECK_FALSE(row.parent_digest.empty());
  }
  CHECK(r.to_text().find("mh-ctc") != std::string::npos);
  // Waveform paths are relative to the manifest so run directories can move.
  auto manifest = read_manifest(run_dir + "/clean-train/seed-1/train.tsv");
  REQUIRE_FALSE(manifest.empty());
  CHECK(manifest[0].wav_path == "wav/" + manifest[0].id + ".wav");
  CHECK(std::filesystem::exists(run_dir + "/clean-train/seed-1/" + manifest[0].wav_path));

  const std::string first = read_file(run_dir + "/report.json");
  const std::string ckpt = run_dir + "/clean-train/seed-1/ckpt/adapt-mh-ctc.ckpt";
  REQUIRE(std::filesystem::exists(ckpt));
  const std::string first_ckpt = read_file(ckpt);
  std::filesystem::remove_all(run_dir);
  std::string again_dir;
  run_experiment(p, root, &again_dir);
  CHECK(again_dir == run_dir);
  CHECK(read_file(run_dir + "/report.json") == first);
  CHECK(read_file(ckpt) == first_ckpt);
  std::filesystem::remove_all(root);
}
