// tests/acceptance.cc


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

// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Usage: acceptance [work_dir] [--only N]

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

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
#include "test_util.h"

namespace fs = std::filesystem;
using namespace mhctc;
using namespace mhctc::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string strf(const char *format, ...) __attribute__((format(printf, 1, 2)));
std::string strf(const char *format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Outcome ctc_oracle() {
  auto start = Clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int T = std::uniform_int_distribution<int>(1, 8)(rng);
    const int U = std::uniform_int_distribution<int>(1, 3)(rng);
    auto logp = random_logp(T, U + 1, rng);
    auto c = random_feasible(T, 3, U, rng);
    worst = std::max(worst, rel(ctc_loss(logp, c).loss, ctc_loss_bruteforce(logp, c)));
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-10 && secs < 30.0,
          strf("1000 instances, max rel err %.2e, %.1f s", worst, secs)};
}

Outcome gradient_checks() {
  auto start = Clock::now();
  std::mt19937_64 rng(1002);
  double worst_logits = 0.0, worst_params = 0.0;
  ModelConfig mc;
  mc.input_dim = 3;
  mc.context = 1;
  mc.hidden = 6;
  mc.num_classes = 4;
  for (int i = 0; i < 100; ++i) {
    const int T = std::uniform_int_distribution<int>(2, 8)(rng);
    Matrix z = random_logits(T, 4, rng);
    auto c = random_feasible(T, 3, 3, rng);
    auto logp = FrameLogProbs::from_logits(z);
    Eigen::VectorXd analytic = flatten(logits_grad(logp, ctc_loss(logp, c).grad));
    auto f = [&](const Eigen::VectorXd &v) {
      return ctc_loss(FrameLogProbs::from_logits(unflatten(v, T, 4)), c).loss;
    };
    worst_logits = std::max(worst_logits, relative_error(analytic, numeric_gradient(f, flatten(z), 1e-5)));

    ModelParams p = init_model(mc, 5000 + i);
    TrainItem item{"u", random_logits(T, 3, rng, 1.0), HypothesisSet::single(c)};
    auto g = [&](const Eigen::VectorXd &v) {
      return mh_ctc_loss(forward(unpack(p, v), item.features), item.supervision).loss;
    };
    worst_params = std::max(worst_params, relative_error(pack(utterance_loss(p, item).grad),
                                                         numeric_gradient(g, pack(p), 1e-5)));
  }
  const double secs = seconds_since(start);
  return {worst_logits <= 1e-6 && worst_params <= 1e-5 && secs < 60.0,
          strf("100 instances, logits %.2e (<= 1e-6), params %.2e (<= 1e-5), %.1f s",
              worst_logits, worst_params, secs)};
}

Outcome mh_identities() {
  auto start = Clock::now();
  std::mt19937_64 rng(1003);
  double additivity = 0.0, product = 0.0, degeneracy = 0.0, symmetry = 0.0;
  for (int i = 0; i < 500; ++i) {
    const int T = std::uniform_int_distribution<int>(2, 7)(rng);
    auto logp = random_logp(T, 4, rng);
    const int N = std::uniform_int_distribution<int>(1, 4)(rng);
    HypothesisSet hs;
    double sum = 0.0;
    for (int n = 0; n < N; ++n) {
      hs.hypotheses.push_back(random_feasible(T, 3, 3, rng));
      hs.source_tags.push_back("h" + std::to_string(n));
      sum += ctc_loss(logp, hs.hypotheses.back()).loss;
    }
    additivity = std::max(additivity, rel(mh_ctc_loss(logp, hs).loss, sum));
  }
  for (int i = 0; i < 500; ++i) {
    const int T = std::uniform_int_distribution<int>(2, 7)(rng);
    auto logp = random_logp(T, 4, rng);
    auto c1 = random_feasible(T, 3, 3, rng), c2 = random_feasible(T, 3, 3, rng);
    HypothesisSet hs{{c1, c2}, {"A", "B"}};
    product = std::max(product, rel(mh_ctc_loss(logp, hs).loss, product_form_check(logp, c1, c2)));
  }
  for (int i = 0; i < 500; ++i) {
    const int T = std::uniform_int_distribution<int>(1, 8)(rng);
    auto logp = random_logp(T, 4, rng);
    auto c = random_feasible(T, 4, 3, rng);
    auto single = ctc_loss(logp, c);
    auto mh = mh_ctc_loss(logp, HypothesisSet::single(c));
    degeneracy = std::max({degeneracy, rel(mh.loss, single.loss),
                           (mh.grad - single.grad).cwiseAbs().maxCoeff()});
  }
  for (int i = 0; i < 500; ++i) {
    const int T = std::uniform_int_distribution<int>(2, 7)(rng);
    auto logp = random_logp(T, 4, rng);
    HypothesisSet fwd, rev;
    const int N = std::uniform_int_distribution<int>(2, 4)(rng);
    for (int n = 0; n < N; ++n) {
      fwd.hypotheses.push_back(random_feasible(T, 3, 3, rng));
      fwd.source_tags.push_back("h" + std::to_string(n));
    }
    rev.hypotheses.assign(fwd.hypotheses.rbegin(), fwd.hypotheses.rend());
    rev.source_tags.assign(fwd.source_tags.rbegin(), fwd.source_tags.rend());
    auto a = mh_ctc_loss(logp, fwd), b = mh_ctc_loss(logp, rev);
    symmetry = std::max({symmetry, rel(a.loss, b.loss), (a.grad - b.grad).cwiseAbs().maxCoeff()});
  }
  const double secs = seconds_since(start);
  return {additivity <= 1e-12 && product <= 1e-10 && degeneracy <= 1e-15 && symmetry <= 1e-12 &&
              secs < 60.0,
          strf("500 each: additivity %.2e, product form %.2e, N=1 %.2e, order %.2e, %.1f s",
              additivity, product, degeneracy, symmetry, secs)};
}

Outcome decoder_oracle() {
  std::mt19937_64 rng(1004);
  int label_mismatch = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int T = std::uniform_int_distribution<int>(1, 5)(rng);
    const int U = std::uniform_int_distribution<int>(1, 2)(rng);
    auto logp = random_logp(T, U + 1, rng, 3.0);
    auto oracle = most_probable_labeling(logp);
    DecodeConfig cfg;
    cfg.beam_width = static_cast<int>(std::pow(U + 1, T));
    auto h = beam_decode(logp, cfg);
    if (h.transcription.labels != oracle.labeling) ++label_mismatch;
    worst = std::max(worst, std::abs(h.log_prob - oracle.log_prob));
  }
  return {label_mismatch == 0 && worst <= 1e-9,
          strf("200 instances, %d labeling mismatches, max |dlogp| %.2e", label_mismatch, worst)};
}

Outcome edit_distance_oracle() {
  std::mt19937_64 rng(1005);
  int mismatches = 0, axiom_failures = 0;
  for (int i = 0; i < 500; ++i) {
    auto a = random_tokens(8, 4, rng), b = random_tokens(8, 4, rng), c = random_tokens(8, 4, rng);
    const int ab = edit_distance(a, b).errors();
    if (ab != recursive_edit_distance(a, b)) ++mismatches;
    if (edit_distance(a, a).errors() != 0) ++axiom_failures;
    if ((ab == 0) != (a == b)) ++axiom_failures;
    if (ab != edit_distance(b, a).errors()) ++axiom_failures;
    if (edit_distance(a, c).errors() > ab + edit_distance(b, c).errors()) ++axiom_failures;
  }
  return {mismatches == 0 && axiom_failures == 0,
          strf("500 pairs, %d oracle mismatches, %d axiom failures", mismatches, axiom_failures)};
}

Outcome condition_ordering(const fs::path &work) {
  auto start = Clock::now();
  ExperimentPlan plan;  // defaults: both scenarios, all conditions, seeds 1..5
  ExperimentReport report = run_experiment(plan, (work / "grid").string());
  const double secs = seconds_since(start);
  bool ok = !report.any_failed() && secs < 900.0;
  std::string detail;
  for (Scenario s : plan.scenarios) {
    auto w = [&](AdaptCondition c) { return report.mean_wer(s, c); };
    const double all = w(AdaptCondition::kSupervisedAll), mh = w(AdaptCondition::kMhCtc);
    const double lab = w(AdaptCondition::kSupervisedLabeled), none = w(AdaptCondition::kNoAdapt);
    const double sa = w(AdaptCondition::kSemiSupA), sb = w(AdaptCondition::kSemiSupB);
    bool lowest = true;
    for (AdaptCondition c : all_conditions()) lowest = lowest && all <= w(c);
    const bool holds = lowest && mh < lab && mh <= sa && mh <= sb && lab <= none;
    ok = ok && holds;
    detail += strf("%s%s: all %.2f mh %.2f semiA %.2f semiB %.2f lab %.2f none %.2f (rel %.1f%%)%s",
                  detail.empty() ? "" : "; ", to_string(s).c_str(), all, mh, sa, sb, lab, none,
                  report.relative_reduction(s, AdaptCondition::kMhCtc), holds ? "" : " ORDER");
  }
  return {ok, detail + strf("; %.0f s", secs)};
}

std::map<std::string, std::string> snapshot(const fs::path &dir) {
  std::map<std::string, std::string> files;
  for (const auto &e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path().string());
  return files;
}

Outcome determinism(const fs::path &work) {
  ExperimentPlan plan;
  plan.seeds = {1};
  std::string first_dir, second_dir;
  run_experiment(plan, (work / "det1").string(), &first_dir);
  run_experiment(plan, (work / "det2").string(), &second_dir);
  auto a = snapshot(first_dir), b = snapshot(second_dir);
  int ckpts = 0, differing = 0;
  std::string names;
  for (const auto &[name, bytes] : a) {
    if (name.ends_with(".ckpt")) ++ckpts;
    auto it = b.find(name);
    if (it == b.end() || it->second != bytes) {
      if (++differing <= 5) names += " " + name;
    }
  }
  const bool same_name = fs::path(first_dir).filename() == fs::path(second_dir).filename();
  return {a.size() == b.size() && differing == 0 && same_name && ckpts > 0 &&
              a.count("report.json") == 1,
          strf("seed-1 grid run twice: %zu files (%d checkpoints), %d differ%s%s", a.size(), ckpts,
              differing, differing ? ":" : "", names.c_str())};
}

Outcome feature_sanity() {
  SynthConfig cfg;
  auto templates = default_templates(cfg.alphabet.size(), cfg.sample_rate);
  const auto centers = mel_band_centers(12, 20.0, cfg.sample_rate / 2.0);
  int argmax_failures = 0;
  for (FeatureKind kind : {FeatureKind::kFbank, FeatureKind::kSte}) {
    FeatureConfig fc;
    fc.kind = kind;
    fc.add_deltas = false;
    for (int s = 1; s <= cfg.alphabet.size(); ++s) {
      for (double hz : {templates[s - 1].f1, templates[s - 1].f2}) {
        std::vector<double> tone(2400);
        for (size_t n = 0; n < tone.size(); ++n)
          tone[n] = 0.5 * std::sin(2.0 * M_PI * hz * static_cast<double>(n) / cfg.sample_rate);
        Matrix x = kind == FeatureKind::kFbank ? fbank(tone, cfg.sample_rate, fc)
                                               : ste(tone, cfg.sample_rate, fc);
        Eigen::Index arg;
        x.row(x.rows() / 2).maxCoeff(&arg);
        if (arg != nearest_band(centers, hz)) ++argmax_failures;
      }
    }
  }
  double worst_snr = 0.0;
  for (NoiseKind kind : {NoiseKind::kBabble, NoiseKind::kBandLimited}) {
    for (double snr : {0.0, 5.0, 10.0, 15.0, 20.0}) {
      SynthConfig n = cfg;
      n.noise_kind = kind;
      n.snr_db = snr;
      for (const auto &u : synth_corpus(n, 10, 4, 10))
        worst_snr = std::max(worst_snr, std::abs(u.realized_snr_db - snr));
    }
  }
  return {argmax_failures == 0 && worst_snr <= 0.1,
          strf("20 tones x 2 front ends, %d argmax failures; 100 noisy utterances, max SNR error "
              "%.2e dB",
              argmax_failures, worst_snr)};
}

}  // namespace

int main(int argc, char **argv) {
  fs::path work = fs::temp_directory_path() / "mhctc_acceptance";
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) only = std::stoi(argv[++i]);
    else work = arg;
  }
  fs::remove_all(work);
  fs::create_directories(work);
  spdlog::set_level(spdlog::level::warn);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"ctc-oracle-equivalence", ctc_oracle},
      {"gradient-checks", gradient_checks},
      {"mh-loss-identities", mh_identities},
      {"decoder-oracle", decoder_oracle},
      {"edit-distance-oracle", edit_distance_oracle},
      {"condition-ordering", [&] { return condition_ordering(work); }},
      {"determinism", [&] { return determinism(work); }},
      {"feature-sanity", feature_sanity},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  fs::remove_all(work);
  return failed == 0 ? 0 : 1;
}
