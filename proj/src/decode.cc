// src/decode.cc


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

#include "mhctc/decode.h"

#include <algorithm>
#include <map>

#include "mhctc/errors.h"

namespace mhctc {

DecodedHypothesis greedy_decode(const FrameLogProbs &logp) {
  DecodedHypothesis out;
  int prev = -1;
  for (int t = 0; t < logp.frames(); ++t) {
    int best = 0;
    for (int k = 1; k < logp.classes(); ++k)
      if (logp(t, k) > logp(t, best)) best = k;
    if (best != prev && best != kBlank) out.transcription.labels.push_back(best);
    prev = best;
  }
  out.log_prob = -ctc_score(logp, out.transcription);
  return out;
}

namespace {

struct PrefixMass {
  double blank = kLogZero;      // paths ending in blank
  double non_blank = kLogZero;  // paths ending in the prefix's last label
  double total() const { return log_add(blank, non_blank); }
};

using Beam = std::map<std::vector<int>, PrefixMass>;

// Higher mass first; equal mass resolved by lexicographic prefix order.
bool better(const std::pair<std::vector<int>, double> &a,
            const std::pair<std::vector<int>, double> &b) {
  if (a.second != b.second) return a.second > b.second;
  return a.first < b.first;
}

Beam prune(Beam beam, int width) {
  if (static_cast<int>(beam.size()) <= width) return beam;
  std::vector<std::pair<std::vector<int>, double>> ranked;
  ranked.reserve(beam.size());
  for (const auto &[prefix, mass] : beam) ranked.emplace_back(prefix, mass.total());
  std::partial_sort(ranked.begin(), ranked.begin() + width, ranked.end(), better);
  Beam kept;
  for (int i = 0; i < width; ++i) kept.emplace(ranked[i].first, beam.at(ranked[i].first));
  return kept;
}

}  // namespace

DecodedHypothesis beam_decode(const FrameLogProbs &logp, const DecodeConfig &cfg) {
  if (cfg.beam_width < 1) throw ConfigError("beam_width must be >= 1");
  const int K = logp.classes();
  Beam beam;
  beam[{}].blank = 0.0;
  for (int t = 0; t < logp.frames(); ++t) {
    Beam next;
    for (const auto &[prefix, mass] : beam) {
      const double total = mass.total();
      PrefixMass &same = next[prefix];
      same.blank = log_add(same.blank, total + logp(t, kBlank));
      if (!prefix.empty()) {
        same.non_blank = log_add(same.non_blank, mass.non_blank + logp(t, prefix.back()));
      }
      for (int k = 1; k < K; ++k) {
        std::vector<int> extended = prefix;
        extended.push_back(k);
        PrefixMass &ext = next[extended];
        // Repeating the last label needs a blank in between.
        const double from = (!prefix.empty() && prefix.back() == k) ? mass.blank : total;
        ext.non_blank = log_add(ext.non_blank, from + logp(t, k));
      }
    }
    beam = prune(std::move(next), cfg.beam_width);
  }

  DecodedHypothesis out;
  std::pair<std::vector<int>, double> best{{}, kLogZero};
  bool first = true;
  for (const auto &[prefix, mass] : beam) {
    std::pair<std::vector<int>, double> cand{prefix, mass.total()};
    if (first || better(cand, best)) best = cand;
    first = false;
  }
  out.transcription.labels = best.first;
  out.log_prob = best.second;
  return out;
}

DecodedHypothesis decode(const FrameLogProbs &logp, const DecodeConfig &cfg) {
  return cfg.mode == DecodeMode::kGreedy ? greedy_decode(logp) : beam_decode(logp, cfg);
}

}  // namespace mhctc
