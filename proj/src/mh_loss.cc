// src/mh_loss.cc


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

#include "mhctc/mh_loss.h"

#include <set>

#include "mhctc/errors.h"

namespace mhctc {

HypothesisSet HypothesisSet::single(Transcription c, std::string tag) {
  HypothesisSet hs;
  hs.hypotheses.push_back(std::move(c));
  hs.source_tags.push_back(std::move(tag));
  return hs;
}

void validate(const HypothesisSet &hs, int num_symbols) {
  if (hs.hypotheses.empty()) throw InvalidInput("hypothesis set is empty");
  if (hs.source_tags.size() != hs.hypotheses.size())
    throw InvalidInput("hypothesis set needs one source tag per hypothesis");
  std::set<std::string> tags(hs.source_tags.begin(), hs.source_tags.end());
  if (tags.size() != hs.source_tags.size())
    throw InvalidInput("hypothesis source tags must be unique");
  for (const auto &c : hs.hypotheses) validate(c, num_symbols);
}

CombinedLossResult mh_ctc_loss(const FrameLogProbs &logp, const HypothesisSet &hs) {
  validate(hs, logp.classes() - 1);
  CombinedLossResult out;
  out.per_hypothesis.reserve(hs.hypotheses.size());
  out.grad = Matrix::Zero(logp.frames(), logp.classes());
  for (int i = 0; i < hs.size(); ++i) {
    LossResult r;
    try {
      r = ctc_loss(logp, hs.hypotheses[i]);
    } catch (const InfeasibleAlignment &e) {
      throw InfeasibleAlignment("hypothesis " + std::to_string(i) + " (" +
                                    hs.source_tags[i] + "): " + e.what(),
                                e.frames(), e.required(), i);
    }
    out.per_hypothesis.push_back(r.loss);
    out.loss += r.loss;
    out.grad += r.grad;
  }
  return out;
}

}  // namespace mhctc
