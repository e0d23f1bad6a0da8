// mhctc/mh_loss.h


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

#ifndef MHCTC_MH_LOSS_H_
#define MHCTC_MH_LOSS_H_

#include <string>
#include <vector>

#include "mhctc/ctc.h"

namespace mhctc {

/// N >= 1 one-best hypotheses for the same utterance, one per producing
/// system. Identical hypotheses are kept as-is.
struct HypothesisSet {
  std::vector<Transcription> hypotheses;
  std::vector<std::string> source_tags;

  int size() const { return static_cast<int>(hypotheses.size()); }

  /// A manual transcription as an N=1 set.
  static HypothesisSet single(Transcription c, std::string tag = "manual");
};

/// Throws InvalidInput for an empty set, mismatched tag count or duplicate
/// tags, InvalidLabel for labels outside the alphabet.
void validate(const HypothesisSet &hs, int num_symbols);

struct CombinedLossResult {
  double loss = 0.0;
  std::vector<double> per_hypothesis;
  Matrix grad;
};

/// Sum of the standard CTC losses of every hypothesis against the same
/// frame log-probs; the gradient is the sum of per-hypothesis gradients.
/// An infeasible hypothesis raises InfeasibleAlignment with its index.
CombinedLossResult mh_ctc_loss(const FrameLogProbs &logp, const HypothesisSet &hs);

}  // namespace mhctc

#endif  // MHCTC_MH_LOSS_H_
