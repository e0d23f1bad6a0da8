// mhctc/decode.h


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

#ifndef MHCTC_DECODE_H_
#define MHCTC_DECODE_H_

#include "mhctc/ctc.h"

namespace mhctc {

enum class DecodeMode { kGreedy, kBeam };

struct DecodeConfig {
  int beam_width = 20;
  DecodeMode mode = DecodeMode::kBeam;
};

struct DecodedHypothesis {
  Transcription transcription;
  /// log P(transcription | X), summed over every path that collapses to it.
  double log_prob = 0.0;
};

/// Per-frame argmax (ties to the lowest class), merge repeats, drop blanks.
DecodedHypothesis greedy_decode(const FrameLogProbs &logp);

/// CTC prefix beam search without a language model. Keeps the beam_width
/// most probable prefixes per frame, each with separate blank-ending and
/// label-ending log-mass. Ties go to the lexicographically smaller prefix.
/// The returned log_prob is the prefix mass tracked by the search.
DecodedHypothesis beam_decode(const FrameLogProbs &logp, const DecodeConfig &cfg);

/// greedy_decode or beam_decode according to cfg.mode.
DecodedHypothesis decode(const FrameLogProbs &logp, const DecodeConfig &cfg);

}  // namespace mhctc

#endif  // MHCTC_DECODE_H_
