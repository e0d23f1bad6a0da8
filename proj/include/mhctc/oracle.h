// mhctc/oracle.h


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

#ifndef MHCTC_ORACLE_H_
#define MHCTC_ORACLE_H_

#include <cstdint>

#include "mhctc/ctc.h"

namespace mhctc {

/// Largest path count the enumeration oracles accept.
inline constexpr std::int64_t kMaxOraclePaths = 10'000'000;

/// Collapses a frame-level path: merge repeats, then drop blanks.
Transcription collapse_path(const std::vector<int> &path);

/// -log of the summed probability of every length-T path collapsing to `c`,
/// by explicit enumeration of all (|U|+1)^T paths. Returns +inf when no
/// path collapses to `c`. Throws OracleTooLarge past kMaxOraclePaths.
double ctc_loss_bruteforce(const FrameLogProbs &logp, const Transcription &c);

/// -log[(sum over paths of c1) * (sum over paths of c2)], both sums taken
/// by enumeration. +inf if either labeling has no path.
double product_form_check(const FrameLogProbs &logp, const Transcription &c1,
                          const Transcription &c2);

}  // namespace mhctc

#endif  // MHCTC_ORACLE_H_
