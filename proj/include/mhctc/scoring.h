// mhctc/scoring.h


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

#ifndef MHCTC_SCORING_H_
#define MHCTC_SCORING_H_

#include <string>
#include <vector>

namespace mhctc {

struct WerReport {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int ref_words = 0;
  /// Set when the reference was empty but the hypothesis was not; the
  /// rate is then computed against a denominator of 1.
  bool empty_reference = false;

  int errors() const { return substitutions + insertions + deletions; }
  /// 100 (S + I + D) / ref_words.
  double wer() const;

  WerReport &operator+=(const WerReport &other);
};

/// Levenshtein alignment of token sequences; on equal cost prefers a
/// match/substitution, then a deletion, then an insertion.
WerReport edit_distance(const std::vector<std::string> &ref,
                        const std::vector<std::string> &hyp);

/// Splits a symbol string into consecutive words of `word_length` symbols;
/// the last word may be shorter.
std::vector<std::string> chunk_words(const std::string &symbols, int word_length = 3);

/// One token per character.
std::vector<std::string> characters(const std::string &symbols);

}  // namespace mhctc

#endif  // MHCTC_SCORING_H_
