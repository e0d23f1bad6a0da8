// mhctc/ctc.h

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

#ifndef MHCTC_CTC_H_
#define MHCTC_CTC_H_

#include <string>
#include <string_view>
#include <vector>

#include "mhctc/matrix.h"

namespace mhctc {

/// Index of the blank symbol in every output distribution.
inline constexpr int kBlank = 0;

/// Floor applied to probabilities read from external inputs.
inline constexpr double kMinProb = 1e-30;

/// Ordered set of distinct output characters. Blank is not a member; symbol
/// i of the alphabet maps to output index i + 1.
class LabelAlphabet {
 public:
  LabelAlphabet() = default;
  explicit LabelAlphabet(std::string symbols);

  const std::string &symbols() const { return symbols_; }
  /// |U|, the number of non-blank symbols.
  int size() const { return static_cast<int>(symbols_.size()); }
  /// |U| + 1.
  int output_dim() const { return size() + 1; }

  int index_of(char symbol) const;
  char symbol_at(int index) const;

  bool operator==(const LabelAlphabet &other) const = default;

 private:
  std::string symbols_;
};

/// Sequence of alphabet indices in [1, |U|].
struct Transcription {
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
  bool empty() const { return labels.empty(); }
  bool operator==(const Transcription &other) const = default;
  auto operator<=>(const Transcription &other) const = default;
};

Transcription encode(const LabelAlphabet &alphabet, std::string_view text);
std::string decode(const LabelAlphabet &alphabet, const Transcription &c);

/// Throws InvalidLabel unless every label is in [1, num_symbols].
void validate(const Transcription &c, int num_symbols);

/// T x (|U|+1) per-frame log-probabilities. Rows are normalized; the
/// constructor checks shape and finiteness, not normalization.
class FrameLogProbs {
 public:
  FrameLogProbs() = default;
  explicit FrameLogProbs(Matrix logp);

  /// Row-wise log-softmax of unnormalized scores.
  static FrameLogProbs from_logits(const Matrix &logits);

  const Matrix &matrix() const { return logp_; }
  int frames() const { return static_cast<int>(logp_.rows()); }
  int classes() const { return static_cast<int>(logp_.cols()); }
  double operator()(int t, int k) const { return logp_(t, k); }

  /// Largest |logsumexp(row)| over all rows.
  double max_normalization_error() const;

 private:
  Matrix logp_;
};

/// The interleaved sequence (blank, c_1, blank, ..., c_L, blank).
struct ExtendedLabelSequence {
  std::vector<int> ext;
  int size() const { return static_cast<int>(ext.size()); }
};

struct LossResult {
  /// -log P(C|X) in nats.
  double loss = 0.0;
  /// d loss / d logp, same shape as the input.
  Matrix grad;
};

ExtendedLabelSequence expand_labels(const Transcription &c, int num_symbols);

/// L plus the number of adjacent repeated labels.
int min_frames(const Transcription &c);

/// Standard CTC loss by log-space forward-backward. Per-utterance, not
/// normalized by T.
LossResult ctc_loss(const FrameLogProbs &logp, const Transcription &c);

/// Loss only; skips the backward pass.
double ctc_score(const FrameLogProbs &logp, const Transcription &c);

/// Chains a gradient w.r.t. log-softmax outputs back to the logits.
Matrix logits_grad(const FrameLogProbs &logp, const Matrix &grad_logp);

}  // namespace mhctc

#endif  // MHCTC_CTC_H_
