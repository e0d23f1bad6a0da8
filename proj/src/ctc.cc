// src/ctc.cc

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

#include "mhctc/ctc.h"

#include <set>
#include <sstream>

#include "mhctc/errors.h"

namespace mhctc {

LabelAlphabet::LabelAlphabet(std::string symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) throw InvalidInput("alphabet must not be empty");
  std::set<char> seen(symbols_.begin(), symbols_.end());
  if (seen.size() != symbols_.size())
    throw InvalidInput("alphabet symbols must be distinct: \"" + symbols_ + "\"");
}

int LabelAlphabet::index_of(char symbol) const {
  auto pos = symbols_.find(symbol);
  if (pos == std::string::npos)
    throw InvalidLabel(std::string("symbol '") + symbol + "' not in alphabet");
  return static_cast<int>(pos) + 1;
}

char LabelAlphabet::symbol_at(int index) const {
  if (index < 1 || index > size())
    throw InvalidLabel("label index " + std::to_string(index) +
                       " outside [1, " + std::to_string(size()) + "]");
  return symbols_[index - 1];
}

Transcription encode(const LabelAlphabet &alphabet, std::string_view text) {
  Transcription c;
  c.labels.reserve(text.size());
  for (char ch : text) c.labels.push_back(alphabet.index_of(ch));
  return c;
}

std::string decode(const LabelAlphabet &alphabet, const Transcription &c) {
  std::string out;
  out.reserve(c.labels.size());
  for (int label : c.labels) out.push_back(alphabet.symbol_at(label));
  return out;
}

void validate(const Transcription &c, int num_symbols) {
  for (int label : c.labels) {
    if (label < 1 || label > num_symbols)
      throw InvalidLabel("label index " + std::to_string(label) +
                         " outside [1, " + std::to_string(num_symbols) + "]");
  }
}

FrameLogProbs::FrameLogProbs(Matrix logp) : logp_(std::move(logp)) {
  if (logp_.rows() < 1 || logp_.cols() < 2)
    throw ShapeError("frame log-probs need T >= 1 rows and >= 2 classes");
  if (!logp_.allFinite())
    throw InvalidInput("frame log-probs contain non-finite entries");
}

FrameLogProbs FrameLogProbs::from_logits(const Matrix &logits) {
  if (!logits.allFinite()) throw InvalidInput("logits contain non-finite entries");
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    double mx = logits.row(t).maxCoeff();
    double lse = mx + std::log((logits.row(t).array() - mx).exp().sum());
    out.row(t) = logits.row(t).array() - lse;
  }
  return FrameLogProbs(std::move(out));
}

double FrameLogProbs::max_normalization_error() const {
  double worst = 0.0;
  for (Eigen::Index t = 0; t < logp_.rows(); ++t) {
    double mx = logp_.row(t).maxCoeff();
    double lse = mx + std::log((logp_.row(t).array() - mx).exp().sum());
    worst = std::max(worst, std::abs(lse));
  }
  return worst;
}

ExtendedLabelSequence expand_labels(const Transcription &c, int num_symbols) {
  validate(c, num_symbols);
  ExtendedLabelSequence e;
  e.ext.assign(2 * c.labels.size() + 1, kBlank);
  for (size_t l = 0; l < c.labels.size(); ++l) e.ext[2 * l + 1] = c.labels[l];
  return e;
}

int min_frames(const Transcription &c) {
  int repeats = 0;
  for (size_t l = 1; l < c.labels.size(); ++l)
    if (c.labels[l] == c.labels[l - 1]) ++repeats;
  return c.size() + repeats;
}

namespace {

// Emission log-probs per extended state, floored, laid out T x S.
Matrix gather_emissions(const FrameLogProbs &logp,
                        const ExtendedLabelSequence &e) {
  const double floor = std::log(kMinProb);
  const int T = logp.frames(), S = e.size();
  Matrix emit(T, S);
  for (int t = 0; t < T; ++t)
    for (int s = 0; s < S; ++s)
      emit(t, s) = std::max(logp(t, e.ext[s]), floor);
  return emit;
}

// A skip from s-2 to s is allowed when s is a label differing from s-2.
bool can_skip(const ExtendedLabelSequence &e, int s) {
  return s >= 2 && e.ext[s] != kBlank && e.ext[s] != e.ext[s - 2];
}

Matrix forward_pass(const Matrix &emit, const ExtendedLabelSequence &e) {
  const int T = static_cast<int>(emit.rows()), S = e.size();
  Matrix alpha = Matrix::Constant(T, S, kLogZero);
  alpha(0, 0) = emit(0, 0);
  if (S > 1) alpha(0, 1) = emit(0, 1);
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double acc = alpha(t - 1, s);
      if (s >= 1) acc = log_add(acc, alpha(t - 1, s - 1));
      if (can_skip(e, s)) acc = log_add(acc, alpha(t - 1, s - 2));
      alpha(t, s) = acc == kLogZero ? kLogZero : acc + emit(t, s);
    }
  }
  return alpha;
}

Matrix backward_pass(const Matrix &emit, const ExtendedLabelSequence &e) {
  const int T = static_cast<int>(emit.rows()), S = e.size();
  Matrix beta = Matrix::Constant(T, S, kLogZero);
  beta(T - 1, S - 1) = emit(T - 1, S - 1);
  if (S > 1) beta(T - 1, S - 2) = emit(T - 1, S - 2);
  for (int t = T - 2; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      double acc = beta(t + 1, s);
      if (s + 1 < S) acc = log_add(acc, beta(t + 1, s + 1));
      if (s + 2 < S && can_skip(e, s + 2)) acc = log_add(acc, beta(t + 1, s + 2));
      beta(t, s) = acc == kLogZero ? kLogZero : acc + emit(t, s);
    }
  }
  return beta;
}

double total_log_prob(const Matrix &alpha) {
  const Eigen::Index T = alpha.rows(), S = alpha.cols();
  double lp = alpha(T - 1, S - 1);
  if (S > 1) lp = log_add(lp, alpha(T - 1, S - 2));
  return lp;
}

void check_inputs(const FrameLogProbs &logp, const Transcription &c) {
  if (logp.frames() < 1 || !logp.matrix().allFinite())
    throw InvalidInput("ctc_loss: frame log-probs empty or non-finite");
  const int required = min_frames(c);
  if (logp.frames() < required) {
    std::ostringstream os;
    os << "ctc_loss: " << logp.frames() << " frames cannot align a labeling "
       << "that needs " << required;
    throw InfeasibleAlignment(os.str(), logp.frames(), required);
  }
}

}  // namespace

double ctc_score(const FrameLogProbs &logp, const Transcription &c) {
  ExtendedLabelSequence e = expand_labels(c, logp.classes() - 1);
  check_inputs(logp, c);
  Matrix emit = gather_emissions(logp, e);
  return -total_log_prob(forward_pass(emit, e));
}

LossResult ctc_loss(const FrameLogProbs &logp, const Transcription &c) {
  ExtendedLabelSequence e = expand_labels(c, logp.classes() - 1);
  check_inputs(logp, c);
  const int T = logp.frames(), K = logp.classes(), S = e.size();

  Matrix emit = gather_emissions(logp, e);
  Matrix alpha = forward_pass(emit, e);
  Matrix beta = backward_pass(emit, e);
  const double log_p = total_log_prob(alpha);

  LossResult result;
  result.loss = -log_p;
  // d loss / d logp(t,k) = -sum_{s: ext[s]=k} alpha_t(s) beta_t(s) / (y_t(k) P),
  // i.e. minus the posterior occupancy of class k at frame t.
  result.grad = Matrix::Zero(T, K);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double occ = alpha(t, s) + beta(t, s);
      if (occ == kLogZero) continue;
      result.grad(t, e.ext[s]) -= std::exp(occ - emit(t, s) - log_p);
    }
  }
  return result;
}

Matrix logits_grad(const FrameLogProbs &logp, const Matrix &grad_logp) {
  if (grad_logp.rows() != logp.frames() || grad_logp.cols() != logp.classes())
    throw ShapeError("logits_grad: gradient shape does not match log-probs");
  Matrix out(grad_logp.rows(), grad_logp.cols());
  for (Eigen::Index t = 0; t < grad_logp.rows(); ++t) {
    double total = grad_logp.row(t).sum();
    out.row(t) = grad_logp.row(t).array() -
                 logp.matrix().row(t).array().exp() * total;
  }
  return out;
}

}  // namespace mhctc
