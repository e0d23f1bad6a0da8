// src/oracle.cc


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

#include "mhctc/oracle.h"

#include <cmath>
#include <limits>

#include "mhctc/errors.h"

namespace mhctc {

namespace {

std::int64_t path_count(int frames, int classes) {
  std::int64_t n = 1;
  for (int t = 0; t < frames; ++t) {
    n *= classes;
    if (n > kMaxOraclePaths)
      throw OracleTooLarge("path enumeration over " + std::to_string(classes) +
                           "^" + std::to_string(frames) + " exceeds guard");
  }
  return n;
}

// Visits every path once, calling fn(path, probability).
template <typename Fn>
void enumerate_paths(const FrameLogProbs &logp, Fn &&fn) {
  const int T = logp.frames(), K = logp.classes();
  const std::int64_t total = path_count(T, K);
  const double floor = std::log(kMinProb);
  std::vector<int> path(T, 0);
  for (std::int64_t n = 0; n < total; ++n) {
    std::int64_t code = n;
    double log_prob = 0.0;
    for (int t = 0; t < T; ++t) {
      path[t] = static_cast<int>(code % K);
      code /= K;
      log_prob += std::max(logp(t, path[t]), floor);
    }
    fn(path, std::exp(log_prob));
  }
}

double neg_log(double p) {
  return p > 0.0 ? -std::log(p) : std::numeric_limits<double>::infinity();
}

}  // namespace

Transcription collapse_path(const std::vector<int> &path) {
  Transcription out;
  int prev = -1;
  for (int k : path) {
    if (k != prev && k != kBlank) out.labels.push_back(k);
    prev = k;
  }
  return out;
}

double ctc_loss_bruteforce(const FrameLogProbs &logp, const Transcription &c) {
  validate(c, logp.classes() - 1);
  double sum = 0.0;
  enumerate_paths(logp, [&](const std::vector<int> &path, double p) {
    if (collapse_path(path) == c) sum += p;
  });
  return neg_log(sum);
}

double product_form_check(const FrameLogProbs &logp, const Transcription &c1,
                          const Transcription &c2) {
  validate(c1, logp.classes() - 1);
  validate(c2, logp.classes() - 1);
  double sum1 = 0.0, sum2 = 0.0;
  enumerate_paths(logp, [&](const std::vector<int> &path, double p) {
    Transcription label = collapse_path(path);
    if (label == c1) sum1 += p;
    if (label == c2) sum2 += p;
  });
  if (sum1 == 0.0 || sum2 == 0.0) return std::numeric_limits<double>::infinity();
  return neg_log(sum1) + neg_log(sum2);
}

}  // namespace mhctc
