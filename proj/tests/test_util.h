// tests/test_util.h


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

#ifndef MHCTC_TESTS_TEST_UTIL_H_
#define MHCTC_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mhctc/ctc.h"
#include "mhctc/matrix.h"
#include "mhctc/model.h"

namespace mhctc::testing {

inline Matrix random_logits(int frames, int classes, std::mt19937_64 &rng, double scale = 2.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(frames, classes);
  for (int t = 0; t < frames; ++t)
    for (int k = 0; k < classes; ++k) m(t, k) = g(rng);
  return m;
}

inline FrameLogProbs random_logp(int frames, int classes, std::mt19937_64 &rng,
                                 double scale = 2.0) {
  return FrameLogProbs::from_logits(random_logits(frames, classes, rng, scale));
}

inline Transcription random_transcription(int length, int num_symbols, std::mt19937_64 &rng) {
  std::uniform_int_distribution<int> d(1, num_symbols);
  Transcription c;
  for (int i = 0; i < length; ++i) c.labels.push_back(d(rng));
  return c;
}

/// Random labeling that fits in `frames` frames.
inline Transcription random_feasible(int frames, int max_len, int num_symbols,
                                     std::mt19937_64 &rng) {
  while (true) {
    int len = std::uniform_int_distribution<int>(0, max_len)(rng);
    Transcription c = random_transcription(len, num_symbols, rng);
    if (min_frames(c) <= frames) return c;
  }
}

inline FrameLogProbs uniform_logp(int frames, int classes) {
  return FrameLogProbs(Matrix::Constant(frames, classes, -std::log(static_cast<double>(classes))));
}

inline FrameLogProbs from_probs(const std::vector<std::vector<double>> &rows) {
  Matrix m(rows.size(), rows[0].size());
  for (size_t t = 0; t < rows.size(); ++t)
    for (size_t k = 0; k < rows[t].size(); ++k) m(t, k) = std::log(rows[t][k]);
  return FrameLogProbs(m);
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const Eigen::Ref<const Eigen::VectorXd> &a,
                             const Eigen::Ref<const Eigen::VectorXd> &b) {
  const double denom = std::max(a.norm(), b.norm());
  return denom == 0.0 ? 0.0 : (a - b).norm() / denom;
}

/// Central differences of f over every coordinate of x.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd &)> &f,
                                        Eigen::VectorXd x, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double up = f(x);
    x[i] = orig - step;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

inline Eigen::VectorXd flatten(const Matrix &m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

inline Matrix unflatten(const Eigen::VectorXd &v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

/// Most probable labeling by brute force: every path is enumerated and its
/// probability credited to its collapse. Ties go to the lexicographically
/// smaller labeling.
struct LabelingOracle {
  std::vector<int> labeling;
  double log_prob = 0.0;
};

inline LabelingOracle most_probable_labeling(const FrameLogProbs &logp) {
  const int T = logp.frames(), K = logp.classes();
  std::map<std::vector<int>, double> mass;
  std::vector<int> path(T, 0);
  std::int64_t total = 1;
  for (int t = 0; t < T; ++t) total *= K;
  for (std::int64_t n = 0; n < total; ++n) {
    std::int64_t code = n;
    double lp = 0.0;
    for (int t = 0; t < T; ++t) {
      path[t] = static_cast<int>(code % K);
      code /= K;
      lp += logp(t, path[t]);
    }
    std::vector<int> label;
    int prev = -1;
    for (int k : path) {
      if (k != prev && k != kBlank) label.push_back(k);
      prev = k;
    }
    mass[label] += std::exp(lp);
  }
  LabelingOracle best{{}, -1.0};
  for (const auto &[label, p] : mass)
    if (p > best.log_prob) best = {label, p};  // map order makes ties lexicographic
  best.log_prob = std::log(best.log_prob);
  return best;
}

/// Plain recursive Levenshtein distance with memoization.
inline int recursive_edit_distance(const std::vector<std::string> &a,
                                   const std::vector<std::string> &b) {
  std::map<std::pair<size_t, size_t>, int> memo;
  std::function<int(size_t, size_t)> go = [&](size_t i, size_t j) -> int {
    if (i == a.size()) return static_cast<int>(b.size() - j);
    if (j == b.size()) return static_cast<int>(a.size() - i);
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    int best = go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, go(i + 1, j) + 1);
    best = std::min(best, go(i, j + 1) + 1);
    return memo[key] = best;
  };
  return go(0, 0);
}

inline std::vector<std::string> random_tokens(int max_len, int vocab, std::mt19937_64 &rng) {
  int len = std::uniform_int_distribution<int>(0, max_len)(rng);
  std::uniform_int_distribution<int> d(0, vocab - 1);
  std::vector<std::string> out;
  for (int i = 0; i < len; ++i) out.push_back(std::string(1, static_cast<char>('a' + d(rng))));
  return out;
}

/// Trainable tensors flattened in the order w1, b1, w2, b2.
inline Eigen::VectorXd pack(const ModelParams &p) {
  Eigen::VectorXd v(p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size());
  v << flatten(p.w1), p.b1, flatten(p.w2), p.b2;
  return v;
}

inline Eigen::VectorXd pack(const ParamGrad &g) {
  Eigen::VectorXd v(g.w1.size() + g.b1.size() + g.w2.size() + g.b2.size());
  v << flatten(g.w1), g.b1, flatten(g.w2), g.b2;
  return v;
}

inline ModelParams unpack(ModelParams p, const Eigen::VectorXd &v) {
  Eigen::Index at = 0;
  p.w1 = unflatten(v.segment(at, p.w1.size()), p.w1.rows(), p.w1.cols());
  at += p.w1.size();
  p.b1 = v.segment(at, p.b1.size());
  at += p.b1.size();
  p.w2 = unflatten(v.segment(at, p.w2.size()), p.w2.rows(), p.w2.cols());
  at += p.w2.size();
  p.b2 = v.segment(at, p.b2.size());
  return p;
}

}  // namespace mhctc::testing

#endif  // MHCTC_TESTS_TEST_UTIL_H_
