// tests/test_ctc.cc


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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "mhctc/ctc.h"
#include "mhctc/errors.h"
#include "mhctc/oracle.h"
#include "test_util.h"

using namespace mhctc;
using namespace mhctc::testing;

TEST_CASE("expand_labels interleaves blanks") {
  CHECK(expand_labels(Transcription{{1}}, 3).ext == std::vector<int>{0, 1, 0});
  CHECK(expand_labels(Transcription{}, 3).ext == std::vector<int>{0});
  CHECK(expand_labels(Transcription{{1, 1}}, 3).ext == std::vector<int>{0, 1, 0, 1, 0});
  CHECK_THROWS_AS(expand_labels(Transcription{{4}}, 3), InvalidLabel);
  CHECK_THROWS_AS(expand_labels(Transcription{{0}}, 3), InvalidLabel);
}

TEST_CASE("min_frames counts repeats") {
  CHECK(min_frames(Transcription{{1, 2, 3}}) == 3);
  CHECK(min_frames(Transcription{{1, 1}}) == 3);
  CHECK(min_frames(Transcription{}) == 0);
  CHECK(min_frames(Transcription{{2, 2, 2, 1}}) == 6);
}

TEST_CASE("alphabet encodes and rejects duplicates") {
  LabelAlphabet a("abc");
  CHECK(a.output_dim() == 4);
  CHECK(encode(a, "cab").labels == std::vector<int>{3, 1, 2});
  CHECK(decode(a, Transcription{{2, 2}}) == "bb");
  CHECK_THROWS_AS(LabelAlphabet("aba"), InvalidInput);
  CHECK_THROWS_AS(encode(a, "x"), InvalidLabel);
}

TEST_CASE("ctc_loss hand-enumerable cases") {
  SUBCASE("single frame, single path") {
    auto logp = from_probs({{0.4, 0.6}});
    auto r = ctc_loss(logp, Transcription{{1}});
    CHECK(r.loss == doctest::Approx(-std::log(0.6)).epsilon(1e-14));
    CHECK(r.grad.rows() == 1);
    CHECK(r.grad.cols() == 2);
  }
  SUBCASE("two uniform frames") {
    auto r = ctc_loss(uniform_logp(2, 2), Transcription{{1}});
    CHECK(r.loss == doctest::Approx(-std::log(0.75)).epsilon(1e-14));
  }
  SUBCASE("empty labeling on one frame") {
    auto logp = from_probs({{0.3, 0.7}});
    CHECK(ctc_loss(logp, Transcription{}).loss == doctest::Approx(-std::log(0.3)).epsilon(1e-14));
    CHECK(ctc_loss_bruteforce(logp, Transcription{}) ==
          doctest::Approx(-std::log(0.3)).epsilon(1e-14));
  }
}

TEST_CASE("ctc_loss matches path enumeration, T=6 |U|=3 L=3") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto logp = random_logp(6, 4, rng);
    Transcription c = random_transcription(3, 3, rng);
    if (min_frames(c) > 6) continue;
    const double dp = ctc_loss(logp, c).loss;
    const double brute = ctc_loss_bruteforce(logp, c);
    CHECK(std::abs(dp - brute) / std::max(1.0, std::abs(brute)) <= 1e-10);
  }
}

TEST_CASE("ctc_loss errors") {
  CHECK_THROWS_AS(ctc_loss(uniform_logp(2, 3), Transcription{{1, 1}}), InfeasibleAlignment);
  try {
    ctc_loss(uniform_logp(2, 3), Transcription{{1, 2, 1}});
    FAIL("expected InfeasibleAlignment");
  } catch (const InfeasibleAlignment &e) {
    CHECK(e.frames() == 2);
    CHECK(e.required() == 3);
  }
  Matrix bad = Matrix::Constant(2, 3, -1.0);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(FrameLogProbs{bad}, InvalidInput);
  CHECK_THROWS_AS(ctc_loss(uniform_logp(3, 3), Transcription{{3}}), InvalidLabel);
}

TEST_CASE("bruteforce oracle sentinels and guard") {
  auto logp = uniform_logp(2, 3);
  CHECK(std::isinf(ctc_loss_bruteforce(logp, Transcription{{1, 1}})));
  CHECK(ctc_loss_bruteforce(logp, Transcription{{1, 1}}) > 0);
  CHECK_THROWS_AS(ctc_loss_bruteforce(uniform_logp(12, 6), Transcription{{1}}), OracleTooLarge);
}

TEST_CASE("property: oracle equivalence on random small instances") {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int T = std::uniform_int_distribution<int>(1, 7)(rng);
    const int U = std::uniform_int_distribution<int>(1, 3)(rng);
    auto logp = random_logp(T, U + 1, rng);
    Transcription c = random_feasible(T, 3, U, rng);
    const double dp = ctc_loss(logp, c).loss;
    const double brute = ctc_loss_bruteforce(logp, c);
    worst = std::max(worst, std::abs(dp - brute) / std::max(1.0, std::abs(brute)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("property: logits gradient matches central differences") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = std::uniform_int_distribution<int>(2, 8)(rng);
    const int U = std::uniform_int_distribution<int>(1, 4)(rng);
    Matrix z = random_logits(T, U + 1, rng);
    Transcription c = random_feasible(T, 4, U, rng);
    auto logp = FrameLogProbs::from_logits(z);
    Matrix analytic = logits_grad(logp, ctc_loss(logp, c).grad);
    auto f = [&](const Eigen::VectorXd &v) {
      return ctc_score(FrameLogProbs::from_logits(unflatten(v, T, U + 1)), c);
    };
    Eigen::VectorXd numeric = numeric_gradient(f, flatten(z), 1e-5);
    CHECK(relative_error(flatten(analytic), numeric) <= 1e-6);
  }
}

TEST_CASE("gradient rows are minus the class occupancy") {
  std::mt19937_64 rng(5);
  auto logp = random_logp(6, 4, rng);
  auto r = ctc_loss(logp, Transcription{{1, 3}});
  for (int t = 0; t < 6; ++t) {
    CHECK(r.grad.row(t).sum() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.grad.row(t).maxCoeff() <= 0.0);
  }
}

TEST_CASE("property: a certain-blank frame leaves the loss unchanged") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const int T = std::uniform_int_distribution<int>(1, 8)(rng);
    const int U = std::uniform_int_distribution<int>(1, 3)(rng);
    auto logp = random_logp(T, U + 1, rng);
    Transcription c = random_feasible(T, 3, U, rng);
    Matrix extended(T + 1, U + 1);
    extended.topRows(T) = logp.matrix();
    extended.row(T).setConstant(std::log(kMinProb));
    extended(T, kBlank) = 0.0;
    const double before = ctc_loss(logp, c).loss;
    const double after = ctc_loss(FrameLogProbs(extended), c).loss;
    CHECK(std::abs(after - before) <= 1e-9);
  }
}

TEST_CASE("property: symbol permutation equivariance") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int T = std::uniform_int_distribution<int>(1, 8)(rng);
    const int U = std::uniform_int_distribution<int>(2, 4)(rng);
    auto logp = random_logp(T, U + 1, rng);
    Transcription c = random_feasible(T, 4, U, rng);
    std::vector<int> perm(U + 1);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin() + 1, perm.end(), rng);  // blank stays at 0
    Matrix permuted(T, U + 1);
    for (int k = 0; k <= U; ++k) permuted.col(perm[k]) = logp.matrix().col(k);
    Transcription pc = c;
    for (int &l : pc.labels) l = perm[l];
    CHECK(std::abs(ctc_loss(FrameLogProbs(permuted), pc).loss - ctc_loss(logp, c).loss) <= 1e-12);
  }
}

TEST_CASE("property: loss is nonnegative and zero only for a certain labeling") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const int T = std::uniform_int_distribution<int>(1, 8)(rng);
    auto logp = random_logp(T, 4, rng);
    CHECK(ctc_loss(logp, random_feasible(T, 3, 3, rng)).loss >= 0.0);
  }
  // Every path collapses to [1] when the first frame is certainly 1 and the
  // rest are certainly blank.
  Matrix m = Matrix::Constant(3, 3, std::log(kMinProb));
  m(0, 1) = 0.0;
  m(1, 0) = 0.0;
  m(2, 0) = 0.0;
  CHECK(ctc_loss(FrameLogProbs(m), Transcription{{1}}).loss == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("concurrent calls give identical results") {
  std::mt19937_64 rng(23);
  auto logp = random_logp(40, 6, rng);
  Transcription c = random_transcription(10, 5, rng);
  const LossResult ref = ctc_loss(logp, c);
  std::vector<LossResult> results(4);
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i)
    threads.emplace_back([&, i] { results[i] = ctc_loss(logp, c); });
  for (auto &t : threads) t.join();
  for (const auto &r : results) {
    CHECK(r.loss == ref.loss);
    CHECK(r.grad == ref.grad);
  }
}
