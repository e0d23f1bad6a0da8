// mhctc/model.h


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

#ifndef MHCTC_MODEL_H_
#define MHCTC_MODEL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mhctc/ctc.h"
#include "mhctc/mh_loss.h"

namespace mhctc {

struct ModelConfig {
  int input_dim = 36;    // feature dimension d
  int context = 4;       // frames on each side, w
  int hidden = 128;      // H
  int num_classes = 6;   // |U| + 1

  int window_dim() const { return input_dim * (2 * context + 1); }
  bool operator==(const ModelConfig &) const = default;
};

/// Context-window MLP: [x_{t-w} .. x_{t+w}] -> tanh(H) -> log-softmax(K).
/// Inputs are standardized with a fixed per-dimension shift and scale taken
/// from the training data; those are not trained.
struct ModelParams {
  ModelConfig config;
  std::uint64_t seed = 0;
  Vector input_mean;   // d
  Vector input_scale;  // d, multiplies (x - mean)
  Matrix w1;           // H x window_dim
  Vector b1;           // H
  Matrix w2;           // K x H
  Vector b2;           // K

  bool operator==(const ModelParams &other) const;
};

/// Gradient with the same layout as the trainable tensors.
struct ParamGrad {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;

  static ParamGrad zeros_like(const ModelParams &params);
  ParamGrad &operator+=(const ParamGrad &other);
  ParamGrad &operator*=(double scale);
  double squared_norm() const;
};

/// Xavier-uniform weights, zero biases, identity normalization.
ModelParams init_model(const ModelConfig &config, std::uint64_t seed);

/// Sets input_mean/input_scale from the pooled frames of `features`.
void fit_normalization(ModelParams &params, const std::vector<Matrix> &features);

FrameLogProbs forward(const ModelParams &params, const Matrix &features);

/// Reverse-mode gradient of a loss whose gradient w.r.t. the forward output
/// is `grad_logp`.
ParamGrad backward(const ModelParams &params, const Matrix &features,
                   const Matrix &grad_logp);

/// params -= learning_rate * grad
void apply_update(ModelParams &params, const ParamGrad &grad, double learning_rate);

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 10;
  int batch_size = 8;
  std::uint64_t seed = 1;
  std::optional<double> grad_clip = 5.0;
};

/// One training utterance. A manual transcription is an N=1 set.
struct TrainItem {
  std::string id;
  Matrix features;
  HypothesisSet supervision;
};

struct TrainResult {
  ModelParams params;
  /// Mean per-utterance loss of each epoch, accumulated while training.
  std::vector<double> loss_curve;
  std::vector<std::string> skipped;
};

/// Mini-batch SGD on the summed (multi-hypothesis) CTC loss. Utterances with
/// an infeasible hypothesis are skipped. Shuffling is seeded by cfg.seed.
/// Throws DivergedError on a non-finite loss.
TrainResult sgd_train(const ModelParams &params, const std::vector<TrainItem> &data,
                      const TrainConfig &cfg);

/// Loss and gradient of one utterance.
struct UtteranceLoss {
  double loss = 0.0;
  ParamGrad grad;
};
UtteranceLoss utterance_loss(const ModelParams &params, const TrainItem &item);

/// Mean per-utterance loss over the feasible items, without updates.
double mean_loss(const ModelParams &params, const std::vector<TrainItem> &data);

}  // namespace mhctc

#endif  // MHCTC_MODEL_H_
