// src/model.cc


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

#include "mhctc/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "mhctc/errors.h"

namespace mhctc {

bool ModelParams::operator==(const ModelParams &o) const {
  return config == o.config && seed == o.seed && input_mean == o.input_mean &&
         input_scale == o.input_scale && w1 == o.w1 && b1 == o.b1 &&
         w2 == o.w2 && b2 == o.b2;
}

ParamGrad ParamGrad::zeros_like(const ModelParams &p) {
  return ParamGrad{Matrix::Zero(p.w1.rows(), p.w1.cols()), Vector::Zero(p.b1.size()),
                   Matrix::Zero(p.w2.rows(), p.w2.cols()), Vector::Zero(p.b2.size())};
}

ParamGrad &ParamGrad::operator+=(const ParamGrad &o) {
  w1 += o.w1;
  b1 += o.b1;
  w2 += o.w2;
  b2 += o.b2;
  return *this;
}

ParamGrad &ParamGrad::operator*=(double scale) {
  w1 *= scale;
  b1 *= scale;
  w2 *= scale;
  b2 *= scale;
  return *this;
}

double ParamGrad::squared_norm() const {
  return w1.squaredNorm() + b1.squaredNorm() + w2.squaredNorm() + b2.squaredNorm();
}

ModelParams init_model(const ModelConfig &config, std::uint64_t seed) {
  if (config.input_dim < 1 || config.context < 0 || config.hidden < 1 ||
      config.num_classes < 2)
    throw ConfigError("invalid model configuration");
  ModelParams p;
  p.config = config;
  p.seed = seed;
  p.input_mean = Vector::Zero(config.input_dim);
  p.input_scale = Vector::Ones(config.input_dim);

  std::mt19937_64 rng(seed);
  auto xavier = [&rng](Eigen::Index fan_out, Eigen::Index fan_in) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix m(fan_out, fan_in);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
    return m;
  };
  p.w1 = xavier(config.hidden, config.window_dim());
  p.b1 = Vector::Zero(config.hidden);
  p.w2 = xavier(config.num_classes, config.hidden);
  p.b2 = Vector::Zero(config.num_classes);
  return p;
}

void fit_normalization(ModelParams &params, const std::vector<Matrix> &features) {
  const int d = params.config.input_dim;
  Vector sum = Vector::Zero(d), sum_sq = Vector::Zero(d);
  double count = 0.0;
  for (const Matrix &f : features) {
    if (f.cols() != d) throw ShapeError("fit_normalization: feature dimension mismatch");
    for (Eigen::Index t = 0; t < f.rows(); ++t) {
      sum += f.row(t).transpose();
      sum_sq += f.row(t).transpose().cwiseAbs2();
    }
    count += static_cast<double>(f.rows());
  }
  if (count == 0.0) return;
  params.input_mean = sum / count;
  Vector var = sum_sq / count - params.input_mean.cwiseAbs2();
  params.input_scale = var.unaryExpr([](double v) { return 1.0 / std::sqrt(std::max(v, 1e-8)); });
}

namespace {

void check_features(const ModelParams &params, const Matrix &x) {
  if (x.rows() < 1 || x.cols() != params.config.input_dim)
    throw ShapeError("model expects T >= 1 frames of dimension " +
                     std::to_string(params.config.input_dim) + ", got " +
                     std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
}

// Rows are standardized frames t-w .. t+w, edge frames replicated.
Matrix context_window(const ModelParams &params, const Matrix &x) {
  const int T = static_cast<int>(x.rows()), d = params.config.input_dim;
  const int w = params.config.context;
  Matrix normed(T, d);
  for (int t = 0; t < T; ++t)
    normed.row(t) = (x.row(t).transpose() - params.input_mean)
                        .cwiseProduct(params.input_scale)
                        .transpose();
  Matrix window(T, params.config.window_dim());
  for (int t = 0; t < T; ++t)
    for (int j = -w; j <= w; ++j) {
      int src = std::clamp(t + j, 0, T - 1);
      window.block(t, (j + w) * d, 1, d) = normed.row(src);
    }
  return window;
}

struct Activations {
  Matrix window;  // T x window_dim
  Matrix hidden;  // T x H, post-tanh
  Matrix logits;  // T x K
};

Activations run_layers(const ModelParams &p, const Matrix &x) {
  Activations a;
  a.window = context_window(p, x);
  a.hidden = (a.window * p.w1.transpose()).rowwise() + p.b1.transpose();
  a.hidden = a.hidden.array().tanh();
  a.logits = (a.hidden * p.w2.transpose()).rowwise() + p.b2.transpose();
  return a;
}

}  // namespace

FrameLogProbs forward(const ModelParams &params, const Matrix &features) {
  check_features(params, features);
  return FrameLogProbs::from_logits(run_layers(params, features).logits);
}

ParamGrad backward(const ModelParams &params, const Matrix &features,
                   const Matrix &grad_logp) {
  check_features(params, features);
  if (grad_logp.rows() != features.rows() ||
      grad_logp.cols() != params.config.num_classes)
    throw ShapeError("backward: gradient shape does not match forward output");
  Activations a = run_layers(params, features);
  FrameLogProbs logp = FrameLogProbs::from_logits(a.logits);
  Matrix d_logits = logits_grad(logp, grad_logp);

  ParamGrad g;
  g.w2 = d_logits.transpose() * a.hidden;
  g.b2 = d_logits.colwise().sum().transpose();
  Matrix d_hidden = d_logits * params.w2;
  Matrix d_pre = d_hidden.array() * (1.0 - a.hidden.array().square());
  g.w1 = d_pre.transpose() * a.window;
  g.b1 = d_pre.colwise().sum().transpose();
  return g;
}

void apply_update(ModelParams &params, const ParamGrad &grad, double learning_rate) {
  params.w1 -= learning_rate * grad.w1;
  params.b1 -= learning_rate * grad.b1;
  params.w2 -= learning_rate * grad.w2;
  params.b2 -= learning_rate * grad.b2;
}

UtteranceLoss utterance_loss(const ModelParams &params, const TrainItem &item) {
  FrameLogProbs logp = forward(params, item.features);
  CombinedLossResult r = mh_ctc_loss(logp, item.supervision);
  return UtteranceLoss{r.loss, backward(params, item.features, r.grad)};
}

namespace {

bool feasible(const TrainItem &item) {
  for (const auto &c : item.supervision.hypotheses)
    if (min_frames(c) > item.features.rows()) return false;
  return true;
}

}  // namespace

double mean_loss(const ModelParams &params, const std::vector<TrainItem> &data) {
  double total = 0.0;
  int n = 0;
  for (const auto &item : data) {
    if (!feasible(item)) continue;
    total += mh_ctc_loss(forward(params, item.features), item.supervision).loss;
    ++n;
  }
  return n > 0 ? total / n : 0.0;
}

TrainResult sgd_train(const ModelParams &params, const std::vector<TrainItem> &data,
                      const TrainConfig &cfg) {
  if (cfg.learning_rate <= 0.0 || cfg.epochs < 0 || cfg.batch_size < 1 ||
      (cfg.grad_clip && *cfg.grad_clip <= 0.0))
    throw ConfigError("invalid training configuration");

  TrainResult result{params, {}, {}};
  std::vector<size_t> order;
  for (size_t i = 0; i < data.size(); ++i) {
    if (feasible(data[i])) {
      order.push_back(i);
    } else {
      result.skipped.push_back(data[i].id);
      spdlog::warn("sgd_train: skipping '{}' ({} frames, infeasible labeling)",
                   data[i].id, data[i].features.rows());
    }
  }
  if (order.empty() || cfg.epochs == 0) return result;

  std::mt19937_64 rng(cfg.seed);
  ModelParams &p = result.params;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t stop = std::min(order.size(), start + cfg.batch_size);
      ParamGrad batch = ParamGrad::zeros_like(p);
      for (size_t i = start; i < stop; ++i) {
        UtteranceLoss u;
        try {
          u = utterance_loss(p, data[order[i]]);
        } catch (const InvalidInput &e) {
          throw DivergedError("epoch " + std::to_string(epoch) + ": " + e.what(), epoch);
        }
        if (!std::isfinite(u.loss))
          throw DivergedError("non-finite loss on '" + data[order[i]].id +
                                  "' in epoch " + std::to_string(epoch),
                              epoch);
        epoch_loss += u.loss;
        batch += u.grad;
      }
      if (cfg.grad_clip) {
        const double norm = std::sqrt(batch.squared_norm());
        if (norm > *cfg.grad_clip) batch *= *cfg.grad_clip / norm;
      }
      apply_update(p, batch, cfg.learning_rate);
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(order.size()));
    spdlog::debug("epoch {} mean loss {:.4f}", epoch, result.loss_curve.back());
  }
  if (!(p.w1.allFinite() && p.w2.allFinite() && p.b1.allFinite() && p.b2.allFinite()))
    throw DivergedError("parameters became non-finite", cfg.epochs - 1);
  return result;
}

}  // namespace mhctc
