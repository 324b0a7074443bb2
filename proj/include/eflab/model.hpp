// Copyright 2026 The eflab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "eflab/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eflab {

enum class ModelKind { LinearGaussian, LinearLogistic, LinearSoftmax, ScalarSine };

/// A prediction function family paired with an exponential-family likelihood.
///
/// Linear models use the bias-augmented feature row x~ = [x, 1]. Softmax
/// parameters are laid out class-major: theta[c * P + j] with P = D_in + bias.
/// ScalarSine is f(x, theta) = sin(theta * x) with a unit-variance Gaussian
/// likelihood; it is the only model with a nonzero second derivative in theta.
struct ModelSpec {
  ModelKind kind = ModelKind::LinearGaussian;
  bool includes_bias = true;
  int num_classes = 0;  // softmax only

  static ModelSpec linear_gaussian(bool bias = true) { return {ModelKind::LinearGaussian, bias, 0}; }
  static ModelSpec logistic(bool bias = true) { return {ModelKind::LinearLogistic, bias, 0}; }
  static ModelSpec softmax(int classes, bool bias = true) {
    return {ModelKind::LinearSoftmax, bias, classes};
  }
  static ModelSpec scalar_sine() { return {ModelKind::ScalarSine, false, 0}; }

  Index output_dim() const { return kind == ModelKind::LinearSoftmax ? num_classes : 1; }
  // Columns of the per-sample feature block (P); param_dim = output_dim * P.
  Index feature_dim(Index input_dim) const;
  Index param_dim(Index input_dim) const { return output_dim() * feature_dim(input_dim); }
  bool is_linear() const { return kind != ModelKind::ScalarSine; }
  std::string name() const;

  /// Throws DimensionError/ConfigError if this model cannot be fit to `data`.
  void check(const Dataset& data) const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

ModelSpec parse_model(const std::string& name, bool bias = true, int num_classes = 0);

using ParamVector = Eigen::VectorXd;

struct PredOutput {
  Eigen::MatrixXd outputs;       // N x M, f(x_n, theta)
  Eigen::MatrixXd output_grads;  // N x M, grad_f (-log p(y_n | f_n))
};

/// Every model here has a Jacobian of the form I_M (x) phi_n^T, so curvature
/// reduces to weighted Gram matrices of phi. Returns the N x P matrix of phi_n
/// (x~ for linear models, x cos(theta x) for ScalarSine).
Eigen::MatrixXd effective_features(const ModelSpec& model, const Dataset& data,
                                   const ParamVector& theta);

Eigen::MatrixXd outputs(const ModelSpec& model, const Dataset& data, const ParamVector& theta);
PredOutput predict(const ModelSpec& model, const Dataset& data, const ParamVector& theta);

/// Averaged negative log-likelihood (1/N) sum_n -log p(y_n | f(x_n, theta)).
/// Additive constants of the Gaussian likelihood are dropped.
double loss(const ModelSpec& model, const Dataset& data, const ParamVector& theta);
Eigen::VectorXd sample_losses(const ModelSpec& model, const Dataset& data,
                              const ParamVector& theta);

Eigen::VectorXd gradient(const ModelSpec& model, const Dataset& data, const ParamVector& theta);

/// Row n is the un-averaged gradient of sample n's loss.
Eigen::MatrixXd per_sample_gradients(const ModelSpec& model, const Dataset& data,
                                     const ParamVector& theta);

/// D_theta f(x_n, theta) for every sample, each M x D.
std::vector<Eigen::MatrixXd> output_jacobian(const ModelSpec& model, const Dataset& data,
                                             const ParamVector& theta);

/// Draws y~_n ~ p(y | f(x_n, theta)) with one random stream per sample
/// (stream id = n), so the result is independent of thread count.
Dataset sample_model_outputs(const ModelSpec& model, const Dataset& data,
                             const ParamVector& theta, std::uint64_t seed);

}  // namespace eflab
