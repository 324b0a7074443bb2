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

// Output-space pieces of the three likelihoods: everything here takes the
// model output f (length M) and, where needed, a target y.

#include "eflab/model.hpp"

#include <cstdint>
#include <random>

namespace eflab::likelihood {

using OutputRef = Eigen::Ref<const Eigen::VectorXd>;

double sigmoid(double z);
double softplus(double z);
double log_sum_exp(const OutputRef& f);
Eigen::VectorXd softmax(const OutputRef& f);

/// -log p(y | f) without additive constants.
double nll(const ModelSpec& model, const OutputRef& f, double target);

/// grad_f(-log p(y | f)): f - y, sigmoid(f) - y, or pi - e_y.
Eigen::VectorXd residual(const ModelSpec& model, const OutputRef& f, double target);

/// grad^2_f(-log p(y | f)), which does not depend on y for these families:
/// 1, sigmoid(f)(1 - sigmoid(f)), or diag(pi) - pi pi^T.
Eigen::MatrixXd output_hessian(const ModelSpec& model, const OutputRef& f);

/// E_{y ~ p(.|f)}[r(y) r(y)^T] with r = residual, evaluated exactly: a sum
/// over classes for classification, the unit noise variance for regression.
Eigen::MatrixXd expected_residual_outer(const ModelSpec& model, const OutputRef& f);

/// A draw from p(y | f), or the mode when `argmax` is set.
double draw(const ModelSpec& model, const OutputRef& f, std::mt19937_64& rng);
double mode(const ModelSpec& model, const OutputRef& f);

/// Independent engine for (seed, stream); stream ids are sample indices.
std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream);

}  // namespace eflab::likelihood
