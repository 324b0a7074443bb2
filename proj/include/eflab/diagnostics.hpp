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

#include "eflab/curvature.hpp"

#include <cstdint>

namespace eflab {

struct DirectionComparison {
  double cosine = 0;
  double ef_step_norm = 0;
  double ngd_step_norm = 0;
  ParamVector at_theta;
  double damping_used = 0;
  bool fallback_used = false;  // singular at the requested damping, retried at 1e-10
};

inline constexpr double kFallbackDamping = 1e-10;

/// Cosine between (F~ + l I)^{-1} grad L and (F + l I)^{-1} grad L.
/// Throws NumericalError for a zero gradient or a zero direction.
DirectionComparison direction_comparison(const ModelSpec& model, const Dataset& data,
                                         const ParamVector& theta, double damping);

struct QuadraticFitReport {
  Eigen::MatrixXd directions;       // K x D unit rows
  Eigen::VectorXd true_loss_delta;  // L(theta* + d) - L(theta*)
  Eigen::VectorXd model_values;     // d^T M d / 2 for the supplied M
  Eigen::VectorXd fisher_model;
  Eigen::VectorXd ef_model;
  double max_ratio_error = 0;  // max_k |ef - fisher| / fisher
  double max_model_error = 0;  // max_k |model - true delta|
};

/// Compares L(theta* + d) - L(theta*) with d^T M d / 2 on unit directions d
/// drawn uniformly from the sphere. Throws ConvergenceError if
/// ||grad L(theta*)||_inf exceeds `gradient_tol`.
QuadraticFitReport quadratic_fit(const ModelSpec& model, const Dataset& data,
                                 const ParamVector& theta_star, const CurvatureMatrix& M,
                                 Index num_directions, std::uint64_t seed,
                                 double gradient_tol = 1e-6);

struct MinimizerOptions {
  Index max_iterations = 200;
  double gradient_tol = 1e-8;
};

/// Certified minimizer of a convex GLM loss: normal equations for
/// LinearGaussian, damped Newton with backtracking otherwise. The result has
/// ||grad L||_inf <= gradient_tol; throws ConvergenceError otherwise
/// (e.g. separable classification data, where no finite minimizer exists).
ParamVector minimize_reference(const ModelSpec& model, const Dataset& data,
                               const ParamVector& theta0, const MinimizerOptions& options = {});

/// ||F - F~||_F / ||F||_F at a certified minimizer.
double misspecification_gap(const ModelSpec& model, const Dataset& data,
                            const ParamVector& theta_star, double gradient_tol = 1e-6);

double classification_accuracy(const ModelSpec& model, const Dataset& data,
                               const ParamVector& theta);

}  // namespace eflab
