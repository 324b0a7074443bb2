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

#include "eflab/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eflab {

enum class Method { GD, NGD, EFGD, MCNGD, VarAdapted };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct OptimizerConfig {
  Method method = Method::GD;
  double step_size = 1e-3;
  double damping = 0;  // ignored by GD
  Index iterations = 1;
  std::uint64_t seed = 0;  // MCNGD only
  Index mc_samples = 1;    // MCNGD only
  bool record_cosine = false;

  void validate() const;  // throws ConfigError
};

struct StepDiagnostics {
  double update_norm = 0;
  double gradient_norm = 0;
  std::optional<double> cosine_to_ngd;  // undamped EF vs Fisher direction
};

struct Trajectory {
  std::vector<ParamVector> thetas;  // T + 1 records unless diverged
  std::vector<double> losses;
  std::vector<StepDiagnostics> steps;
  bool diverged = false;
  std::string divergence_reason;

  double final_loss() const { return losses.back(); }
};

/// The vector v with theta_{t+1} = theta_t - gamma * v:
///   GD         grad L
///   NGD        (F + lambda I)^{-1} grad L
///   EFGD       (F~ + lambda I)^{-1} grad L
///   MCNGD      (F_mc + lambda I)^{-1} grad L
///   VarAdapted M grad L, M the variance adaptation matrix
Eigen::VectorXd update_direction(Method method, const ModelSpec& model, const Dataset& data,
                                 const ParamVector& theta, double damping,
                                 std::uint64_t seed = 0, Index mc_samples = 1);

ParamVector step(Method method, const ModelSpec& model, const Dataset& data,
                 const ParamVector& theta, double step_size, double damping,
                 std::uint64_t seed = 0, Index mc_samples = 1);

/// Seed used by MCNGD at iteration t.
std::uint64_t step_seed(std::uint64_t seed, Index t);

/// Runs config.iterations steps. Stops early with `diverged` set when the loss
/// becomes non-finite or exceeds 1e6 times the initial loss.
Trajectory run(const OptimizerConfig& config, const ModelSpec& model, const Dataset& data,
               const ParamVector& theta0);

}  // namespace eflab
