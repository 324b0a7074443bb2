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

#include "eflab/optim.hpp"

#include "eflab/curvature.hpp"
#include "eflab/diagnostics.hpp"
#include "eflab/error.hpp"
#include "eflab/linalg.hpp"

#include <cmath>
#include <limits>

namespace eflab {

std::string to_string(Method method) {
  switch (method) {
    case Method::GD:
      return "gd";
    case Method::NGD:
      return "ngd";
    case Method::EFGD:
      return "efgd";
    case Method::MCNGD:
      return "mcngd";
    case Method::VarAdapted:
      return "varadapted";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "gd") return Method::GD;
  if (name == "ngd") return Method::NGD;
  if (name == "efgd") return Method::EFGD;
  if (name == "mcngd") return Method::MCNGD;
  if (name == "varadapted") return Method::VarAdapted;
  throw ConfigError("unknown method '" + name + "' (expected gd, ngd, efgd, mcngd, varadapted)");
}

void OptimizerConfig::validate() const {
  if (!(step_size > 0) || !std::isfinite(step_size)) throw ConfigError("step size must be > 0");
  if (!(damping >= 0) || !std::isfinite(damping)) throw ConfigError("damping must be >= 0");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (mc_samples < 1) throw ConfigError("mc_samples must be >= 1");
}

namespace {

Eigen::VectorXd direction_from_gradient(Method method, const ModelSpec& model,
                                        const Dataset& data, const ParamVector& theta,
                                        const Eigen::VectorXd& grad, double damping,
                                        std::uint64_t seed, Index mc_samples) {
  switch (method) {
    case Method::GD:
      return grad;
    case Method::NGD:
      return linalg::solve_damped(fisher(model, data, theta).values, damping, grad);
    case Method::EFGD:
      return linalg::solve_damped(empirical_fisher(model, data, theta).values, damping, grad);
    case Method::MCNGD:
      return linalg::solve_damped(mc_fisher(model, data, theta, mc_samples, seed).values,
                                  damping, grad);
    case Method::VarAdapted:
      return variance_adaptation(model, data, theta, damping).full_matrix * grad;
  }
  return grad;
}

double safe_loss(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  if (!theta.allFinite()) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::VectorXd l = sample_losses(model, data, theta);
  return l.mean();
}

}  // namespace

Eigen::VectorXd update_direction(Method method, const ModelSpec& model, const Dataset& data,
                                 const ParamVector& theta, double damping, std::uint64_t seed,
                                 Index mc_samples) {
  const Eigen::VectorXd grad = gradient(model, data, theta);
  return direction_from_gradient(method, model, data, theta, grad, damping, seed, mc_samples);
}

ParamVector step(Method method, const ModelSpec& model, const Dataset& data,
                 const ParamVector& theta, double step_size, double damping, std::uint64_t seed,
                 Index mc_samples) {
  const ParamVector next =
      theta - step_size * update_direction(method, model, data, theta, damping, seed, mc_samples);
  if (!next.allFinite()) throw NumericalError("update produced non-finite parameters");
  return next;
}

std::uint64_t step_seed(std::uint64_t seed, Index t) {
  // splitmix64 finalizer over (seed, t)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(t) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Trajectory run(const OptimizerConfig& config, const ModelSpec& model, const Dataset& data,
               const ParamVector& theta0) {
  config.validate();
  Trajectory traj;
  traj.thetas.reserve(static_cast<std::size_t>(config.iterations) + 1);
  traj.losses.reserve(static_cast<std::size_t>(config.iterations) + 1);
  traj.thetas.push_back(theta0);
  traj.losses.push_back(loss(model, data, theta0));
  const double limit = traj.losses.front() > 0 ? 1e6 * traj.losses.front()
                                               : std::numeric_limits<double>::infinity();

  ParamVector theta = theta0;
  for (Index t = 0; t < config.iterations; ++t) {
    Eigen::VectorXd grad;
    try {
      grad = gradient(model, data, theta);
    } catch (const NumericalError& e) {
      traj.diverged = true;
      traj.divergence_reason = e.what();
      break;
    }
    StepDiagnostics diag;
    diag.gradient_norm = grad.norm();
    if (config.record_cosine && diag.gradient_norm > 0) {
      try {
        diag.cosine_to_ngd = direction_comparison(model, data, theta, 0.0).cosine;
      } catch (const SingularMatrixError&) {
      }
    }
    const Eigen::VectorXd dir =
        direction_from_gradient(config.method, model, data, theta, grad, config.damping,
                                step_seed(config.seed, t), config.mc_samples);
    theta = theta - config.step_size * dir;
    diag.update_norm = config.step_size * dir.norm();
    traj.steps.push_back(diag);

    const double l = safe_loss(model, data, theta);
    traj.thetas.push_back(theta);
    traj.losses.push_back(l);
    if (!std::isfinite(l)) {
      traj.diverged = true;
      traj.divergence_reason = "non-finite loss at iteration " + std::to_string(t + 1);
      break;
    }
    if (l > limit) {
      traj.diverged = true;
      traj.divergence_reason = "loss exceeded 1e6 x initial loss at iteration " +
                               std::to_string(t + 1);
      break;
    }
  }
  return traj;
}

}  // namespace eflab
