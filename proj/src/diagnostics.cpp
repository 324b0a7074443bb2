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

#include "eflab/diagnostics.hpp"

#include "eflab/error.hpp"
#include "eflab/likelihood.hpp"
#include "eflab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace eflab {

DirectionComparison direction_comparison(const ModelSpec& model, const Dataset& data,
                                         const ParamVector& theta, double damping) {
  if (!(damping >= 0)) throw ConfigError("damping must be non-negative");
  const Eigen::VectorXd grad = gradient(model, data, theta);
  if (grad.isZero(0.0)) throw NumericalError("direction comparison needs a nonzero gradient");
  const Eigen::MatrixXd ef = empirical_fisher(model, data, theta).values;
  const Eigen::MatrixXd fi = fisher(model, data, theta).values;

  DirectionComparison out;
  out.at_theta = theta;
  out.damping_used = damping;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  try {
    u = linalg::solve_damped(ef, damping, grad);
    v = linalg::solve_damped(fi, damping, grad);
  } catch (const SingularMatrixError&) {
    if (damping > 0) throw;
    out.fallback_used = true;
    out.damping_used = kFallbackDamping;
    u = linalg::solve_damped(ef, kFallbackDamping, grad);
    v = linalg::solve_damped(fi, kFallbackDamping, grad);
  }
  out.ef_step_norm = u.norm();
  out.ngd_step_norm = v.norm();
  if (out.ef_step_norm == 0 || out.ngd_step_norm == 0)
    throw NumericalError("a preconditioned direction is exactly zero");
  out.cosine = std::clamp(u.dot(v) / (out.ef_step_norm * out.ngd_step_norm), -1.0, 1.0);
  return out;
}

namespace {

void require_minimizer(const ModelSpec& model, const Dataset& data, const ParamVector& theta,
                       double gradient_tol) {
  const double g = gradient(model, data, theta).lpNorm<Eigen::Infinity>();
  if (!(g <= gradient_tol))
    throw ConvergenceError("theta is not a certified minimizer: ||grad||_inf = " +
                           std::to_string(g));
}

double half_quadratic(const Eigen::MatrixXd& m, const Eigen::VectorXd& d) {
  return 0.5 * d.dot(m * d);
}

}  // namespace

QuadraticFitReport quadratic_fit(const ModelSpec& model, const Dataset& data,
                                 const ParamVector& theta_star, const CurvatureMatrix& M,
                                 Index num_directions, std::uint64_t seed, double gradient_tol) {
  if (num_directions < 1) throw ConfigError("need at least one direction");
  const Index d = theta_star.size();
  if (M.dim() != d) throw DimensionError("curvature matrix does not match parameter dimension");
  require_minimizer(model, data, theta_star, gradient_tol);

  const Eigen::MatrixXd fi = fisher(model, data, theta_star).values;
  const Eigen::MatrixXd ef = empirical_fisher(model, data, theta_star).values;
  const double base = loss(model, data, theta_star);

  QuadraticFitReport r;
  r.directions.resize(num_directions, d);
  r.true_loss_delta.resize(num_directions);
  r.model_values.resize(num_directions);
  r.fisher_model.resize(num_directions);
  r.ef_model.resize(num_directions);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (Index k = 0; k < num_directions; ++k) {
    Eigen::VectorXd dir(d);
    do {
      for (Index i = 0; i < d; ++i) dir[i] = normal(rng);
    } while (dir.norm() == 0);
    dir.normalize();
    r.directions.row(k) = dir.transpose();
    r.true_loss_delta[k] = loss(model, data, theta_star + dir) - base;
    r.model_values[k] = half_quadratic(M.values, dir);
    r.fisher_model[k] = half_quadratic(fi, dir);
    r.ef_model[k] = half_quadratic(ef, dir);
    if (r.fisher_model[k] > 0)
      r.max_ratio_error = std::max(
          r.max_ratio_error, std::abs(r.ef_model[k] - r.fisher_model[k]) / r.fisher_model[k]);
    r.max_model_error =
        std::max(r.max_model_error, std::abs(r.model_values[k] - r.true_loss_delta[k]));
  }
  return r;
}

namespace {

// A classifier that separates every sample with a positive margin keeps
// lowering the loss as theta is scaled up, so no finite minimizer exists.
const ParamVector& certified(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  if (!data.task.is_classification()) return theta;
  const Eigen::MatrixXd f = outputs(model, data, theta);
  for (Index n = 0; n < data.size(); ++n) {
    if (model.kind == ModelKind::LinearLogistic) {
      if ((data.target(n) == 1.0 ? f(n, 0) : -f(n, 0)) <= 0) return theta;
      continue;
    }
    const auto label = static_cast<Index>(data.target(n));
    for (Index c = 0; c < f.cols(); ++c)
      if (c != label && f(n, c) >= f(n, label)) return theta;
  }
  throw ConvergenceError("classes are linearly separable; the loss has no finite minimizer");
}

}  // namespace

ParamVector minimize_reference(const ModelSpec& model, const Dataset& data,
                               const ParamVector& theta0, const MinimizerOptions& options) {
  ParamVector theta = theta0;
  double current = loss(model, data, theta);
  for (Index it = 0; it < options.max_iterations; ++it) {
    const Eigen::VectorXd g = gradient(model, data, theta);
    const Eigen::MatrixXd h = hessian(model, data, theta).values;
    Eigen::VectorXd s;
    try {
      s = linalg::solve_damped(h, 0.0, g);
    } catch (const SingularMatrixError&) {
      // Over-parameterized softmax or a flat direction: g is orthogonal to it.
      const double mu = 1e-10 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
      s = linalg::solve_damped(h, mu, g);
    }
    if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tol &&
        s.norm() <= 1e-6 * (1.0 + theta.norm()))
      return certified(model, data, theta);

    // Backtracking on the Armijo condition; a full step is exact for quadratics.
    const double slope = g.dot(s);
    double t = 1.0;
    ParamVector trial = theta - s;
    double trial_loss = loss(model, data, trial);
    while (trial_loss > current - 1e-4 * t * slope && t > 1e-12) {
      t *= 0.5;
      trial = theta - t * s;
      trial_loss = loss(model, data, trial);
    }
    if (trial_loss > current) {
      // No decrease is possible at this precision; accept if certified.
      if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tol) return certified(model, data, theta);
      break;
    }
    theta = trial;
    current = trial_loss;
    if (theta.norm() > 1e8) break;
  }
  throw ConvergenceError(
      "reference minimizer did not converge; parameters diverge or the objective has no finite "
      "minimizer");
}

double misspecification_gap(const ModelSpec& model, const Dataset& data,
                            const ParamVector& theta_star, double gradient_tol) {
  require_minimizer(model, data, theta_star, gradient_tol);
  const Eigen::MatrixXd fi = fisher(model, data, theta_star).values;
  const Eigen::MatrixXd ef = empirical_fisher(model, data, theta_star).values;
  const double denom = fi.norm();
  if (denom == 0) throw NumericalError("Fisher is zero; gap undefined");
  return (fi - ef).norm() / denom;
}

double classification_accuracy(const ModelSpec& model, const Dataset& data,
                               const ParamVector& theta) {
  if (!data.task.is_classification()) throw ConfigError("accuracy needs a classification task");
  const Eigen::MatrixXd f = outputs(model, data, theta);
  Index correct = 0;
  for (Index n = 0; n < data.size(); ++n)
    if (likelihood::mode(model, f.row(n).transpose()) == data.target(n)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace eflab
