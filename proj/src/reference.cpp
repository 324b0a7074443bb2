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

#include "eflab/reference.hpp"

#include "eflab/likelihood.hpp"

#include <cmath>

namespace eflab::reference {

namespace {

// D_theta f(x_n, theta), built directly from the model definition.
Eigen::MatrixXd jacobian(const ModelSpec& model, const Dataset& data, const ParamVector& theta,
                         Index n) {
  const Index m = model.output_dim();
  const Index p = model.feature_dim(data.input_dim());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, theta.size());
  if (model.kind == ModelKind::ScalarSine) {
    const double x = data.features(n, 0);
    j(0, 0) = x * std::cos(theta[0] * x);
    return j;
  }
  for (Index c = 0; c < m; ++c) {
    for (Index k = 0; k < data.input_dim(); ++k) j(c, c * p + k) = data.features(n, k);
    if (model.includes_bias) j(c, c * p + p - 1) = 1.0;
  }
  return j;
}

Eigen::VectorXd output(const ModelSpec& model, const Dataset& data, const ParamVector& theta,
                       Index n) {
  if (model.kind == ModelKind::ScalarSine)
    return Eigen::VectorXd::Constant(1, std::sin(theta[0] * data.features(n, 0)));
  return jacobian(model, data, theta, n) * theta;
}

Eigen::VectorXd sample_gradient(const ModelSpec& model, const Dataset& data,
                                const ParamVector& theta, Index n) {
  const Eigen::VectorXd f = output(model, data, theta, n);
  return jacobian(model, data, theta, n).transpose() *
         likelihood::residual(model, f, data.target(n));
}

template <typename Weight>
Eigen::MatrixXd sandwich_mean(const ModelSpec& model, const Dataset& data,
                              const ParamVector& theta, Weight&& weight) {
  const Index d = theta.size();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  for (Index n = 0; n < data.size(); ++n) {
    const Eigen::MatrixXd j = jacobian(model, data, theta, n);
    acc += j.transpose() * weight(output(model, data, theta, n)) * j;
  }
  return acc / static_cast<double>(data.size());
}

}  // namespace

Eigen::VectorXd gradient(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(theta.size());
  for (Index n = 0; n < data.size(); ++n) acc += sample_gradient(model, data, theta, n);
  return acc / static_cast<double>(data.size());
}

Eigen::MatrixXd per_sample_gradients(const ModelSpec& model, const Dataset& data,
                                     const ParamVector& theta) {
  Eigen::MatrixXd g(data.size(), theta.size());
  for (Index n = 0; n < data.size(); ++n)
    g.row(n) = sample_gradient(model, data, theta, n).transpose();
  return g;
}

Eigen::MatrixXd fisher(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  return sandwich_mean(model, data, theta, [&](const Eigen::VectorXd& f) {
    return likelihood::expected_residual_outer(model, f);
  });
}

Eigen::MatrixXd empirical_fisher(const ModelSpec& model, const Dataset& data,
                                 const ParamVector& theta) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(theta.size(), theta.size());
  for (Index n = 0; n < data.size(); ++n) {
    const Eigen::VectorXd g = sample_gradient(model, data, theta, n);
    acc += g * g.transpose();
  }
  return acc / static_cast<double>(data.size());
}

Eigen::MatrixXd ggn_canonical(const ModelSpec& model, const Dataset& data,
                              const ParamVector& theta) {
  return sandwich_mean(model, data, theta, [&](const Eigen::VectorXd& f) {
    return likelihood::output_hessian(model, f);
  });
}

Eigen::MatrixXd hessian(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  Eigen::MatrixXd h = ggn_canonical(model, data, theta);
  if (model.kind == ModelKind::ScalarSine) {
    double acc = 0;
    for (Index n = 0; n < data.size(); ++n) {
      const double x = data.features(n, 0);
      const double r = std::sin(theta[0] * x) - data.targets[n];
      acc += r * (-x * x * std::sin(theta[0] * x));
    }
    h(0, 0) += acc / static_cast<double>(data.size());
  }
  return h;
}

}  // namespace eflab::reference
