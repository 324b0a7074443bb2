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

#include "eflab/model.hpp"

#include "eflab/error.hpp"
#include "eflab/kernels.hpp"
#include "eflab/likelihood.hpp"

#include <cmath>

namespace eflab {

std::string Task::name() const {
  switch (kind) {
    case TaskKind::Regression:
      return "regression";
    case TaskKind::Binary:
      return "binary";
    case TaskKind::Multiclass:
      return "multiclass";
  }
  return "?";
}

void Dataset::validate() const {
  if (size() < 1) throw DimensionError("dataset has no samples");
  if (input_dim() < 1) throw DimensionError("dataset has no features");
  if (!features.allFinite()) throw DimensionError("dataset has non-finite feature values");
  if (task.is_classification()) {
    if (task.num_classes < 2) throw DimensionError("classification task needs >= 2 classes");
    if (static_cast<Index>(labels.size()) != size())
      throw DimensionError("label count does not match sample count");
    for (int y : labels)
      if (y < 0 || y >= task.num_classes)
        throw DimensionError("label " + std::to_string(y) + " outside [0, " +
                             std::to_string(task.num_classes) + ")");
  } else {
    if (targets.size() != size()) throw DimensionError("target count does not match sample count");
    if (!targets.allFinite()) throw DimensionError("dataset has non-finite targets");
  }
}

Dataset Dataset::with_targets(const Eigen::VectorXd& values) const {
  Dataset out;
  out.features = features;
  out.task = task;
  if (task.is_classification()) {
    out.labels.resize(static_cast<std::size_t>(values.size()));
    for (Index n = 0; n < values.size(); ++n)
      out.labels[static_cast<std::size_t>(n)] = static_cast<int>(values[n]);
  } else {
    out.targets = values;
  }
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.task == b.task && a.features.rows() == b.features.rows() &&
         a.features.cols() == b.features.cols() && a.features == b.features &&
         a.targets.size() == b.targets.size() && a.targets == b.targets && a.labels == b.labels;
}

Dataset make_regression(Eigen::MatrixXd features, Eigen::VectorXd targets) {
  Dataset d;
  d.features = std::move(features);
  d.targets = std::move(targets);
  d.task = Task::regression();
  d.validate();
  return d;
}

Dataset make_classification(Eigen::MatrixXd features, std::vector<int> labels, Task task) {
  Dataset d;
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.task = task;
  d.validate();
  return d;
}

Index ModelSpec::feature_dim(Index input_dim) const {
  return input_dim + (includes_bias ? 1 : 0);
}

std::string ModelSpec::name() const {
  switch (kind) {
    case ModelKind::LinearGaussian:
      return "linear_gaussian";
    case ModelKind::LinearLogistic:
      return "logistic";
    case ModelKind::LinearSoftmax:
      return "softmax";
    case ModelKind::ScalarSine:
      return "scalar_sine";
  }
  return "?";
}

void ModelSpec::check(const Dataset& data) const {
  switch (kind) {
    case ModelKind::LinearGaussian:
      if (data.task.kind != TaskKind::Regression)
        throw ConfigError("linear_gaussian needs a regression dataset");
      break;
    case ModelKind::ScalarSine:
      if (data.task.kind != TaskKind::Regression || data.input_dim() != 1)
        throw ConfigError("scalar_sine needs a regression dataset with one feature");
      if (includes_bias) throw ConfigError("scalar_sine has no bias parameter");
      break;
    case ModelKind::LinearLogistic:
      if (data.task.kind != TaskKind::Binary)
        throw ConfigError("logistic needs a binary classification dataset");
      break;
    case ModelKind::LinearSoftmax:
      if (!data.task.is_classification() || data.task.num_classes != num_classes)
        throw ConfigError("softmax with " + std::to_string(num_classes) +
                          " classes needs a matching classification dataset");
      break;
  }
}

ModelSpec parse_model(const std::string& name, bool bias, int num_classes) {
  if (name == "linear_gaussian" || name == "gaussian") return ModelSpec::linear_gaussian(bias);
  if (name == "logistic") return ModelSpec::logistic(bias);
  if (name == "softmax") {
    if (num_classes < 2) throw ConfigError("softmax needs num_classes >= 2");
    return ModelSpec::softmax(num_classes, bias);
  }
  if (name == "scalar_sine" || name == "sine") return ModelSpec::scalar_sine();
  throw ConfigError("unknown model '" + name +
                    "' (expected linear_gaussian, logistic, softmax, scalar_sine)");
}

namespace {

void check_inputs(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  model.check(data);
  if (data.size() < 1) throw DimensionError("dataset has no samples");
  const Index d = model.param_dim(data.input_dim());
  if (theta.size() != d)
    throw DimensionError("parameter vector has length " + std::to_string(theta.size()) +
                         ", model expects " + std::to_string(d));
  if (!theta.allFinite()) throw NumericalError("parameter vector has non-finite entries");
}

Eigen::MatrixXd augmented(const ModelSpec& model, const Dataset& data) {
  if (!model.includes_bias) return data.features;
  Eigen::MatrixXd x(data.size(), data.input_dim() + 1);
  x.leftCols(data.input_dim()) = data.features;
  x.col(data.input_dim()).setOnes();
  return x;
}

Eigen::MatrixXd outputs_unchecked(const ModelSpec& model, const Dataset& data,
                                  const ParamVector& theta) {
  if (model.kind == ModelKind::ScalarSine)
    return (data.features.col(0).array() * theta[0]).sin().matrix();
  const Index p = model.feature_dim(data.input_dim());
  const Eigen::Map<const Eigen::MatrixXd> weights(theta.data(), p, model.output_dim());
  return augmented(model, data) * weights;
}

Eigen::MatrixXd output_grads(const ModelSpec& model, const Dataset& data,
                             const Eigen::MatrixXd& f) {
  const Index n_samples = data.size();
  Eigen::MatrixXd r(n_samples, f.cols());
  switch (model.kind) {
    case ModelKind::LinearGaussian:
    case ModelKind::ScalarSine:
      r.col(0) = f.col(0) - data.targets;
      break;
    case ModelKind::LinearLogistic:
      for (Index n = 0; n < n_samples; ++n) r(n, 0) = likelihood::sigmoid(f(n, 0)) - data.target(n);
      break;
    case ModelKind::LinearSoftmax:
#pragma omp parallel for schedule(static)
      for (Index n = 0; n < n_samples; ++n)
        r.row(n) = likelihood::residual(model, f.row(n).transpose(), data.target(n)).transpose();
      break;
  }
  return r;
}

}  // namespace

Eigen::MatrixXd effective_features(const ModelSpec& model, const Dataset& data,
                                   const ParamVector& theta) {
  check_inputs(model, data, theta);
  if (model.kind == ModelKind::ScalarSine) {
    const auto x = data.features.col(0).array();
    return (x * (x * theta[0]).cos()).matrix();
  }
  return augmented(model, data);
}

Eigen::MatrixXd outputs(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  check_inputs(model, data, theta);
  return outputs_unchecked(model, data, theta);
}

PredOutput predict(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  check_inputs(model, data, theta);
  PredOutput out;
  out.outputs = outputs_unchecked(model, data, theta);
  out.output_grads = output_grads(model, data, out.outputs);
  return out;
}

Eigen::VectorXd sample_losses(const ModelSpec& model, const Dataset& data,
                              const ParamVector& theta) {
  check_inputs(model, data, theta);
  const Eigen::MatrixXd f = outputs_unchecked(model, data, theta);
  Eigen::VectorXd l(data.size());
  for (Index n = 0; n < data.size(); ++n)
    l[n] = likelihood::nll(model, f.row(n).transpose(), data.target(n));
  return l;
}

double loss(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  const Eigen::VectorXd l = sample_losses(model, data, theta);
  const double value = kernels::block_mean(l)[0];
  if (!std::isfinite(value)) throw NumericalError("loss is not finite");
  return value;
}

Eigen::VectorXd gradient(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  const PredOutput pred = predict(model, data, theta);
  Eigen::VectorXd g =
      kernels::kron_mean(effective_features(model, data, theta), pred.output_grads);
  if (!g.allFinite()) throw NumericalError("gradient is not finite");
  return g;
}

Eigen::MatrixXd per_sample_gradients(const ModelSpec& model, const Dataset& data,
                                     const ParamVector& theta) {
  const PredOutput pred = predict(model, data, theta);
  Eigen::MatrixXd g =
      kernels::kron_rows(effective_features(model, data, theta), pred.output_grads);
  if (!g.allFinite()) throw NumericalError("per-sample gradients are not finite");
  return g;
}

std::vector<Eigen::MatrixXd> output_jacobian(const ModelSpec& model, const Dataset& data,
                                             const ParamVector& theta) {
  const Eigen::MatrixXd phi = effective_features(model, data, theta);
  const Index m = model.output_dim();
  const Index p = phi.cols();
  std::vector<Eigen::MatrixXd> jac(static_cast<std::size_t>(data.size()));
  for (Index n = 0; n < data.size(); ++n) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, m * p);
    for (Index c = 0; c < m; ++c) j.block(c, c * p, 1, p) = phi.row(n);
    jac[static_cast<std::size_t>(n)] = std::move(j);
  }
  return jac;
}

Dataset sample_model_outputs(const ModelSpec& model, const Dataset& data,
                             const ParamVector& theta, std::uint64_t seed) {
  const Eigen::MatrixXd f = outputs(model, data, theta);
  Eigen::VectorXd y(data.size());
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < data.size(); ++n) {
    auto rng = likelihood::stream_engine(seed, static_cast<std::uint64_t>(n));
    y[n] = likelihood::draw(model, f.row(n).transpose(), rng);
  }
  return data.with_targets(y);
}

}  // namespace eflab
