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

#include "eflab/likelihood.hpp"

#include "eflab/error.hpp"

#include <cmath>

namespace eflab::likelihood {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double log_sum_exp(const OutputRef& f) {
  const double m = f.maxCoeff();
  return m + std::log((f.array() - m).exp().sum());
}

Eigen::VectorXd softmax(const OutputRef& f) {
  Eigen::VectorXd p = (f.array() - f.maxCoeff()).exp();
  return p / p.sum();
}

namespace {

int as_label(double target, Index classes) {
  const int label = static_cast<int>(target);
  if (label < 0 || label >= classes) throw DimensionError("label out of range");
  return label;
}

}  // namespace

double nll(const ModelSpec& model, const OutputRef& f, double target) {
  switch (model.kind) {
    case ModelKind::LinearGaussian:
    case ModelKind::ScalarSine: {
      const double r = f[0] - target;
      return 0.5 * r * r;
    }
    case ModelKind::LinearLogistic:
      return softplus(f[0]) - target * f[0];
    case ModelKind::LinearSoftmax:
      return log_sum_exp(f) - f[as_label(target, f.size())];
  }
  return 0;
}

Eigen::VectorXd residual(const ModelSpec& model, const OutputRef& f, double target) {
  switch (model.kind) {
    case ModelKind::LinearGaussian:
    case ModelKind::ScalarSine:
      return Eigen::VectorXd::Constant(1, f[0] - target);
    case ModelKind::LinearLogistic:
      return Eigen::VectorXd::Constant(1, sigmoid(f[0]) - target);
    case ModelKind::LinearSoftmax: {
      Eigen::VectorXd r = softmax(f);
      r[as_label(target, f.size())] -= 1.0;
      return r;
    }
  }
  return {};
}

Eigen::MatrixXd output_hessian(const ModelSpec& model, const OutputRef& f) {
  switch (model.kind) {
    case ModelKind::LinearGaussian:
    case ModelKind::ScalarSine:
      return Eigen::MatrixXd::Ones(1, 1);
    case ModelKind::LinearLogistic: {
      const double s = sigmoid(f[0]);
      return Eigen::MatrixXd::Constant(1, 1, s * (1.0 - s));
    }
    case ModelKind::LinearSoftmax: {
      const Eigen::VectorXd p = softmax(f);
      Eigen::MatrixXd h = -p * p.transpose();
      h.diagonal() += p;
      return h;
    }
  }
  return {};
}

Eigen::MatrixXd expected_residual_outer(const ModelSpec& model, const OutputRef& f) {
  switch (model.kind) {
    case ModelKind::LinearGaussian:
    case ModelKind::ScalarSine:
      // E[(f - y)^2] for y ~ N(f, 1)
      return Eigen::MatrixXd::Ones(1, 1);
    case ModelKind::LinearLogistic: {
      const double s = sigmoid(f[0]);
      // y = 1 with probability s, y = 0 otherwise
      const double r1 = s - 1.0;
      const double r0 = s;
      return Eigen::MatrixXd::Constant(1, 1, s * r1 * r1 + (1.0 - s) * r0 * r0);
    }
    case ModelKind::LinearSoftmax: {
      const Eigen::VectorXd p = softmax(f);
      const Index c = p.size();
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(c, c);
      for (Index y = 0; y < c; ++y) {
        Eigen::VectorXd r = p;
        r[y] -= 1.0;
        out.noalias() += p[y] * r * r.transpose();
      }
      return out;
    }
  }
  return {};
}

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double draw(const ModelSpec& model, const OutputRef& f, std::mt19937_64& rng) {
  switch (model.kind) {
    case ModelKind::LinearGaussian:
    case ModelKind::ScalarSine: {
      std::normal_distribution<double> noise(0.0, 1.0);
      return f[0] + noise(rng);
    }
    case ModelKind::LinearLogistic:
      return uniform01(rng) < sigmoid(f[0]) ? 1.0 : 0.0;
    case ModelKind::LinearSoftmax: {
      const Eigen::VectorXd p = softmax(f);
      const double u = uniform01(rng);
      double acc = 0;
      for (Index c = 0; c < p.size(); ++c) {
        acc += p[c];
        if (u < acc) return static_cast<double>(c);
      }
      return static_cast<double>(p.size() - 1);
    }
  }
  return 0;
}

double mode(const ModelSpec& model, const OutputRef& f) {
  switch (model.kind) {
    case ModelKind::LinearGaussian:
    case ModelKind::ScalarSine:
      return f[0];
    case ModelKind::LinearLogistic:
      return f[0] > 0 ? 1.0 : 0.0;
    case ModelKind::LinearSoftmax: {
      Index best = 0;
      f.maxCoeff(&best);
      return static_cast<double>(best);
    }
  }
  return 0;
}

std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace eflab::likelihood
