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

#include "eflab/curvature.hpp"

#include "eflab/error.hpp"
#include "eflab/kernels.hpp"
#include "eflab/likelihood.hpp"
#include "eflab/linalg.hpp"

#include <cmath>
#include <sstream>

namespace eflab {

std::string to_string(CurvatureKind kind) {
  switch (kind) {
    case CurvatureKind::Fisher:
      return "fisher";
    case CurvatureKind::EmpiricalFisher:
      return "empirical_fisher";
    case CurvatureKind::GGN:
      return "ggn";
    case CurvatureKind::Hessian:
      return "hessian";
    case CurvatureKind::MCFisher:
      return "mc_fisher";
  }
  return "?";
}

std::string to_string(SplitId split) {
  switch (split) {
    case SplitId::Canonical:
      return "canonical";
    case SplitId::EFSplit:
      return "ef";
    case SplitId::Trivial:
      return "trivial";
  }
  return "?";
}

SplitId parse_split(const std::string& name) {
  if (name == "canonical") return SplitId::Canonical;
  if (name == "ef" || name == "ef_split") return SplitId::EFSplit;
  if (name == "trivial") return SplitId::Trivial;
  throw ConfigError("unknown split '" + name + "' (expected canonical, ef, trivial)");
}

std::string CurvatureMatrix::label() const {
  std::string s = to_string(kind);
  if (split) s += "(" + to_string(*split) + ")";
  if (kind == CurvatureKind::MCFisher)
    s += "(seed=" + std::to_string(seed) + ", samples=" + std::to_string(num_samples) + ")";
  return s;
}

namespace {

CurvatureMatrix tagged(Eigen::MatrixXd values, CurvatureKind kind) {
  if (!values.allFinite()) throw NumericalError(to_string(kind) + " has non-finite entries");
  CurvatureMatrix m;
  m.values = std::move(values);
  m.kind = kind;
  return m;
}

// Row n holds the M x M output-space weight of sample n.
template <typename PerSample>
Eigen::MatrixXd output_weights(const Eigen::MatrixXd& f, Index m, PerSample&& per_sample) {
  Eigen::MatrixXd w(f.rows(), m * m);
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < f.rows(); ++n) {
    const Eigen::MatrixXd a = per_sample(n);
    w.row(n) = Eigen::Map<const Eigen::RowVectorXd>(a.data(), m * m);
  }
  return w;
}

// (1/N) sum_n sum_m r_nm grad^2_theta f_nm; nonzero only for ScalarSine.
Eigen::MatrixXd residual_curvature(const ModelSpec& model, const Dataset& data,
                                   const ParamVector& theta, const Eigen::MatrixXd& residuals) {
  const Index d = theta.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  if (model.kind != ModelKind::ScalarSine) return out;
  const auto x = data.features.col(0).array();
  const Eigen::VectorXd second = (-(x * x) * (x * theta[0]).sin()).matrix();
  out(0, 0) = kernels::block_mean(residuals.col(0).cwiseProduct(second))[0];
  return out;
}

Eigen::MatrixXd canonical_ggn_values(const ModelSpec& model, const Dataset& data,
                                     const ParamVector& theta, const Eigen::MatrixXd& f) {
  const Index m = model.output_dim();
  const Eigen::MatrixXd w = output_weights(f, m, [&](Index n) {
    return likelihood::output_hessian(model, f.row(n).transpose());
  });
  return kernels::kron_gram(effective_features(model, data, theta), w, m);
}

// GGN of a_n(b) = -log b, b_n = p(y_n | f_n): (1/N) sum_n J_b^T (1/b^2) J_b with
// J_b = grad_theta p = -p g_n. Long double keeps p representable for large losses.
Eigen::MatrixXd ef_split_values(const ModelSpec& model, const Dataset& data,
                                const ParamVector& theta) {
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const Eigen::MatrixXd g = per_sample_gradients(model, data, theta);
  const Eigen::VectorXd nll = sample_losses(model, data, theta);
  const Index d = g.cols();
  LMatrix acc = LMatrix::Zero(d, d);
  for (Index n = 0; n < data.size(); ++n) {
    const long double b = std::exp(-static_cast<long double>(nll[n]));
    if (!(b > 0)) throw NumericalError("likelihood underflow in the EF split");
    const LVector jb = -b * g.row(n).transpose().cast<long double>();
    const long double curvature = 1.0L / (b * b);
    acc.noalias() += curvature * jb * jb.transpose();
  }
  Eigen::MatrixXd out = (acc / static_cast<long double>(data.size())).cast<double>();
  return out.selfadjointView<Eigen::Upper>();
}

// b_n = theta: the GGN is the average of the per-sample loss Hessians.
Eigen::MatrixXd trivial_split_values(const ModelSpec& model, const Dataset& data,
                                     const ParamVector& theta) {
  const PredOutput pred = predict(model, data, theta);
  const std::vector<Eigen::MatrixXd> jac = output_jacobian(model, data, theta);
  const Index d = theta.size();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  for (Index n = 0; n < data.size(); ++n) {
    const Eigen::MatrixXd& j = jac[static_cast<std::size_t>(n)];
    Eigen::MatrixXd per_sample =
        j.transpose() * likelihood::output_hessian(model, pred.outputs.row(n).transpose()) * j;
    if (model.kind == ModelKind::ScalarSine) {
      const double x = data.features(n, 0);
      per_sample(0, 0) += pred.output_grads(n, 0) * (-x * x * std::sin(theta[0] * x));
    }
    acc += per_sample;
  }
  Eigen::MatrixXd out = acc / static_cast<double>(data.size());
  return out.selfadjointView<Eigen::Upper>();
}

}  // namespace

CurvatureMatrix fisher(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  const Eigen::MatrixXd f = outputs(model, data, theta);
  const Index m = model.output_dim();
  const Eigen::MatrixXd w = output_weights(f, m, [&](Index n) {
    return likelihood::expected_residual_outer(model, f.row(n).transpose());
  });
  return tagged(kernels::kron_gram(effective_features(model, data, theta), w, m),
                CurvatureKind::Fisher);
}

CurvatureMatrix empirical_fisher(const ModelSpec& model, const Dataset& data,
                                 const ParamVector& theta) {
  const Eigen::MatrixXd g = per_sample_gradients(model, data, theta);
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(g.rows(), 1);
  return tagged(kernels::kron_gram(g, ones, 1), CurvatureKind::EmpiricalFisher);
}

CurvatureMatrix ggn(const ModelSpec& model, const Dataset& data, const ParamVector& theta,
                    SplitId split) {
  Eigen::MatrixXd values;
  switch (split) {
    case SplitId::Canonical:
      values = canonical_ggn_values(model, data, theta, outputs(model, data, theta));
      break;
    case SplitId::EFSplit:
      values = ef_split_values(model, data, theta);
      break;
    case SplitId::Trivial:
      values = trivial_split_values(model, data, theta);
      break;
  }
  CurvatureMatrix out = tagged(std::move(values), CurvatureKind::GGN);
  out.split = split;
  return out;
}

CurvatureMatrix hessian(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  const PredOutput pred = predict(model, data, theta);
  Eigen::MatrixXd values = canonical_ggn_values(model, data, theta, pred.outputs);
  values += residual_curvature(model, data, theta, pred.output_grads);
  return tagged(std::move(values), CurvatureKind::Hessian);
}

CurvatureMatrix mc_fisher(const ModelSpec& model, const Dataset& data, const ParamVector& theta,
                          Index num_samples, std::uint64_t seed, LabelSampling sampling) {
  if (num_samples < 1) throw ConfigError("mc_fisher needs num_samples >= 1");
  const Eigen::MatrixXd f = outputs(model, data, theta);
  const Index m = model.output_dim();
  const Eigen::MatrixXd w = output_weights(f, m, [&](Index n) {
    const Eigen::VectorXd fn = f.row(n).transpose();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
    auto rng = likelihood::stream_engine(seed, static_cast<std::uint64_t>(n));
    for (Index s = 0; s < num_samples; ++s) {
      const double y = sampling == LabelSampling::Model ? likelihood::draw(model, fn, rng)
                                                        : likelihood::mode(model, fn);
      const Eigen::VectorXd r = likelihood::residual(model, fn, y);
      acc.noalias() += r * r.transpose();
    }
    return Eigen::MatrixXd(acc / static_cast<double>(num_samples));
  });
  CurvatureMatrix out =
      tagged(kernels::kron_gram(effective_features(model, data, theta), w, m),
             CurvatureKind::MCFisher);
  out.seed = seed;
  out.num_samples = num_samples;
  return out;
}

double smoothness_constant(const ModelSpec& model, const Dataset& data) {
  if (model.is_linear()) return 0.0;
  return data.features.col(0).array().square().maxCoeff();
}

double residual_l1(const ModelSpec& model, const Dataset& data, const ParamVector& theta) {
  return predict(model, data, theta).output_grads.cwiseAbs().sum();
}

GgnBound ggn_error_bound(const ModelSpec& model, const Dataset& data, const ParamVector& theta,
                         std::optional<double> beta) {
  if (beta && !(*beta >= 0)) throw ConfigError("beta must be non-negative");
  GgnBound b;
  b.beta = beta ? *beta : smoothness_constant(model, data);
  const double n = static_cast<double>(data.size());
  const Eigen::MatrixXd diff =
      hessian(model, data, theta).values - ggn(model, data, theta, SplitId::Canonical).values;
  b.gap_norm = n * linalg::spectral_norm(diff);
  b.gap_squared = b.gap_norm * b.gap_norm;
  b.residual = residual_l1(model, data, theta);
  b.rhs = b.residual * b.beta;
  const double slack = 1e-12 * (1.0 + b.rhs);
  b.norm_bound_holds = b.gap_norm <= b.rhs + slack;
  b.squared_bound_holds = b.gap_squared <= b.rhs + slack;
  if (!b.norm_bound_holds) {
    std::ostringstream msg;
    msg << "Hessian-GGN gap " << b.gap_norm << " exceeds r*beta = " << b.rhs;
    throw NumericalError(msg.str());
  }
  return b;
}

std::string SplitValidityReport::to_text() const {
  std::ostringstream out;
  const char* verdicts[] = {"valid", "valid in closure", "invalid"};
  out << "split: " << to_string(split) << '\n';
  out << "model: " << ModelSpec{model, false, 0}.name() << '\n';
  out << "verdict: " << verdicts[static_cast<int>(verdict)] << '\n';
  out << "attains_zero_gradient: " << (attains_zero_gradient ? "true" : "false") << '\n';
  out << "witness: " << (witness.empty() ? "none" : witness) << '\n';
  out << "reason: " << reason << '\n';
  return out.str();
}

SplitValidityReport check_split_validity(SplitId split, const ModelSpec& model) {
  SplitValidityReport r;
  r.split = split;
  r.model = model.kind;
  const bool gaussian =
      model.kind == ModelKind::LinearGaussian || model.kind == ModelKind::ScalarSine;

  switch (split) {
    case SplitId::EFSplit:
      r.verdict = SplitVerdict::Invalid;
      r.reason =
          "grad_b(-log b) = -1/b != 0 for every probability b in (0, 1]; a_n has no stationary "
          "point on Img(b_n)";
      break;
    case SplitId::Canonical:
      if (gaussian) {
        r.verdict = SplitVerdict::Valid;
        r.witness = "b* = y_n";
        r.reason = "grad_b(-log p(y_n | b)) = b - y_n vanishes at b = y_n";
        if (model.kind == ModelKind::ScalarSine)
          r.reason += ", which lies in Img(b_n) = [-1, 1] when |y_n| <= 1";
      } else if (model.kind == ModelKind::LinearLogistic) {
        r.verdict = SplitVerdict::ValidInClosure;
        r.reason =
            "grad_b(-log p(y_n | b)) = sigmoid(b) - y_n vanishes only as b -> +-inf; zero "
            "attained in closure of Img(b_n)";
      } else {
        r.verdict = SplitVerdict::ValidInClosure;
        r.reason =
            "grad_b(-log p(y_n | b)) = softmax(b) - e_{y_n} vanishes only as the logits "
            "diverge; zero attained in closure of Img(b_n)";
      }
      break;
    case SplitId::Trivial:
      if (model.kind == ModelKind::LinearGaussian) {
        r.verdict = SplitVerdict::Valid;
        r.witness = "any theta with f(x_n, theta) = y_n";
        r.reason = "the per-sample squared loss is stationary wherever its residual vanishes";
      } else if (model.kind == ModelKind::ScalarSine) {
        r.verdict = SplitVerdict::Valid;
        r.witness = "theta = pi / (2 x_n)";
        r.reason = "the per-sample loss is stationary where cos(theta x_n) = 0";
      } else {
        r.verdict = SplitVerdict::ValidInClosure;
        r.reason =
            "the per-sample cross-entropy gradient vanishes only as theta diverges; zero "
            "attained in closure of Img(b_n)";
      }
      break;
  }
  r.attains_zero_gradient = r.verdict == SplitVerdict::Valid;
  return r;
}

VarianceAdaptation variance_adaptation(const ModelSpec& model, const Dataset& data,
                                       const ParamVector& theta, double damping) {
  if (!(damping >= 0)) throw ConfigError("damping must be non-negative");
  const double n = static_cast<double>(data.size());
  const Eigen::MatrixXd per_sample = per_sample_gradients(model, data, theta);
  const Eigen::MatrixXd g = n * per_sample;  // stochastic gradients, sum convention

  VarianceAdaptation va;
  va.gradient_sum = kernels::block_mean(g);
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(g.rows(), 1);
  va.second_moment = kernels::kron_gram(g, ones, 1);
  const Eigen::MatrixXd centered = g.rowwise() - va.gradient_sum.transpose();
  va.noise_covariance = kernels::kron_gram(centered, ones, 1);

  const Eigen::MatrixXd signal = va.gradient_sum * va.gradient_sum.transpose();
  const double scale = va.second_moment.norm();
  va.decomposition_residual =
      scale > 0 ? (va.second_moment - va.noise_covariance - signal).norm() / scale : 0.0;
  if (va.decomposition_residual > 1e-8)
    throw NumericalError("second moment != covariance + mean outer product (residual " +
                         std::to_string(va.decomposition_residual) + ")");

  const Index d = theta.size();
  if (va.gradient_sum.isZero(0.0)) {
    va.full_matrix = Eigen::MatrixXd::Zero(d, d);
  } else {
    va.full_matrix = linalg::solve_damped(va.second_moment, damping, signal);
  }

  va.diagonal.resize(d);
  for (Index i = 0; i < d; ++i) {
    const double s = va.gradient_sum[i] * va.gradient_sum[i];
    const double denom = s + va.noise_covariance(i, i);
    va.diagonal[i] = denom > 0 ? s / denom : 0.0;
  }
  return va;
}

}  // namespace eflab
