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

namespace eflab {

enum class CurvatureKind { Fisher, EmpiricalFisher, GGN, Hessian, MCFisher };

/// How the loss is split into L = (1/N) sum_n a_n(b_n(theta)) for a GGN.
///   Canonical: a_n(b) = -log p(y_n | b),  b_n = f(x_n, theta)
///   EFSplit:   a_n(b) = -log b,           b_n = p(y_n | f(x_n, theta))
///   Trivial:   a_n = the per-sample loss, b_n = theta
enum class SplitId { Canonical, EFSplit, Trivial };

std::string to_string(CurvatureKind kind);
std::string to_string(SplitId split);
SplitId parse_split(const std::string& name);

/// A symmetric D x D curvature matrix. Every matrix in this library uses the
/// averaged (1/N) convention; multiply by N for the sum form of the loss.
struct CurvatureMatrix {
  Eigen::MatrixXd values;
  CurvatureKind kind = CurvatureKind::Fisher;
  std::optional<SplitId> split;  // GGN only
  std::uint64_t seed = 0;        // MCFisher only
  Index num_samples = 0;         // MCFisher only

  static constexpr const char* convention = "averaged (1/N)";

  Index dim() const { return values.rows(); }
  std::string label() const;
};

CurvatureMatrix fisher(const ModelSpec& model, const Dataset& data, const ParamVector& theta);
CurvatureMatrix empirical_fisher(const ModelSpec& model, const Dataset& data,
                                 const ParamVector& theta);
CurvatureMatrix ggn(const ModelSpec& model, const Dataset& data, const ParamVector& theta,
                    SplitId split);
CurvatureMatrix hessian(const ModelSpec& model, const Dataset& data, const ParamVector& theta);

enum class LabelSampling {
  Model,   // y~ ~ p(y | f): unbiased
  Argmax,  // y^ = mode of p(y | f): biased, zero for Gaussian regression
};

/// (1/(N S)) sum_{n,s} g(y~_{n,s}) g(y~_{n,s})^T with per-sample random
/// streams (stream id = n). Throws ConfigError for num_samples < 1.
CurvatureMatrix mc_fisher(const ModelSpec& model, const Dataset& data, const ParamVector& theta,
                          Index num_samples, std::uint64_t seed,
                          LabelSampling sampling = LabelSampling::Model);

/// Smoothness constant of the outputs in theta: 0 for linear models,
/// max_n x_n^2 for ScalarSine.
double smoothness_constant(const ModelSpec& model, const Dataset& data);

/// sum_n || grad_f log p(y_n | f(x_n, theta)) ||_1 (sum convention).
double residual_l1(const ModelSpec& model, const Dataset& data, const ParamVector& theta);

struct GgnBound {
  double gap_norm = 0;     // || N (H - G) ||_2, H and G averaged
  double gap_squared = 0;  // gap_norm^2
  double residual = 0;     // r(theta)
  double beta = 0;
  double rhs = 0;          // r(theta) * beta
  bool norm_bound_holds = true;     // gap_norm <= rhs, the proven form
  bool squared_bound_holds = true;  // gap_squared <= rhs
};

/// Compares the Hessian with the canonical GGN in the sum convention. Throws
/// NumericalError if the proven bound ||H - G||_2 <= r beta is violated
/// (beyond rounding), since that can only be an implementation error.
GgnBound ggn_error_bound(const ModelSpec& model, const Dataset& data, const ParamVector& theta,
                         std::optional<double> beta = std::nullopt);

enum class SplitVerdict { Valid, ValidInClosure, Invalid };

struct SplitValidityReport {
  SplitId split = SplitId::Canonical;
  ModelKind model = ModelKind::LinearGaussian;
  SplitVerdict verdict = SplitVerdict::Valid;
  bool attains_zero_gradient = false;
  std::string witness;  // where grad_b a_n vanishes, if anywhere
  std::string reason;

  std::string to_text() const;
};

/// Whether grad_b a_n(b) = 0 for some b in the image of b_n.
SplitValidityReport check_split_validity(SplitId split, const ModelSpec& model);

/// Quantities in the sum convention: g = N * (per-sample gradient),
/// grad L = sum of per-sample gradients, N F~ = sum_n g_n g_n^T.
struct VarianceAdaptation {
  Eigen::MatrixXd full_matrix;       // (N F~ + damping I)^{-1} grad L grad L^T
  Eigen::VectorXd diagonal;          // [grad L]_i^2 / ([grad L]_i^2 + Sigma_ii)
  Eigen::MatrixXd noise_covariance;  // Sigma = cov[g]
  Eigen::MatrixXd second_moment;     // N F~
  Eigen::VectorXd gradient_sum;      // grad L
  double decomposition_residual = 0; // ||N F~ - Sigma - grad grad^T||_F / ||N F~||_F
};

/// Throws SingularMatrixError when N F~ is singular and damping == 0. A zero
/// gradient yields a zero full_matrix; d_i is 0 when signal and noise are both 0.
VarianceAdaptation variance_adaptation(const ModelSpec& model, const Dataset& data,
                                       const ParamVector& theta, double damping);

}  // namespace eflab
