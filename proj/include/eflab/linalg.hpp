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

#include <Eigen/Dense>

namespace eflab::linalg {

/// Solves (A + damping I) x = b through an LDL^T factorization; no inverse is
/// formed. Throws SingularMatrixError when a pivot vanishes relative to the
/// largest one, which with damping == 0 means the caller must add damping.
Eigen::VectorXd solve_damped(const Eigen::MatrixXd& A, double damping, const Eigen::VectorXd& b);

/// Same, for a matrix right-hand side.
Eigen::MatrixXd solve_damped(const Eigen::MatrixXd& A, double damping, const Eigen::MatrixXd& B);

// Symmetric matrices only; full eigendecomposition.
double spectral_norm(const Eigen::MatrixXd& sym);
double min_eigenvalue(const Eigen::MatrixXd& sym);

bool is_symmetric(const Eigen::MatrixXd& m, double tol);
double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace eflab::linalg
