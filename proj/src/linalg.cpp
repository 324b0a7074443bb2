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

#include "eflab/linalg.hpp"

#include "eflab/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace eflab::linalg {

namespace {

Eigen::LDLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& A, double damping) {
  if (A.rows() != A.cols()) throw DimensionError("preconditioner must be square");
  if (!(damping >= 0)) throw ConfigError("damping must be non-negative");
  Eigen::MatrixXd shifted = A;
  shifted.diagonal().array() += damping;
  if (!shifted.allFinite()) throw NumericalError("preconditioner has non-finite entries");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
  const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
  const double largest = pivots.size() ? pivots.maxCoeff() : 0.0;
  const double tol = static_cast<double>(A.rows()) * std::numeric_limits<double>::epsilon() * largest;
  if (ldlt.info() != Eigen::Success || largest == 0.0 || pivots.minCoeff() <= tol) {
    std::string msg = "preconditioner is singular";
    if (damping == 0) msg += "; use a nonzero damping";
    throw SingularMatrixError(msg);
  }
  return ldlt;
}

}  // namespace

Eigen::VectorXd solve_damped(const Eigen::MatrixXd& A, double damping, const Eigen::VectorXd& b) {
  if (b.size() != A.rows()) throw DimensionError("right-hand side length mismatch");
  return factor(A, damping).solve(b);
}

Eigen::MatrixXd solve_damped(const Eigen::MatrixXd& A, double damping, const Eigen::MatrixXd& B) {
  if (B.rows() != A.rows()) throw DimensionError("right-hand side rows mismatch");
  return factor(A, damping).solve(B);
}

double spectral_norm(const Eigen::MatrixXd& sym) {
  if (sym.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_symmetric(const Eigen::MatrixXd& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("shape mismatch");
  return a.size() ? (a - b).cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace eflab::linalg
