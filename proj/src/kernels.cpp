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

#include "eflab/kernels.hpp"

#include "eflab/error.hpp"

#include <omp.h>

#include <vector>

namespace eflab::kernels {

namespace {

Index block_count(Index rows) { return (rows + kBlockRows - 1) / kBlockRows; }

template <typename Partial>
Partial sum_in_order(std::vector<Partial>& partials) {
  Partial total = std::move(partials.front());
  for (std::size_t b = 1; b < partials.size(); ++b) total += partials[b];
  return total;
}

}  // namespace

Eigen::MatrixXd kron_gram(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& weights, Index M) {
  const Index n_rows = phi.rows();
  const Index p = phi.cols();
  if (n_rows < 1) throw DimensionError("no samples to reduce");
  if (weights.rows() != n_rows || weights.cols() != M * M)
    throw DimensionError("weight matrix must be N x M^2");
  const Index blocks = block_count(n_rows);
  std::vector<Eigen::MatrixXd> partials(static_cast<std::size_t>(blocks));

#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index start = b * kBlockRows;
    const Index len = std::min(kBlockRows, n_rows - start);
    const auto rows = phi.middleRows(start, len);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(M * p, M * p);
    Eigen::MatrixXd scaled(len, p);
    for (Index c = 0; c < M; ++c) {
      for (Index c2 = c; c2 < M; ++c2) {
        scaled = weights.col(c + c2 * M).segment(start, len).asDiagonal() * rows;
        s.block(c * p, c2 * p, p, p).noalias() = rows.transpose() * scaled;
      }
    }
    partials[static_cast<std::size_t>(b)] = std::move(s);
  }

  const Eigen::MatrixXd upper = sum_in_order(partials) / static_cast<double>(n_rows);
  Eigen::MatrixXd out = upper.selfadjointView<Eigen::Upper>();
  return out;
}

Eigen::VectorXd kron_mean(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& residuals) {
  const Index n_rows = phi.rows();
  const Index p = phi.cols();
  const Index m = residuals.cols();
  if (n_rows < 1) throw DimensionError("no samples to reduce");
  if (residuals.rows() != n_rows) throw DimensionError("residual rows must match features");
  const Index blocks = block_count(n_rows);
  std::vector<Eigen::VectorXd> partials(static_cast<std::size_t>(blocks));

#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index start = b * kBlockRows;
    const Index len = std::min(kBlockRows, n_rows - start);
    Eigen::VectorXd v(m * p);
    for (Index c = 0; c < m; ++c)
      v.segment(c * p, p).noalias() =
          phi.middleRows(start, len).transpose() * residuals.col(c).segment(start, len);
    partials[static_cast<std::size_t>(b)] = std::move(v);
  }
  return sum_in_order(partials) / static_cast<double>(n_rows);
}

Eigen::MatrixXd kron_rows(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& residuals) {
  const Index n_rows = phi.rows();
  const Index p = phi.cols();
  const Index m = residuals.cols();
  if (residuals.rows() != n_rows) throw DimensionError("residual rows must match features");
  Eigen::MatrixXd out(n_rows, m * p);
  for (Index c = 0; c < m; ++c)
    out.middleCols(c * p, p) = residuals.col(c).asDiagonal() * phi;
  return out;
}

Eigen::VectorXd block_mean(const Eigen::MatrixXd& rows) {
  const Index n_rows = rows.rows();
  if (n_rows < 1) throw DimensionError("no samples to reduce");
  const Index blocks = block_count(n_rows);
  std::vector<Eigen::VectorXd> partials(static_cast<std::size_t>(blocks));

#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index start = b * kBlockRows;
    const Index len = std::min(kBlockRows, n_rows - start);
    partials[static_cast<std::size_t>(b)] = rows.middleRows(start, len).colwise().sum().transpose();
  }
  return sum_in_order(partials) / static_cast<double>(n_rows);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace eflab::kernels
