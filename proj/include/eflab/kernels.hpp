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

// OpenMP reductions over samples. Rows are cut into fixed blocks of
// kBlockRows; blocks are reduced in parallel and their partial results summed
// in block order, so output is identical for any thread count.

#include <Eigen/Dense>

namespace eflab::kernels {

using Index = Eigen::Index;

inline constexpr Index kBlockRows = 256;

/// (1/N) sum_n W_n (x) phi_n phi_n^T, where row n of `weights` holds the
/// symmetric M x M matrix W_n in column-major order. Result is (M P) x (M P).
Eigen::MatrixXd kron_gram(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& weights, Index M);

/// (1/N) sum_n r_n (x) phi_n for the N x M residual matrix.
Eigen::VectorXd kron_mean(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& residuals);

/// Row n is r_n (x) phi_n (un-averaged).
Eigen::MatrixXd kron_rows(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& residuals);

/// (1/N) sum_n v_n, v_n the rows of `rows`, reduced in the same block order.
Eigen::VectorXd block_mean(const Eigen::MatrixXd& rows);

int max_threads();

}  // namespace eflab::kernels
