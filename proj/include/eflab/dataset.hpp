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

#include <string>
#include <vector>

namespace eflab {

using Index = Eigen::Index;

enum class TaskKind { Regression, Binary, Multiclass };

struct Task {
  TaskKind kind = TaskKind::Regression;
  int num_classes = 0;  // 2 for Binary, C for Multiclass, 0 for Regression

  static Task regression() { return {TaskKind::Regression, 0}; }
  static Task binary() { return {TaskKind::Binary, 2}; }
  static Task multiclass(int classes) { return {TaskKind::Multiclass, classes}; }

  bool is_classification() const { return kind != TaskKind::Regression; }
  std::string name() const;

  friend bool operator==(const Task&, const Task&) = default;
};

/// Dense design matrix plus targets. Regression targets live in `targets`,
/// class labels in `labels` (values 0..C-1); the unused one is empty.
struct Dataset {
  Eigen::MatrixXd features;  // N x D_in
  Eigen::VectorXd targets;
  std::vector<int> labels;
  Task task;

  Index size() const { return features.rows(); }
  Index input_dim() const { return features.cols(); }

  // Regression value or class label as a real number.
  double target(Index n) const {
    return task.is_classification() ? static_cast<double>(labels[static_cast<std::size_t>(n)])
                                    : targets[n];
  }

  /// Throws DimensionError when N < 1, D_in < 1, a feature is non-finite, a
  /// label is out of range, or the target container does not match the task.
  void validate() const;

  /// Same features, new targets. `values` are class labels for classification.
  Dataset with_targets(const Eigen::VectorXd& values) const;

  friend bool operator==(const Dataset& a, const Dataset& b);
};

Dataset make_regression(Eigen::MatrixXd features, Eigen::VectorXd targets);
Dataset make_classification(Eigen::MatrixXd features, std::vector<int> labels, Task task);

}  // namespace eflab
