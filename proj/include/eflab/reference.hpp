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

// Serial, per-sample textbook implementations. They build each Jacobian
// explicitly and accumulate J^T A J one sample at a time; tests and the
// benchmark compare the parallel kernels against them.

#include "eflab/model.hpp"

namespace eflab::reference {

Eigen::VectorXd gradient(const ModelSpec& model, const Dataset& data, const ParamVector& theta);
Eigen::MatrixXd per_sample_gradients(const ModelSpec& model, const Dataset& data,
                                     const ParamVector& theta);
Eigen::MatrixXd fisher(const ModelSpec& model, const Dataset& data, const ParamVector& theta);
Eigen::MatrixXd empirical_fisher(const ModelSpec& model, const Dataset& data,
                                 const ParamVector& theta);
Eigen::MatrixXd ggn_canonical(const ModelSpec& model, const Dataset& data,
                              const ParamVector& theta);
Eigen::MatrixXd hessian(const ModelSpec& model, const Dataset& data, const ParamVector& theta);

}  // namespace eflab::reference
