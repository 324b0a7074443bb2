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
#include "eflab/dataset.hpp"
#include "eflab/reference.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace eflab;

namespace {

struct Problem {
  ModelSpec model;
  Dataset data;
  ParamVector theta;
};

Problem make_problem(Index n, Index d_in) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(n, d_in);
  for (Index j = 0; j < d_in; ++j)
    for (Index i = 0; i < n; ++i) x(i, j) = z(rng);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (auto& l : labels) l = static_cast<int>(rng() % 5);
  Problem p{ModelSpec::softmax(5), make_classification(x, labels, Task::multiclass(5)), {}};
  p.theta = ParamVector::Zero(p.model.param_dim(d_in));
  for (Index i = 0; i < p.theta.size(); ++i) p.theta[i] = 0.1 * z(rng);
  return p;
}

template <typename F>
void run(benchmark::State& state, F f) {
  const Problem p = make_problem(state.range(0), 20);
  for (auto _ : state) benchmark::DoNotOptimize(f(p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FisherKernel(benchmark::State& s) {
  run(s, [](const Problem& p) { return fisher(p.model, p.data, p.theta).values; });
}
void BM_FisherReference(benchmark::State& s) {
  run(s, [](const Problem& p) { return reference::fisher(p.model, p.data, p.theta); });
}
void BM_EmpiricalFisherKernel(benchmark::State& s) {
  run(s, [](const Problem& p) { return empirical_fisher(p.model, p.data, p.theta).values; });
}
void BM_EmpiricalFisherReference(benchmark::State& s) {
  run(s, [](const Problem& p) { return reference::empirical_fisher(p.model, p.data, p.theta); });
}
void BM_HessianKernel(benchmark::State& s) {
  run(s, [](const Problem& p) { return hessian(p.model, p.data, p.theta).values; });
}
void BM_HessianReference(benchmark::State& s) {
  run(s, [](const Problem& p) { return reference::hessian(p.model, p.data, p.theta); });
}

}  // namespace

BENCHMARK(BM_FisherKernel)->Arg(1000)->Arg(10000)->UseRealTime();
BENCHMARK(BM_FisherReference)->Arg(1000)->Arg(10000)->UseRealTime();
BENCHMARK(BM_EmpiricalFisherKernel)->Arg(1000)->Arg(10000)->UseRealTime();
BENCHMARK(BM_EmpiricalFisherReference)->Arg(1000)->Arg(10000)->UseRealTime();
BENCHMARK(BM_HessianKernel)->Arg(1000)->Arg(10000)->UseRealTime();
BENCHMARK(BM_HessianReference)->Arg(1000)->Arg(10000)->UseRealTime();

BENCHMARK_MAIN();
