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

#include "eflab/data_io.hpp"
#include "eflab/diagnostics.hpp"
#include "eflab/error.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace eflab;
using eflab::test::random_dataset;

namespace {

Dataset synthetic(Generator g, Variant v, Index n, std::uint64_t seed = 0) {
  SyntheticSpec spec;
  spec.generator = g;
  spec.variant = v;
  spec.n = n;
  spec.seed = seed;
  return generate(spec);
}

}  // namespace

TEST_CASE("direction comparison") {
  std::mt19937_64 rng(30);
  const ModelSpec l = ModelSpec::logistic();
  const Dataset d = random_dataset(l, 40, 2, rng);
  CHECK(direction_comparison(l, d, ParamVector::Zero(3), 0.0).cosine == doctest::Approx(1.0).epsilon(1e-12));

  const ModelSpec one = ModelSpec::linear_gaussian(false);
  const Dataset d1 = random_dataset(one, 15, 1, rng);
  for (double t : {-2.0, 0.3, 5.0}) {
    ParamVector theta(1);
    theta << t;
    CHECK(direction_comparison(one, d1, theta, 0.0).cosine == 1.0);
  }

  const Dataset fig1 = synthetic(Generator::Fig1Lognormal, Variant::Correct, 1000);
  ParamVector start(2);
  start << -0.5, 3.0;
  const DirectionComparison c = direction_comparison(ModelSpec::linear_gaussian(), fig1, start, 0.0);
  CHECK(c.cosine < 1.0);
  CHECK(c.cosine == doctest::Approx(-0.40752690822328108).epsilon(1e-9));
  CHECK_FALSE(c.fallback_used);

  Eigen::MatrixXd x = test::gaussian_matrix(rng, 6, 2);
  const ParamVector t = test::gaussian_vector(rng, 3);
  const Dataset fit = make_regression(x, x * t.head(2) + Eigen::VectorXd::Constant(6, t[2]));
  CHECK_THROWS_AS(direction_comparison(ModelSpec::linear_gaussian(), fit, t, 0.0), NumericalError);
}

TEST_CASE("reference minimizer") {
  std::mt19937_64 rng(31);
  const ModelSpec g = ModelSpec::linear_gaussian();
  const Dataset d = random_dataset(g, 40, 3, rng);
  Eigen::MatrixXd x(40, 4);
  x << d.features, Eigen::VectorXd::Ones(40);
  const Eigen::VectorXd normal = (x.transpose() * x).ldlt().solve(x.transpose() * d.targets);
  CHECK((minimize_reference(g, d, ParamVector::Zero(4)) - normal).norm() < 1e-8);

  Eigen::MatrixXd sep(2, 1);
  sep << -1.0, 1.0;
  const Dataset separable = make_classification(sep, {0, 1}, Task::binary());
  CHECK_THROWS_AS(minimize_reference(ModelSpec::logistic(), separable, ParamVector::Zero(2)),
                  ConvergenceError);

  const Dataset t3 = synthetic(Generator::Table3Classification, Variant::Correct, 1000);
  const ParamVector star = minimize_reference(ModelSpec::logistic(), t3, ParamVector::Zero(3));
  CHECK(gradient(ModelSpec::logistic(), t3, star).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("quadratic fit") {
  std::mt19937_64 rng(32);
  const ModelSpec g = ModelSpec::linear_gaussian();
  const Dataset d = random_dataset(g, 30, 2, rng);
  const ParamVector star = minimize_reference(g, d, ParamVector::Zero(3));
  const QuadraticFitReport exact = quadratic_fit(g, d, star, hessian(g, d, star), 32, 5);
  CHECK(exact.max_model_error < 1e-12);
  CHECK(exact.directions.rows() == 32);
  for (Index k = 0; k < 32; ++k) CHECK(exact.directions.row(k).norm() == doctest::Approx(1.0));
  CHECK_THROWS_AS(quadratic_fit(g, d, star + ParamVector::Ones(3), hessian(g, d, star), 4, 5),
                  ConvergenceError);

  const ModelSpec l = ModelSpec::logistic();
  const Dataset correct = synthetic(Generator::Table3Classification, Variant::Correct, 1000);
  const ParamVector sc = minimize_reference(l, correct, ParamVector::Zero(3));
  CHECK(quadratic_fit(l, correct, sc, fisher(l, correct, sc), 64, 0).max_ratio_error <= 0.2);

  // Variant B moves the EF model well away from the Fisher model, but at
  // N = 1000 the measured discrepancy stays below 1.
  const Dataset wrong = synthetic(Generator::Table3Classification, Variant::B, 1000);
  const ParamVector sw = minimize_reference(l, wrong, ParamVector::Zero(3));
  const double ratio = quadratic_fit(l, wrong, sw, fisher(l, wrong, sw), 64, 0).max_ratio_error;
  CHECK(ratio > 2 * quadratic_fit(l, correct, sc, fisher(l, correct, sc), 64, 0).max_ratio_error);
  CHECK(ratio == doctest::Approx(0.4790401547537207).epsilon(1e-9));
}

TEST_CASE("misspecification gap") {
  const ModelSpec g = ModelSpec::linear_gaussian();
  const Dataset big = synthetic(Generator::Table4Regression, Variant::Correct, 10000);
  CHECK(misspecification_gap(g, big, minimize_reference(g, big, ParamVector::Zero(2))) <= 0.1);

  const Dataset noisy = synthetic(Generator::Table4Regression, Variant::A, 1000);
  CHECK(misspecification_gap(g, noisy, minimize_reference(g, noisy, ParamVector::Zero(2))) >= 1.0);

  std::mt19937_64 rng(33);
  Eigen::MatrixXd x = test::gaussian_matrix(rng, 10, 2);
  const ParamVector t = test::gaussian_vector(rng, 3);
  const Dataset fit = make_regression(x, x * t.head(2) + Eigen::VectorXd::Constant(10, t[2]));
  CHECK(misspecification_gap(g, fit, t) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("classification accuracy") {
  const ModelSpec l = ModelSpec::logistic();
  const Dataset d = synthetic(Generator::Table3Classification, Variant::A, 1000);
  const double acc = classification_accuracy(l, d, minimize_reference(l, d, ParamVector::Zero(3)));
  CHECK(acc >= 0.85);
  CHECK(acc <= 1.0);
}
