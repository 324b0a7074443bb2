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
#include "eflab/data_io.hpp"
#include "eflab/diagnostics.hpp"
#include "eflab/error.hpp"
#include "eflab/linalg.hpp"
#include "eflab/optim.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace eflab;
using eflab::test::random_dataset;

namespace {

Dataset fig1_data() {
  SyntheticSpec spec;
  spec.seed = 0;
  return generate(spec);
}

ParamVector point(double a, double b) {
  ParamVector p(2);
  p << a, b;
  return p;
}

}  // namespace

TEST_CASE("linear solves") {
  Eigen::MatrixXd a(2, 2);
  a << 4, 1, 1, 3;
  Eigen::VectorXd b(2);
  b << 1, 2;
  CHECK(((a + 0.5 * Eigen::MatrixXd::Identity(2, 2)) * linalg::solve_damped(a, 0.5, b) - b).norm() < 1e-15);
  Eigen::MatrixXd singular = Eigen::MatrixXd::Ones(2, 2);
  CHECK_THROWS_AS(linalg::solve_damped(singular, 0.0, b), SingularMatrixError);
  CHECK_NOTHROW(linalg::solve_damped(singular, 1e-3, b));
  CHECK(linalg::spectral_norm(a) == doctest::Approx((7 + std::sqrt(5.0)) / 2));
}

TEST_CASE("NGD on a quadratic is one Newton step") {
  std::mt19937_64 rng(21);
  const ModelSpec m = ModelSpec::linear_gaussian();
  const Dataset d = random_dataset(m, 30, 3, rng);
  const ParamVector star = minimize_reference(m, d, ParamVector::Zero(4));
  for (int k = 0; k < 3; ++k) {
    const ParamVector theta0 = test::gaussian_vector(rng, 4, 5.0);
    const ParamVector next = step(Method::NGD, m, d, theta0, 1.0, 0.0);
    CHECK((next - star).norm() < 1e-10);
  }
}

TEST_CASE("GD with a negligible step leaves theta in place") {
  std::mt19937_64 rng(22);
  const ModelSpec m = ModelSpec::logistic();
  const Dataset d = random_dataset(m, 30, 2, rng);
  const ParamVector theta = test::gaussian_vector(rng, 3);
  const double gamma = std::numeric_limits<double>::denorm_min();
  const ParamVector next = step(Method::GD, m, d, theta, gamma, 0.0);
  CHECK((next - theta).norm() <= gamma * gradient(m, d, theta).norm() + 1e-300);
}

TEST_CASE("update directions") {
  std::mt19937_64 rng(23);
  const ModelSpec m = ModelSpec::logistic();
  const Dataset d = random_dataset(m, 40, 2, rng);
  const ParamVector theta = test::gaussian_vector(rng, 3);
  const Eigen::VectorXd g = gradient(m, d, theta);
  CHECK(update_direction(Method::GD, m, d, theta, 0.1) == g);
  const Eigen::MatrixXd f = fisher(m, d, theta).values + 0.1 * Eigen::MatrixXd::Identity(3, 3);
  CHECK((f * update_direction(Method::NGD, m, d, theta, 0.1) - g).norm() < 1e-12);
  const Eigen::MatrixXd ef = empirical_fisher(m, d, theta).values + 0.1 * Eigen::MatrixXd::Identity(3, 3);
  CHECK((ef * update_direction(Method::EFGD, m, d, theta, 0.1) - g).norm() < 1e-12);
  const Eigen::MatrixXd mc = mc_fisher(m, d, theta, 2, 77).values + 0.1 * Eigen::MatrixXd::Identity(3, 3);
  CHECK((mc * update_direction(Method::MCNGD, m, d, theta, 0.1, 77, 2) - g).norm() < 1e-12);
  const VarianceAdaptation va = variance_adaptation(m, d, theta, 0.1);
  CHECK((update_direction(Method::VarAdapted, m, d, theta, 0.1) - va.full_matrix * g).norm() < 1e-12);
}

TEST_CASE("EFGD first step on the two-parameter regression problem") {
  const Dataset d = fig1_data();
  const ModelSpec m = ModelSpec::linear_gaussian();
  const ParamVector start = point(2.0, 4.5);
  const double ngd = update_direction(Method::NGD, m, d, start, 1e-8).norm();
  const double efgd = update_direction(Method::EFGD, m, d, start, 1e-8).norm();
  const double ratio = ngd / efgd;
  CHECK(ratio > 5.0);
  CHECK(ratio == doctest::Approx(6.980001885646586).epsilon(1e-9));
}

TEST_CASE("trajectories") {
  std::mt19937_64 rng(24);
  const ModelSpec m = ModelSpec::linear_gaussian();
  const Dataset d = random_dataset(m, 25, 2, rng);
  OptimizerConfig c;
  c.method = Method::NGD;
  c.step_size = 0.5;
  c.damping = 1e-8;
  c.iterations = 1;
  Trajectory t = run(c, m, d, ParamVector::Zero(3));
  CHECK(t.thetas.size() == 2);
  CHECK(t.losses.size() == 2);
  CHECK(t.steps.size() == 1);
  CHECK_FALSE(t.diverged);

  c.iterations = 20;
  t = run(c, m, d, ParamVector::Zero(3));
  for (std::size_t i = 1; i < t.losses.size(); ++i) CHECK(t.losses[i] <= t.losses[i - 1]);

  c.method = Method::GD;
  c.step_size = 1e8;
  t = run(c, m, d, ParamVector::Zero(3));
  CHECK(t.diverged);
  CHECK(!t.divergence_reason.empty());
  CHECK(t.thetas.size() < 21);

  c.method = Method::MCNGD;
  c.step_size = 0.5;
  c.damping = 1e-3;
  c.seed = 4;
  const Trajectory a = run(c, m, d, ParamVector::Zero(3));
  const Trajectory b = run(c, m, d, ParamVector::Zero(3));
  CHECK(a.losses == b.losses);
  CHECK(step_seed(4, 0) != step_seed(4, 1));

  c.method = Method::VarAdapted;
  c.damping = 1e-6;
  c.step_size = 0.1;
  CHECK_FALSE(run(c, m, d, ParamVector::Zero(3)).diverged);
}

TEST_CASE("config validation") {
  OptimizerConfig c;
  c.step_size = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.step_size = 1;
  c.damping = -1;
  c.method = Method::NGD;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.damping = 0;
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_method("efgd") == Method::EFGD);
  CHECK(to_string(Method::VarAdapted) == "varadapted");
  CHECK_THROWS_AS(parse_method("adam"), ConfigError);
}

TEST_CASE("GD ends farther from the optimum than NGD on the Fig-1 problem") {
  const Dataset d = fig1_data();
  const ModelSpec m = ModelSpec::linear_gaussian();
  const ParamVector star = minimize_reference(m, d, ParamVector::Zero(2));
  OptimizerConfig c;
  c.step_size = 1e-4;
  c.damping = 1e-8;
  c.iterations = 50000;
  c.method = Method::NGD;
  const Trajectory ngd = run(c, m, d, point(2.0, 4.5));
  c.method = Method::GD;
  const Trajectory gd = run(c, m, d, point(2.0, 4.5));
  CHECK((gd.thetas.back() - star).norm() > (ngd.thetas.back() - star).norm());
  CHECK(ngd.final_loss() < ngd.losses.front());
}
