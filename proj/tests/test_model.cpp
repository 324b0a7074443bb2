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

#include "eflab/error.hpp"
#include "eflab/likelihood.hpp"
#include "eflab/model.hpp"
#include "eflab/reference.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace eflab;
using eflab::test::fd_gradient;
using eflab::test::fd_jacobian;
using eflab::test::random_dataset;

TEST_CASE("logistic loss at theta = 0 is log 2") {
  std::mt19937_64 rng(1);
  const ModelSpec m = ModelSpec::logistic();
  const Dataset d = random_dataset(m, 17, 4, rng);
  CHECK(loss(m, d, ParamVector::Zero(5)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("gaussian loss examples") {
  const ModelSpec nobias = ModelSpec::linear_gaussian(false);
  Eigen::MatrixXd x(1, 1);
  x << 2.0;
  Eigen::VectorXd y(1);
  y << 1.0;
  ParamVector theta(1);
  theta << 1.0;
  CHECK(loss(nobias, make_regression(x, y), theta) == 0.5);

  std::mt19937_64 rng(2);
  const ModelSpec m = ModelSpec::linear_gaussian();
  Eigen::MatrixXd xs = test::gaussian_matrix(rng, 9, 3);
  ParamVector t = test::gaussian_vector(rng, 4);
  const Dataset fit = make_regression(xs, xs * t.head(3) + Eigen::VectorXd::Constant(9, t[3]));
  CHECK(loss(m, fit, t) < 1e-28);
  CHECK(gradient(m, fit, t).norm() < 1e-14);
  CHECK(per_sample_gradients(m, fit, t).norm() < 1e-13);
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 rng(3);
  for (const ModelSpec& m : test::all_models()) {
    CAPTURE(m.name());
    const Dataset d = random_dataset(m, 3, m.kind == ModelKind::ScalarSine ? 1 : 2, rng);
    const Index dim = m.param_dim(d.input_dim());
    const ParamVector theta = test::gaussian_vector(rng, dim);
    const Eigen::VectorXd fd =
        fd_gradient([&](const Eigen::VectorXd& t) { return loss(m, d, t); }, theta);
    CHECK((gradient(m, d, theta) - fd).lpNorm<Eigen::Infinity>() < 1e-5);
    CHECK((reference::gradient(m, d, theta) - gradient(m, d, theta)).norm() < 1e-13);
  }
}

TEST_CASE("logistic gradient at zero") {
  std::mt19937_64 rng(4);
  const ModelSpec m = ModelSpec::logistic();
  const Dataset d = random_dataset(m, 12, 3, rng);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(4);
  for (Index n = 0; n < d.size(); ++n) {
    Eigen::VectorXd xt(4);
    xt << d.features.row(n).transpose(), 1.0;
    expected += (0.5 - d.target(n)) * xt;
  }
  expected /= static_cast<double>(d.size());
  CHECK((gradient(m, d, ParamVector::Zero(4)) - expected).norm() < 1e-15);
}

TEST_CASE("per-sample gradients") {
  std::mt19937_64 rng(5);
  for (const ModelSpec& m : test::all_models()) {
    CAPTURE(m.name());
    const Dataset d = random_dataset(m, 6, m.kind == ModelKind::ScalarSine ? 1 : 3, rng);
    const ParamVector theta = test::gaussian_vector(rng, m.param_dim(d.input_dim()));
    const Eigen::MatrixXd g = per_sample_gradients(m, d, theta);
    CHECK((g.colwise().mean().transpose() - gradient(m, d, theta)).norm() < 1e-14);
    CHECK((g - reference::per_sample_gradients(m, d, theta)).norm() < 1e-13);
    for (Index n = 0; n < d.size(); ++n) {
      const auto f = [&](const Eigen::VectorXd& t) { return sample_losses(m, d, t)[n]; };
      CHECK((g.row(n).transpose() - fd_gradient(f, theta)).lpNorm<Eigen::Infinity>() < 1e-5);
    }
  }

  const ModelSpec m = ModelSpec::logistic();
  const Dataset one = random_dataset(m, 1, 2, rng);
  const ParamVector theta = test::gaussian_vector(rng, 3);
  CHECK((per_sample_gradients(m, one, theta).row(0).transpose() - gradient(m, one, theta)).norm() ==
        0.0);
}

TEST_CASE("output Jacobian") {
  ModelSpec m = ModelSpec::linear_gaussian();
  Eigen::MatrixXd x(1, 2);
  x << 3.0, -1.0;
  const Dataset d = make_regression(x, Eigen::VectorXd::Zero(1));
  for (double v : {0.0, 1.7, -4.0}) {
    const auto j = output_jacobian(m, d, ParamVector::Constant(3, v));
    REQUIRE(j.size() == 1);
    CHECK(j[0].rows() == 1);
    CHECK(j[0](0, 0) == 3.0);
    CHECK(j[0](0, 1) == -1.0);
    CHECK(j[0](0, 2) == 1.0);
  }

  Eigen::MatrixXd x1(1, 1);
  x1 << 2.0;
  const auto js = output_jacobian(ModelSpec::scalar_sine(), make_regression(x1, Eigen::VectorXd::Zero(1)),
                                  ParamVector::Zero(1));
  CHECK(js[0](0, 0) == 2.0);

  std::mt19937_64 rng(6);
  const ModelSpec sm = ModelSpec::softmax(3);
  const Dataset sd = random_dataset(sm, 4, 2, rng);
  const ParamVector theta = test::gaussian_vector(rng, 9);
  const auto jac = output_jacobian(sm, sd, theta);
  for (Index n = 0; n < sd.size(); ++n) {
    const auto f = [&](const Eigen::VectorXd& t) -> Eigen::VectorXd {
      return outputs(sm, sd, t).row(n).transpose();
    };
    CHECK((jac[static_cast<std::size_t>(n)] - fd_jacobian(f, theta)).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("sampling from the likelihood") {
  const ModelSpec logistic = ModelSpec::logistic();
  Eigen::VectorXd f0 = Eigen::VectorXd::Zero(1);
  std::mt19937_64 rng(7);
  const int draws = 100000;
  double ones = 0;
  for (int i = 0; i < draws; ++i) ones += likelihood::draw(logistic, f0, rng);
  CHECK(std::abs(ones / draws - 0.5) <= 0.01);

  const ModelSpec sm = ModelSpec::softmax(3);
  Eigen::VectorXd logits(3);
  logits << 0.0, 50.0, 0.0;
  int hits = 0;
  for (int i = 0; i < draws; ++i) hits += likelihood::draw(sm, logits, rng) == 1.0;
  CHECK(hits >= 0.999 * draws);

  const ModelSpec gauss = ModelSpec::linear_gaussian();
  Eigen::VectorXd f(1);
  f << 1.25;
  double sum = 0;
  for (int i = 0; i < draws; ++i) sum += likelihood::draw(gauss, f, rng);
  CHECK(std::abs(sum / draws - 1.25) <= 0.02);
}

TEST_CASE("sample_model_outputs is reproducible") {
  std::mt19937_64 rng(8);
  const ModelSpec m = ModelSpec::softmax(4);
  const Dataset d = random_dataset(m, 300, 2, rng);
  const ParamVector theta = test::gaussian_vector(rng, 12);
  CHECK(sample_model_outputs(m, d, theta, 11) == sample_model_outputs(m, d, theta, 11));
  CHECK(!(sample_model_outputs(m, d, theta, 11) == sample_model_outputs(m, d, theta, 12)));
}

TEST_CASE("likelihood helpers are stable") {
  CHECK(likelihood::softplus(800.0) == 800.0);
  CHECK(likelihood::softplus(-800.0) >= 0.0);
  CHECK(likelihood::sigmoid(-800.0) >= 0.0);
  Eigen::VectorXd big(2);
  big << 1000.0, 1000.0;
  CHECK(likelihood::log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(likelihood::softmax(big).sum() == doctest::Approx(1.0));
}

TEST_CASE("model checks") {
  std::mt19937_64 rng(9);
  const Dataset reg = random_dataset(ModelSpec::linear_gaussian(), 5, 2, rng);
  CHECK_THROWS_AS(ModelSpec::logistic().check(reg), ConfigError);
  CHECK_THROWS_AS(ModelSpec::scalar_sine().check(reg), ConfigError);
  CHECK_THROWS_AS(parse_model("perceptron"), ConfigError);
  CHECK_THROWS_AS(loss(ModelSpec::linear_gaussian(), reg, ParamVector::Zero(2)), DimensionError);
}
