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
#include "eflab/error.hpp"
#include "eflab/kernels.hpp"
#include "eflab/linalg.hpp"
#include "eflab/reference.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <omp.h>

using namespace eflab;
using eflab::test::random_dataset;

namespace {

Eigen::MatrixXd augmented(const Dataset& d) {
  Eigen::MatrixXd x(d.size(), d.input_dim() + 1);
  x << d.features, Eigen::VectorXd::Ones(d.size());
  return x;
}

Index input_dim_for(const ModelSpec& m) { return m.kind == ModelKind::ScalarSine ? 1 : 3; }

}  // namespace

TEST_CASE("fisher closed forms") {
  std::mt19937_64 rng(10);
  const ModelSpec g = ModelSpec::linear_gaussian();
  const Dataset d = random_dataset(g, 20, 3, rng);
  const Eigen::MatrixXd x = augmented(d);
  const Eigen::MatrixXd expected = x.transpose() * x / 20.0;
  for (int k = 0; k < 3; ++k)
    CHECK(linalg::max_abs_diff(fisher(g, d, test::gaussian_vector(rng, 4)).values, expected) < 1e-13);

  const ModelSpec l = ModelSpec::logistic();
  const Dataset dl = random_dataset(l, 20, 3, rng);
  const Eigen::MatrixXd xl = augmented(dl);
  const Eigen::MatrixXd quarter = xl.transpose() * xl / (4.0 * 20.0);
  CHECK(linalg::max_abs_diff(fisher(l, dl, ParamVector::Zero(4)).values, quarter) < 1e-14);
  CHECK(linalg::max_abs_diff(empirical_fisher(l, dl, ParamVector::Zero(4)).values, quarter) < 1e-14);
  const Eigen::MatrixXd h = hessian(l, dl, ParamVector::Zero(4)).values;
  CHECK(linalg::max_abs_diff(h, quarter) < 1e-14);
  CHECK(linalg::min_eigenvalue(h) >= -1e-14);
}

TEST_CASE("empirical fisher examples") {
  Eigen::MatrixXd x(1, 1);
  x << 2.0;
  Eigen::VectorXd y(1);
  y << 0.0;
  ParamVector theta(1);
  theta << 1.5;  // residual f - y = 3
  const auto ef = empirical_fisher(ModelSpec::linear_gaussian(false), make_regression(x, y), theta);
  REQUIRE(ef.dim() == 1);
  CHECK(ef.values(0, 0) == 36.0);

  std::mt19937_64 rng(11);
  Eigen::MatrixXd xs = test::gaussian_matrix(rng, 8, 2);
  const ParamVector t = test::gaussian_vector(rng, 3);
  const Dataset fit = make_regression(xs, xs * t.head(2) + Eigen::VectorXd::Constant(8, t[2]));
  CHECK(empirical_fisher(ModelSpec::linear_gaussian(), fit, t).values.norm() < 1e-26);
}

TEST_CASE("parallel kernels agree with the serial reference") {
  std::mt19937_64 rng(12);
  for (const ModelSpec& m : test::all_models()) {
    CAPTURE(m.name());
    const Dataset d = random_dataset(m, 700, input_dim_for(m), rng);
    const ParamVector theta = test::gaussian_vector(rng, m.param_dim(d.input_dim()));
    CHECK(test::rel_error(fisher(m, d, theta).values, reference::fisher(m, d, theta)) < 1e-13);
    CHECK(test::rel_error(empirical_fisher(m, d, theta).values,
                          reference::empirical_fisher(m, d, theta)) < 1e-13);
    CHECK(test::rel_error(ggn(m, d, theta, SplitId::Canonical).values,
                          reference::ggn_canonical(m, d, theta)) < 1e-13);
    CHECK(test::rel_error(hessian(m, d, theta).values, reference::hessian(m, d, theta)) < 1e-12);
    CHECK(linalg::is_symmetric(fisher(m, d, theta).values, 0.0));
  }
}

TEST_CASE("results do not depend on the thread count") {
  std::mt19937_64 rng(13);
  const ModelSpec m = ModelSpec::softmax(3);
  const Dataset d = random_dataset(m, 1500, 4, rng);
  const ParamVector theta = test::gaussian_vector(rng, 15);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Eigen::MatrixXd f1 = fisher(m, d, theta).values;
  const Eigen::MatrixXd e1 = empirical_fisher(m, d, theta).values;
  const Eigen::MatrixXd mc1 = mc_fisher(m, d, theta, 3, 5).values;
  const Eigen::VectorXd g1 = gradient(m, d, theta);
  omp_set_num_threads(4);
  CHECK(fisher(m, d, theta).values == f1);
  CHECK(empirical_fisher(m, d, theta).values == e1);
  CHECK(mc_fisher(m, d, theta, 3, 5).values == mc1);
  CHECK(gradient(m, d, theta) == g1);
  omp_set_num_threads(saved);
}

TEST_CASE("ggn splits") {
  std::mt19937_64 rng(14);
  for (const ModelSpec& m : test::all_models()) {
    CAPTURE(m.name());
    const Dataset d = random_dataset(m, 9, input_dim_for(m), rng);
    const ParamVector theta = test::gaussian_vector(rng, m.param_dim(d.input_dim()));
    CHECK(linalg::max_abs_diff(ggn(m, d, theta, SplitId::Canonical).values, fisher(m, d, theta).values) <
          1e-12);
    CHECK(linalg::max_abs_diff(ggn(m, d, theta, SplitId::EFSplit).values,
                               empirical_fisher(m, d, theta).values) < 1e-12);
  }
  const ModelSpec sine = ModelSpec::scalar_sine();
  const Dataset d = random_dataset(sine, 15, 1, rng);
  const ParamVector theta = test::gaussian_vector(rng, 1);
  CHECK(linalg::max_abs_diff(ggn(sine, d, theta, SplitId::Trivial).values, hessian(sine, d, theta).values) <
        1e-10);
  const auto c = ggn(sine, d, theta, SplitId::Trivial);
  CHECK(c.split == SplitId::Trivial);
  CHECK(c.kind == CurvatureKind::GGN);
}

TEST_CASE("hessian") {
  std::mt19937_64 rng(15);
  const ModelSpec g = ModelSpec::linear_gaussian();
  const Dataset d = random_dataset(g, 12, 3, rng);
  const ParamVector t = test::gaussian_vector(rng, 4);
  CHECK(hessian(g, d, t).values == fisher(g, d, t).values);

  for (const ModelSpec& m : test::all_models()) {
    CAPTURE(m.name());
    const Dataset dm = random_dataset(m, 7, input_dim_for(m), rng);
    const ParamVector theta = test::gaussian_vector(rng, m.param_dim(dm.input_dim()));
    const Eigen::MatrixXd fd = test::fd_jacobian(
        [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return gradient(m, dm, x); }, theta, 1e-5);
    const Eigen::MatrixXd h = hessian(m, dm, theta).values;
    CHECK((h - fd).norm() <= 1e-4 * std::max(1.0, h.norm()));
  }
}

TEST_CASE("monte carlo fisher") {
  std::mt19937_64 rng(16);
  const ModelSpec l = ModelSpec::logistic();
  const Dataset d = random_dataset(l, 10, 2, rng);
  const ParamVector theta = test::gaussian_vector(rng, 3);
  const Eigen::MatrixXd f = fisher(l, d, theta).values;
  const auto mc = mc_fisher(l, d, theta, 100000, 17);
  CHECK((mc.values - f).norm() / f.norm() < 0.02);
  CHECK(mc.num_samples == 100000);
  CHECK(mc.seed == 17);

  const ModelSpec sm = ModelSpec::softmax(3);
  const Dataset ds = random_dataset(sm, 5, 2, rng);
  const ParamVector ts = test::gaussian_vector(rng, 9);
  const Eigen::MatrixXd fs = fisher(sm, ds, ts).values;
  CHECK((mc_fisher(sm, ds, ts, 1000000, 3).values - fs).norm() / fs.norm() < 0.01);

  CHECK(mc_fisher(l, d, theta, 1, 9).values == mc_fisher(l, d, theta, 1, 9).values);
  CHECK_THROWS_AS(mc_fisher(l, d, theta, 0, 9), ConfigError);

  const ModelSpec g = ModelSpec::linear_gaussian();
  const Dataset dg = random_dataset(g, 10, 2, rng);
  CHECK(mc_fisher(g, dg, test::gaussian_vector(rng, 3), 4, 1, LabelSampling::Argmax).values.norm() == 0.0);
}

TEST_CASE("ggn error bound") {
  std::mt19937_64 rng(18);
  for (const ModelSpec& m : {ModelSpec::linear_gaussian(), ModelSpec::logistic()}) {
    const Dataset d = random_dataset(m, 10, 2, rng);
    const GgnBound b = ggn_error_bound(m, d, test::gaussian_vector(rng, 3));
    CHECK(b.gap_norm == 0.0);
    CHECK(b.beta == 0.0);
    CHECK(b.squared_bound_holds);
  }
  const ModelSpec sine = ModelSpec::scalar_sine();
  Eigen::MatrixXd x = test::gaussian_matrix(rng, 12, 1);
  ParamVector theta(1);
  theta << 0.8;
  Eigen::VectorXd y = (theta[0] * x.col(0)).array().sin();
  const GgnBound perfect = ggn_error_bound(sine, make_regression(x, y), theta);
  CHECK(perfect.residual < 1e-14);
  CHECK(perfect.gap_norm < 1e-12);

  const Dataset d = random_dataset(sine, 12, 1, rng);
  const GgnBound b = ggn_error_bound(sine, d, theta);
  CHECK(b.norm_bound_holds);
  CHECK(b.gap_norm <= b.rhs);
  CHECK(b.gap_squared == doctest::Approx(b.gap_norm * b.gap_norm));
  CHECK(b.beta == smoothness_constant(sine, d));
}

TEST_CASE("split validity") {
  const auto ef = check_split_validity(SplitId::EFSplit, ModelSpec::linear_gaussian());
  CHECK(ef.verdict == SplitVerdict::Invalid);
  CHECK_FALSE(ef.attains_zero_gradient);

  const auto canonical = check_split_validity(SplitId::Canonical, ModelSpec::linear_gaussian());
  CHECK(canonical.verdict == SplitVerdict::Valid);
  CHECK(canonical.witness == "b* = y_n");

  const auto soft = check_split_validity(SplitId::Canonical, ModelSpec::softmax(3));
  CHECK(soft.verdict == SplitVerdict::ValidInClosure);
  CHECK_FALSE(soft.attains_zero_gradient);

  CHECK(ef.to_text() == check_split_validity(SplitId::EFSplit, ModelSpec::linear_gaussian()).to_text());
  CHECK(ef.to_text().find("verdict: invalid\n") != std::string::npos);
  CHECK_THROWS_AS(parse_split("bogus"), ConfigError);
}

TEST_CASE("variance adaptation") {
  std::mt19937_64 rng(19);
  const ModelSpec g = ModelSpec::linear_gaussian();
  const Dataset d = random_dataset(g, 50, 3, rng);
  const ParamVector theta = test::gaussian_vector(rng, 4);
  const VarianceAdaptation va = variance_adaptation(g, d, theta, 0.0);
  CHECK(va.decomposition_residual <= 1e-8);
  // independent covariance of g_n = N * per-sample gradient
  const Eigen::MatrixXd rows = 50.0 * per_sample_gradients(g, d, theta);
  const Eigen::VectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean.transpose();
  const Eigen::MatrixXd sigma = centered.transpose() * centered / 50.0;
  CHECK(test::rel_error(va.noise_covariance, sigma) < 1e-12);
  CHECK((va.second_moment - sigma - mean * mean.transpose()).norm() <= 1e-8 * va.second_moment.norm());
  CHECK((va.diagonal.array() >= 0).all());
  CHECK((va.diagonal.array() <= 1).all());

  // identical per-sample gradients: no noise
  Eigen::MatrixXd x1 = Eigen::MatrixXd::Constant(6, 1, 1.5);
  const Dataset same = make_regression(x1, Eigen::VectorXd::Constant(6, 2.0));
  ParamVector t1(1);
  t1 << 0.25;
  const VarianceAdaptation clean = variance_adaptation(ModelSpec::linear_gaussian(false), same, t1, 0.0);
  CHECK(clean.diagonal[0] == 1.0);
  CHECK(clean.full_matrix(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  // zero mean gradient on the first coordinate but nonzero noise
  Eigen::MatrixXd x2(4, 1);
  x2 << 1, -1, 2, -2;
  const Dataset sym = make_regression(x2, Eigen::VectorXd::Constant(4, 1.0));
  const VarianceAdaptation pure = variance_adaptation(ModelSpec::linear_gaussian(false), sym,
                                                      ParamVector::Zero(1), 0.0);
  CHECK(pure.gradient_sum[0] == 0.0);
  CHECK(pure.noise_covariance(0, 0) > 0.0);
  CHECK(pure.diagonal[0] == 0.0);
}

TEST_CASE("kernels") {
  std::mt19937_64 rng(20);
  const Eigen::MatrixXd phi = test::gaussian_matrix(rng, 600, 3);
  const Eigen::MatrixXd r = test::gaussian_matrix(rng, 600, 2);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(6);
  for (Index n = 0; n < 600; ++n)
    for (Index c = 0; c < 2; ++c) expected.segment(c * 3, 3) += r(n, c) * phi.row(n).transpose();
  expected /= 600.0;
  CHECK((kernels::kron_mean(phi, r) - expected).norm() < 1e-14);
  CHECK((kernels::block_mean(kernels::kron_rows(phi, r)) - expected).norm() < 1e-14);
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(600, 1);
  CHECK(test::rel_error(kernels::kron_gram(phi, ones, 1), phi.transpose() * phi / 600.0) < 1e-14);
}
