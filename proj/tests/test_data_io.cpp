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
#include "eflab/error.hpp"
#include "eflab/output.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace eflab;

namespace {

const std::filesystem::path kFixtures = EFLAB_FIXTURES;

std::string parse_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.what();
  }
  return "no error";
}

std::string libsvm_error(const std::string& file) {
  return parse_error([&] { load_libsvm(kFixtures / "libsvm" / file); });
}

std::string csv_error(const std::string& file, const std::string& target = "y") {
  return parse_error([&] { load_csv(kFixtures / "csv" / file, target, Task::regression()); });
}

Dataset from_text(const std::string& text, const LibsvmOptions& options = {}) {
  std::istringstream in(text);
  return parse_libsvm(in, options);
}

}  // namespace

TEST_CASE("libsvm examples") {
  const Dataset a = from_text("1 1:0.5 3:-1.2\n");
  REQUIRE(a.size() == 1);
  REQUIRE(a.input_dim() == 3);
  CHECK(a.features(0, 0) == 0.5);
  CHECK(a.features(0, 1) == 0.0);
  CHECK(a.features(0, 2) == -1.2);
  CHECK(a.target(0) == 1.0);

  const Dataset b = from_text("-1 2:3\n+1 1:1\n");
  REQUIRE(b.size() == 2);
  CHECK(b.task == Task::binary());
  CHECK(b.labels == std::vector<int>{0, 1});
  Eigen::MatrixXd expected(2, 2);
  expected << 0, 3, 1, 0;
  CHECK(b.features == expected);

  CHECK(parse_error([] { from_text("1 3:1 2:1\n"); }) == "non-increasing feature index at line 1");

  const Dataset multi = from_text("3 1:1\n7 1:2\n5 1:3\n");
  CHECK(multi.task == Task::multiclass(3));
  CHECK(multi.labels == std::vector<int>{0, 2, 1});

  const Dataset reg = from_text("0.25 1:1\n-3.5 2:1\n");
  CHECK(reg.task == Task::regression());
  CHECK(reg.targets[1] == -3.5);

  LibsvmOptions wide;
  wide.num_features = 5;
  CHECK(from_text("1 2:1\n", wide).input_dim() == 5);
}

TEST_CASE("libsvm fixtures") {
  const Dataset valid = load_libsvm(kFixtures / "libsvm" / "valid.libsvm");
  CHECK(valid.size() == 4);
  CHECK(valid.input_dim() == 3);
  CHECK(valid.labels == std::vector<int>{1, 0, 1, 0});
  CHECK(valid.features(2, 2) == 1e-3);

  CHECK(libsvm_error("bad_label.libsvm") == "non-numeric label at line 3");
  CHECK(libsvm_error("missing_colon.libsvm") == "missing ':' in feature at line 2");
  CHECK(libsvm_error("bad_index.libsvm") == "non-numeric feature index at line 4");
  CHECK(libsvm_error("zero_index.libsvm") == "feature index < 1 at line 1");
  CHECK(libsvm_error("non_increasing.libsvm") == "non-increasing feature index at line 2");
  CHECK(libsvm_error("bad_value.libsvm") == "non-numeric feature value at line 5");

  CHECK(parse_error([] { from_text("1 1:nan\n"); }) == "non-finite feature value at line 1");
  CHECK(parse_error([] { from_text("# nothing\n\n"); }) == "no samples at line 2");
  CHECK_THROWS_AS(load_libsvm(kFixtures / "libsvm" / "absent.libsvm"), ConfigError);
}

TEST_CASE("csv examples") {
  std::istringstream in("x,y\n1,2\n3,4\n");
  const Dataset d = parse_csv(in, "y", Task::regression());
  REQUIRE(d.size() == 2);
  REQUIRE(d.input_dim() == 1);
  CHECK(d.features(0, 0) == 1.0);
  CHECK(d.features(1, 0) == 3.0);
  CHECK(d.targets[0] == 2.0);
  CHECK(d.targets[1] == 4.0);

  std::istringstream bad("x,y\n1,2\n");
  CHECK(parse_error([&] { parse_csv(bad, "z", Task::regression()); }) ==
        "missing target column 'z'; available columns: x, y at line 1");

  std::mt19937_64 rng(40);
  const Eigen::MatrixXd values = test::gaussian_matrix(rng, 506, 14);
  std::vector<std::string> cols;
  for (int j = 0; j < 13; ++j) cols.push_back("f" + std::to_string(j));
  cols.push_back("medv");
  Table t(cols);
  for (Index i = 0; i < 506; ++i) {
    const Eigen::RowVectorXd row = values.row(i);
    t.add(std::vector<double>(row.data(), row.data() + row.size()));
  }
  std::istringstream shaped(t.to_csv());
  const Dataset boston = parse_csv(shaped, "medv", Task::regression());
  CHECK(boston.size() == 506);
  CHECK(boston.input_dim() == 13);
  CHECK(boston.features == values.leftCols(13));
  CHECK(boston.targets == values.col(13));
}

TEST_CASE("csv fixtures") {
  const Dataset valid = load_csv(kFixtures / "csv" / "valid.csv", "y", Task::regression());
  CHECK(valid.size() == 3);
  CHECK(valid.input_dim() == 2);
  CHECK(valid.targets[2] == 100.0);

  CHECK(csv_error("empty.csv") == "missing header row at line 1");
  CHECK(csv_error("duplicate.csv") == "duplicate column name 'x' at line 1");
  CHECK(csv_error("ragged.csv") == "ragged row: expected 3 fields, got 2 at line 3");
  CHECK(csv_error("non_numeric.csv") == "non-numeric cell 'eight' in column 'x2' at line 4");
  CHECK(csv_error("empty_name.csv") == "empty column name at line 1");
  CHECK(csv_error("missing_target.csv") ==
        "missing target column 'y'; available columns: a, b, c at line 1");
}

TEST_CASE("round trips of random datasets") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> size(1, 40);
  std::uniform_int_distribution<int> dims(1, 8);
  std::bernoulli_distribution sparse(0.3);
  for (int k = 0; k < 100; ++k) {
    const Index n = size(rng);
    const Index d = dims(rng);
    Eigen::MatrixXd x = test::gaussian_matrix(rng, n, d, std::pow(10.0, k % 7 - 3));
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j)
        if (sparse(rng)) x(i, j) = 0.0;
    Dataset data;
    switch (k % 3) {
      case 0:
        data = make_regression(x, test::gaussian_vector(rng, n, 1e3));
        break;
      case 1: {
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (auto& l : labels) l = static_cast<int>(rng() % 2);
        data = make_classification(x, labels, Task::binary());
        break;
      }
      default: {
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (auto& l : labels) l = static_cast<int>(rng() % 4);
        data = make_classification(x, labels, Task::multiclass(4));
      }
    }
    CAPTURE(k);
    std::ostringstream out;
    write_libsvm(out, data);
    std::istringstream in(out.str());
    CHECK(parse_libsvm(in) == data);

    if (data.task.kind == TaskKind::Regression) {
      std::vector<std::string> cols;
      for (Index j = 0; j < d; ++j) cols.push_back("x" + std::to_string(j));
      cols.push_back("target");
      Table t(cols);
      for (Index i = 0; i < n; ++i) {
        std::vector<double> row;
        for (Index j = 0; j < d; ++j) row.push_back(x(i, j));
        row.push_back(data.targets[i]);
        t.add(row);
      }
      std::istringstream csv(t.to_csv());
      CHECK(parse_csv(csv, "target", Task::regression()) == data);
    }
  }
}

TEST_CASE("format_double is shortest round trip") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(std::normal_distribution<double>()(rng), static_cast<int>(rng() % 200) - 100);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("synthetic generators") {
  SyntheticSpec spec;
  spec.n = 100000;
  spec.seed = 3;
  const Dataset fig1 = generate(spec);
  const double expected = 2 + 2 * std::exp(0.75 * 0.75 / 2);
  CHECK(std::abs(fig1.targets.mean() - expected) <= 0.02 * expected);
  CHECK(generate(spec) == fig1);

  spec.generator = Generator::Table3Classification;
  const Dataset t3 = generate(spec);
  Eigen::Vector2d mean[2] = {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
  double count[2] = {0, 0};
  for (Index i = 0; i < t3.size(); ++i) {
    const int y = t3.labels[static_cast<std::size_t>(i)];
    mean[y] += t3.features.row(i).transpose();
    count[y] += 1;
  }
  CHECK(std::abs(count[0] / 100000 - 0.5) < 0.01);
  const Eigen::Vector2d m0 = mean[0] / count[0];
  const Eigen::Vector2d m1 = mean[1] / count[1];
  CHECK((m0 - Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() <= 0.05);
  CHECK((m1 - Eigen::Vector2d(-1, -1)).cwiseAbs().maxCoeff() <= 0.05);

  spec.generator = Generator::Table4Regression;
  spec.variant = Variant::B;
  const Dataset t4 = generate(spec);
  Eigen::MatrixXd x(t4.size(), 2);
  x << t4.features, Eigen::VectorXd::Ones(t4.size());
  const Eigen::VectorXd coef = (x.transpose() * x).ldlt().solve(x.transpose() * t4.targets);
  const Eigen::VectorXd resid = t4.targets - x * coef;
  const Eigen::VectorXd sq = t4.features.col(0).array().square();
  const Eigen::VectorXd a = resid.array() - resid.mean();
  const Eigen::VectorXd b = sq.array() - sq.mean();
  CHECK(a.dot(b) / (a.norm() * b.norm()) >= 0.3);

  CHECK(parse_generator("table4_regression") == Generator::Table4Regression);
  CHECK_THROWS_AS(parse_variant("C"), ConfigError);
}

TEST_CASE("standardize") {
  std::mt19937_64 rng(43);
  Eigen::MatrixXd x = test::gaussian_matrix(rng, 100, 5, 3.0);
  x.col(2).array() += 7.0;
  const Dataset d = make_regression(x, test::gaussian_vector(rng, 100));
  const auto [s, report] = standardize(d);
  for (Index j = 0; j < 5; ++j) {
    const double mean = s.features.col(j).mean();
    const double var = (s.features.col(j).array() - mean).square().mean();
    CHECK(std::abs(mean) <= 1e-12);
    CHECK(var >= 1 - 1e-9);
    CHECK(var <= 1 + 1e-9);
  }
  CHECK(s.targets == d.targets);

  const auto again = standardize(s).first;
  CHECK((again.features - s.features).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::MatrixXd c = x;
  c.col(1).setConstant(4.0);
  const auto [sc, rc] = standardize(make_regression(c, d.targets));
  CHECK(rc.zero_variance[1]);
  CHECK_FALSE(rc.zero_variance[0]);
  CHECK(sc.features.col(1) == c.col(1));
}
