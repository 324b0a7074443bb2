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

#include "eflab/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace eflab {

struct LibsvmOptions {
  // Unset: infer. Labels in {-1,0,+1} or {1,2} give Binary, other integer
  // labels give Multiclass (remapped to 0..C-1 in sorted order), anything
  // else Regression.
  std::optional<Task> task;
  Index num_features = 0;  // pad to at least this many columns
};

/// Sparse "label idx:val ..." lines with 1-based strictly increasing indices,
/// densified. Blank lines and '#' comments are skipped. A leading
/// "# eflab-libsvm v1 task=<t> features=<d>" header (written by write_libsvm)
/// pins the task and column count. Throws ParseError with the line number.
Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options = {});
Dataset load_libsvm(const std::filesystem::path& path, const LibsvmOptions& options = {});

/// Versioned dump in LIBSVM syntax; zeros are omitted and values are written
/// in shortest round-trip form, so parse_libsvm reproduces the dataset exactly.
void write_libsvm(std::ostream& out, const Dataset& data);

/// Comma-separated table with a header row. Every cell must be numeric.
struct CsvTable {
  std::vector<std::string> headers;
  Eigen::MatrixXd values;
};

CsvTable read_csv(std::istream& in);

/// All non-target columns become features, in file order.
Dataset parse_csv(std::istream& in, std::string_view target_column, Task task);
Dataset load_csv(const std::filesystem::path& path, std::string_view target_column, Task task);

enum class Generator { Fig1Lognormal, Table3Classification, Table4Regression };
enum class Variant { Correct, A, B };

std::string to_string(Generator generator);
std::string to_string(Variant variant);
Generator parse_generator(const std::string& name);
Variant parse_variant(const std::string& name);

/// Synthetic problems:
///   Fig1Lognormal  x ~ Lognormal(0, sigma = 3/4), y = 2 + 2x + eps, eps ~ N(0, 1)
///   Table3         balanced binary labels, 2-D Gaussian class conditionals
///                  (Correct: N(+-[1,1], 2I); A: N([1.5,1.5], 3I) vs N([-1.5,-1.5], I);
///                   B: N(-[1,1], [[1.5,-.9],[-.9,1.5]]) vs N([1,1], [[1.5,.9],[.9,1.5]]))
///   Table4         x ~ N(0,1); Correct y = x + eps; A noise sd 2; B y = x + x^2/2 + eps
struct SyntheticSpec {
  Generator generator = Generator::Fig1Lognormal;
  Variant variant = Variant::Correct;
  Index n = 1000;
  std::uint64_t seed = 0;
  std::optional<double> noise_sd;  // overrides the variant's noise (regression generators)
  double lognormal_sigma = 0.75;   // Fig1Lognormal: standard deviation of log x
};

Dataset generate(const SyntheticSpec& spec);

struct StandardizationReport {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  std::vector<bool> zero_variance;  // such columns are passed through untouched
};

/// Per-column affine map to zero mean and unit (population) variance.
std::pair<Dataset, StandardizationReport> standardize(const Dataset& data);

/// Shortest string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace eflab
