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

#include "eflab/data_io.hpp"
#include "eflab/model.hpp"
#include "eflab/optim.hpp"
#include "eflab/output.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eflab {

/// log10-spaced values start..stop with `num` points (numpy.logspace), keeping
/// every `stride`-th point.
struct LogGrid {
  double start = 0;
  double stop = 0;
  int num = 1;
  int stride = 1;

  std::vector<double> exponents() const;
};

struct DataSource {
  std::string name;
  std::optional<SyntheticSpec> synthetic;
  std::string libsvm_path;
  std::string csv_path;
  std::string target_column;  // csv only
  std::optional<Task> task;   // libsvm: inferred when unset; csv: regression when unset
  bool standardize = false;
  std::optional<ModelSpec> model;  // default: inferred from the task
};

struct Fig1Settings {
  double step_size = 1e-4;
  double damping = 1e-8;
  Index iterations = 50000;
  std::vector<ParamVector> starts;  // default: the four reference starts
  std::vector<Method> field_methods{Method::GD, Method::NGD, Method::EFGD};
  double field_min[2] = {-1.0, -1.0};
  double field_max[2] = {5.0, 5.0};
  int field_points[2] = {25, 25};
  Index trajectory_stride = 100;
};

struct Fig2Settings {
  Index n = 1000;
  Index directions = 64;
};

enum class HyperparameterSource { Grid, Table6 };

struct Fig3Settings {
  HyperparameterSource hyperparameters = HyperparameterSource::Grid;
  Index multistart = 0;  // extra EFGD runs from starts drawn in [-theta*, theta*]
};

struct SingleRun {
  Method method = Method::NGD;
  double step_size = 1.0;
  double damping = 0;
  Index iterations = 100;
};

struct ExperimentConfig {
  static constexpr int kSchemaVersion = 1;

  std::uint64_t seed = 0;
  std::string output_dir = "out";
  OutputFormat format = OutputFormat::Csv;
  std::vector<DataSource> datasets;
  std::vector<Method> methods{Method::GD, Method::NGD, Method::EFGD};
  LogGrid step_grid{-20, 10, 241, 8};
  LogGrid damping_grid{-10, 10, 41, 4};
  Index iterations = 100;
  Index mc_samples = 1;
  std::optional<ParamVector> theta0;  // default 0
  SingleRun single;
  Fig1Settings fig1;
  Fig2Settings fig2;
  Fig3Settings fig3;

  void use_full_grid() {
    step_grid.stride = 1;
    damping_grid.stride = 1;
  }

  /// Throws ConfigError naming the offending JSON pointer.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

ExperimentConfig load_config(const std::string& path);

/// Loads, validates and (optionally) standardizes. Throws ConfigError when a
/// file is missing.
Dataset load_source(const DataSource& source);
ModelSpec model_for(const DataSource& source, const Dataset& data);

struct GridCell {
  Method method = Method::GD;
  double log10_step = 0;
  double log10_damping = 0;  // -inf for GD, which has no damping
  double final_loss = 0;     // last finite loss of the run
  bool diverged = false;
};

struct GridResult {
  std::vector<GridCell> cells;
  // Minimal final loss among non-diverged cells; ties go to the smaller step,
  // then the smaller damping. Absent means "no viable cell".
  std::map<Method, std::optional<GridCell>> best;
};

/// One run per (method, step, damping) cell from theta0; GD only varies the
/// step. Cells run concurrently; the result is independent of thread count.
GridResult grid_search(const ExperimentConfig& config, const ModelSpec& model,
                       const Dataset& data, const ParamVector& theta0);

struct RunSummary {
  Method method = Method::GD;
  Index start_index = 0;
  ParamVector start;
  ParamVector final_theta;
  double final_loss = 0;
  double distance_to_optimum = 0;
  bool diverged = false;
};

struct Fig1Result {
  ParamVector theta_star;
  double optimum_loss = 0;
  std::vector<RunSummary> runs;
  Index field_rows = 0;
  Index field_columns = 0;
};

struct Fig2Entry {
  std::string family;  // "classification" or "regression"
  Variant variant = Variant::Correct;
  double gap = 0;
  double max_ratio_error = 0;
  double accuracy = -1;  // classification only
  double gradient_inf_norm = 0;
};

struct Fig2Result {
  std::vector<Fig2Entry> entries;
  const Fig2Entry& find(const std::string& family, Variant variant) const;
};

struct MultistartRun {
  double initial_distance = 0;  // ||theta_0 - theta*||
  double initial_loss = 0;
  double final_loss = 0;
};

struct Fig3Dataset {
  std::string name;
  std::map<Method, SingleRun> hyperparameters;
  std::map<Method, Trajectory> runs;
  std::vector<double> cosine;  // along the EFGD path, undamped
  std::vector<MultistartRun> multistart;  // EFGD from random starts
};

struct Fig3Result {
  std::vector<Fig3Dataset> datasets;
  std::vector<std::string> skipped;
};

/// Fixed hyperparameters for the named benchmark dataset, if known.
std::optional<std::map<Method, SingleRun>> table6_hyperparameters(const std::string& dataset);

Fig1Result reproduce_fig1(const ExperimentConfig& config, OutputSink* sink);
Fig2Result reproduce_fig2(const ExperimentConfig& config, OutputSink* sink);
Fig3Result reproduce_fig3(const ExperimentConfig& config, OutputSink* sink);

/// The reference Fig.-1 starting points [2, 4.5], [1, 0], [4.5, 3], [-0.5, 3].
std::vector<ParamVector> fig1_starts();

}  // namespace eflab
