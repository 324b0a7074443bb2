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

#include "eflab/cli.hpp"

#include "eflab/curvature.hpp"
#include "eflab/diagnostics.hpp"
#include "eflab/error.hpp"
#include "eflab/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <ostream>
#include <set>
#include <sstream>

namespace eflab {
namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format;
  bool full_grid = false;
};

struct DataOptions {
  std::string dataset;
  std::string target;
  std::string task;
  std::string synthetic;
  Index n = 0;
  std::string model;
  std::string theta;
  bool standardize = false;
};

// Errors raised while interpreting flags; `flag` names the offender.
struct UsageError : Error {
  UsageError(const std::string& flag, const std::string& what)
      : Error(flag + ": " + what) {}
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_path, "JSON experiment config");
  app->add_option("--seed", o.seed, "Random seed (overrides the config)");
  app->add_option("--out-dir", o.out_dir, "Output directory (overrides the config)");
  app->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

void add_data(CLI::App* app, DataOptions& o) {
  app->add_option("--dataset", o.dataset, "LIBSVM (.libsvm/.svm/.txt) or CSV (.csv) file");
  app->add_option("--target", o.target, "Target column for CSV datasets");
  app->add_option("--task", o.task, "Task for file datasets")
      ->check(CLI::IsMember({"regression", "binary"}));
  app->add_option("--synthetic", o.synthetic,
                  "Synthetic generator, optionally with a variant: NAME[:correct|A|B]");
  app->add_option("--n", o.n, "Synthetic sample count");
  app->add_option("--model", o.model, "linear_gaussian, logistic, softmax, scalar_sine");
  app->add_flag("--standardize", o.standardize, "Standardize file datasets");
}

ExperimentConfig build_config(const CommonOptions& common, const DataOptions* data) {
  ExperimentConfig config;
  if (!common.config_path.empty()) {
    try {
      config = load_config(common.config_path);
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      if (what.rfind("--config", 0) == 0) throw UsageError("--config", what.substr(10));
      throw UsageError("--config " + common.config_path, what);
    }
  }
  if (common.seed) config.seed = *common.seed;
  if (!common.out_dir.empty()) config.output_dir = common.out_dir;
  if (!common.format.empty()) config.format = parse_format(common.format);
  if (common.full_grid) config.use_full_grid();
  if (!data) return config;

  std::optional<ModelSpec> model;
  if (!data->model.empty()) {
    try {
      model = parse_model(data->model, data->model != "scalar_sine");
    } catch (const ConfigError& e) {
      throw UsageError("--model", e.what());
    }
  }
  if (!data->dataset.empty() && !data->synthetic.empty())
    throw UsageError("--dataset", "cannot be combined with --synthetic");
  if (!data->dataset.empty()) {
    const std::filesystem::path path(data->dataset);
    if (!std::filesystem::exists(path)) throw UsageError("--dataset", "file not found: " + data->dataset);
    DataSource s;
    s.name = path.stem().string();
    if (path.extension() == ".csv") {
      if (data->target.empty()) throw UsageError("--target", "required for CSV datasets");
      s.csv_path = data->dataset;
      s.target_column = data->target;
    } else {
      s.libsvm_path = data->dataset;
    }
    if (data->task == "regression") s.task = Task::regression();
    if (data->task == "binary") s.task = Task::binary();
    s.standardize = data->standardize;
    s.model = model;
    config.datasets = {s};
  } else if (!data->synthetic.empty()) {
    DataSource s;
    SyntheticSpec spec;
    const auto colon = data->synthetic.find(':');
    try {
      spec.generator = parse_generator(data->synthetic.substr(0, colon));
      if (colon != std::string::npos) spec.variant = parse_variant(data->synthetic.substr(colon + 1));
    } catch (const ConfigError& e) {
      throw UsageError("--synthetic", e.what());
    }
    if (data->n < 0) throw UsageError("--n", "must be >= 1");
    if (data->n > 0) spec.n = data->n;
    spec.seed = config.seed;
    s.name = to_string(spec.generator) + "_" + to_string(spec.variant);
    s.synthetic = spec;
    s.model = model;
    config.datasets = {s};
  } else if (model) {
    for (auto& s : config.datasets) s.model = model;
  }
  return config;
}

ParamVector parse_theta(const std::string& text, Index dim) {
  ParamVector theta = ParamVector::Zero(dim);
  if (text.empty()) return theta;
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--theta", "'" + item + "' is not a number");
    }
  }
  if (static_cast<Index>(values.size()) != dim)
    throw UsageError("--theta", "expected " + std::to_string(dim) + " comma-separated values, got " +
                                    std::to_string(values.size()));
  for (Index i = 0; i < dim; ++i) theta[i] = values[static_cast<std::size_t>(i)];
  return theta;
}

struct Problem {
  DataSource source;
  Dataset data;
  ModelSpec model;
};

Problem first_problem(const ExperimentConfig& config) {
  if (config.datasets.empty())
    throw UsageError("--dataset", "no dataset given (use --dataset, --synthetic, or /datasets in --config)");
  Problem p;
  p.source = config.datasets.front();
  try {
    p.data = load_source(p.source);
  } catch (const ConfigError& e) {
    throw UsageError(p.source.libsvm_path.empty() && p.source.csv_path.empty() ? "/datasets/0"
                                                                                : "--dataset",
                     e.what());
  }
  p.model = model_for(p.source, p.data);
  try {
    p.model.check(p.data);
  } catch (const ConfigError& e) {
    throw UsageError("--model", e.what());
  }
  return p;
}

ParamVector initial_theta(const ExperimentConfig& config, const DataOptions& data, const Problem& p) {
  const Index d = p.model.param_dim(p.data.input_dim());
  if (!data.theta.empty()) return parse_theta(data.theta, d);
  if (config.theta0) {
    if (config.theta0->size() != d)
      throw UsageError("--config", "/theta0: expected " + std::to_string(d) + " values");
    return *config.theta0;
  }
  return ParamVector::Zero(d);
}

nlohmann::json manifest_config(const ExperimentConfig& config) {
  nlohmann::json j = config.to_json();
  j.erase("output_dir");
  return j;
}

void finish(OutputSink& sink, const std::string& command, const ExperimentConfig& config,
            std::ostream& out) {
  sink.write_manifest(command, manifest_config(config), config.seed);
  out << "wrote " << sink.files().size() << " file(s) and manifest.json to "
      << sink.dir().string() << '\n';
}

std::vector<std::string> theta_columns(Index d) {
  std::vector<std::string> cols;
  for (Index i = 0; i < d; ++i) cols.push_back("theta" + std::to_string(i));
  return cols;
}

int cmd_curvature(const CommonOptions& common, const DataOptions& data, const std::string& kind,
                  const std::string& split, Index samples, std::ostream& out) {
  const ExperimentConfig config = build_config(common, &data);
  const Problem p = first_problem(config);
  const ParamVector theta = initial_theta(config, data, p);
  CurvatureMatrix c;
  if (kind == "fisher") c = fisher(p.model, p.data, theta);
  else if (kind == "ef") c = empirical_fisher(p.model, p.data, theta);
  else if (kind == "hessian") c = hessian(p.model, p.data, theta);
  else if (kind == "mc_fisher") c = mc_fisher(p.model, p.data, theta, samples, config.seed);
  else {
    SplitId id;
    try {
      id = parse_split(split);
    } catch (const ConfigError& e) {
      throw UsageError("--split", e.what());
    }
    c = ggn(p.model, p.data, theta, id);
  }

  std::vector<std::string> cols;
  for (Index j = 0; j < c.dim(); ++j) cols.push_back("c" + std::to_string(j));
  Table t(cols);
  for (Index i = 0; i < c.dim(); ++i)
    t.add(std::vector<double>(c.values.col(i).data(), c.values.col(i).data() + c.dim()));
  OutputSink sink(config.output_dir, config.format);
  std::string stem = "curvature_" + to_string(c.kind);
  if (c.split) stem += "_" + to_string(*c.split);
  sink.write(stem, t);
  sink.note(c.label() + ", " + CurvatureMatrix::convention);
  out << c.label() << " (" << CurvatureMatrix::convention << "), dim " << c.dim()
      << ", frobenius norm " << format_double(c.values.norm()) << '\n';
  finish(sink, "curvature", config, out);
  return kExitOk;
}

int cmd_optimize(const CommonOptions& common, const DataOptions& data, const SingleRun& flags,
                 const std::set<std::string>& given, std::ostream& out) {
  ExperimentConfig config = build_config(common, &data);
  SingleRun& s = config.single;
  if (given.count("method")) s.method = flags.method;
  if (given.count("step")) s.step_size = flags.step_size;
  if (given.count("damping")) s.damping = flags.damping;
  if (given.count("iterations")) s.iterations = flags.iterations;
  const Problem p = first_problem(config);
  const ParamVector theta0 = initial_theta(config, data, p);

  OptimizerConfig oc;
  oc.method = s.method;
  oc.step_size = s.step_size;
  oc.damping = s.damping;
  oc.iterations = s.iterations;
  oc.seed = config.seed;
  oc.mc_samples = config.mc_samples;
  try {
    oc.validate();
  } catch (const ConfigError& e) {
    throw UsageError("--step-size/--damping/--iterations", e.what());
  }
  const Trajectory t = run(oc, p.model, p.data, theta0);

  const Index d = theta0.size();
  std::vector<std::string> cols{"iteration", "loss"};
  for (auto& c : theta_columns(d)) cols.push_back(c);
  cols.insert(cols.end(), {"update_norm", "gradient_norm"});
  Table table(cols);
  for (std::size_t i = 0; i < t.thetas.size(); ++i) {
    if (!std::isfinite(t.losses[i]) || !t.thetas[i].allFinite()) break;
    std::vector<double> row{static_cast<double>(i), t.losses[i]};
    for (Index j = 0; j < d; ++j) row.push_back(t.thetas[i][j]);
    if (i < t.steps.size()) {
      row.push_back(t.steps[i].update_norm);
      row.push_back(t.steps[i].gradient_norm);
    } else {
      row.insert(row.end(), {0.0, 0.0});
    }
    table.add(row);
  }
  OutputSink sink(config.output_dir, config.format);
  sink.write("optimize_" + to_string(s.method), table);
  if (t.diverged) sink.note("diverged: " + t.divergence_reason);
  out << to_string(s.method) << ": " << t.losses.size() - 1 << " steps, final loss "
      << format_double(t.losses.back()) << (t.diverged ? " (diverged: " + t.divergence_reason + ")" : "")
      << '\n';
  finish(sink, "optimize", config, out);
  return t.diverged ? kExitNumerical : kExitOk;
}

int cmd_gridsearch(const CommonOptions& common, const DataOptions& data, std::ostream& out) {
  const ExperimentConfig config = build_config(common, &data);
  const Problem p = first_problem(config);
  const ParamVector theta0 = initial_theta(config, data, p);
  const GridResult grid = grid_search(config, p.model, p.data, theta0);

  OutputSink sink(config.output_dir, config.format);
  std::map<Method, Table> tables;
  for (const GridCell& c : grid.cells) {
    const bool gd = c.method == Method::GD;
    auto it = tables.find(c.method);
    if (it == tables.end()) {
      std::vector<std::string> cols{"log10_step"};
      if (!gd) cols.push_back("log10_damping");
      cols.insert(cols.end(), {"final_loss", "diverged"});
      it = tables.emplace(c.method, Table(cols)).first;
    }
    std::vector<double> row{c.log10_step};
    if (!gd) row.push_back(c.log10_damping);
    row.insert(row.end(), {c.final_loss, c.diverged ? 1.0 : 0.0});
    it->second.add(row);
  }
  for (const auto& [m, t] : tables) sink.write("grid_" + to_string(m), t);
  Table best({"log10_step", "log10_damping", "final_loss"});
  for (const auto& [m, b] : grid.best) {
    if (!b) {
      out << to_string(m) << ": no viable cell\n";
      sink.note(to_string(m) + ": no viable cell");
      continue;
    }
    Table bt({"log10_step", "log10_damping", "final_loss"});
    bt.add({b->log10_step, m == Method::GD ? 0.0 : b->log10_damping, b->final_loss});
    sink.write("best_" + to_string(m), bt);
    out << to_string(m) << ": best log10(step) " << format_double(b->log10_step);
    if (m != Method::GD) out << ", log10(damping) " << format_double(b->log10_damping);
    out << ", final loss " << format_double(b->final_loss) << '\n';
  }
  finish(sink, "gridsearch", config, out);
  return kExitOk;
}

int cmd_fig1(const CommonOptions& common, const DataOptions& data, std::ostream& out) {
  const ExperimentConfig config = build_config(common, &data);
  OutputSink sink(config.output_dir, config.format);
  const Fig1Result r = reproduce_fig1(config, &sink);
  out << "optimum loss " << format_double(r.optimum_loss) << " at [" << format_double(r.theta_star[0])
      << ", " << format_double(r.theta_star[1]) << "]\n";
  for (const RunSummary& s : r.runs)
    out << to_string(s.method) << " start " << s.start_index << ": loss gap "
        << format_double(s.final_loss - r.optimum_loss) << ", distance "
        << format_double(s.distance_to_optimum) << (s.diverged ? " (diverged)" : "") << '\n';
  finish(sink, "fig1", config, out);
  return kExitOk;
}

int cmd_fig2(const CommonOptions& common, std::ostream& out) {
  const ExperimentConfig config = build_config(common, nullptr);
  OutputSink sink(config.output_dir, config.format);
  const Fig2Result r = reproduce_fig2(config, &sink);
  for (const Fig2Entry& e : r.entries)
    out << e.family << " " << to_string(e.variant) << ": gap " << format_double(e.gap)
        << ", max ratio error " << format_double(e.max_ratio_error) << '\n';
  finish(sink, "fig2", config, out);
  return kExitOk;
}

int cmd_fig3(const CommonOptions& common, const DataOptions& data, const std::string& hyper,
             Index multistart, std::ostream& out) {
  ExperimentConfig config = build_config(common, &data);
  if (hyper == "table6") config.fig3.hyperparameters = HyperparameterSource::Table6;
  if (hyper == "grid") config.fig3.hyperparameters = HyperparameterSource::Grid;
  if (multistart > 0) config.fig3.multistart = multistart;
  OutputSink sink(config.output_dir, config.format);
  const Fig3Result r = reproduce_fig3(config, &sink);
  for (const auto& name : r.skipped) out << name << ": skipped (dataset file not found)\n";
  for (const Fig3Dataset& d : r.datasets) {
    for (const auto& [m, t] : d.runs)
      out << d.name << " " << to_string(m) << ": final loss " << format_double(t.losses.back())
          << (t.diverged ? " (diverged)" : "") << '\n';
    if (!d.cosine.empty())
      out << d.name << " min cosine " << format_double(*std::min_element(d.cosine.begin(), d.cosine.end()))
          << '\n';
  }
  finish(sink, "fig3", config, out);
  return kExitOk;
}

int cmd_validate_split(const std::string& split, const std::string& model_name, std::ostream& out) {
  SplitId id;
  try {
    id = parse_split(split);
  } catch (const ConfigError& e) {
    throw UsageError("validate-split <split>", e.what());
  }
  ModelSpec model;
  try {
    model = model_name == "softmax" ? ModelSpec::softmax(3) : parse_model(model_name, model_name != "scalar_sine");
  } catch (const ConfigError& e) {
    throw UsageError("--model", e.what());
  }
  out << check_split_validity(id, model).to_text();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"eflab: Fisher, empirical Fisher and natural-gradient experiments on linear models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonOptions common;
  DataOptions data;

  auto* curv = app.add_subcommand("curvature", "Dump a curvature matrix for a dataset, model and theta");
  std::string kind = "fisher";
  std::string split = "canonical";
  Index samples = 1;
  add_common(curv, common);
  add_data(curv, data);
  curv->add_option("--theta", data.theta, "Comma-separated parameters (default 0)");
  curv->add_option("--kind", kind, "Curvature kind")
      ->check(CLI::IsMember({"fisher", "ef", "ggn", "hessian", "mc_fisher"}));
  curv->add_option("--split", split, "GGN split: canonical, ef, trivial");
  curv->add_option("--samples", samples, "Monte Carlo samples per data point")->check(CLI::PositiveNumber);

  auto* opt = app.add_subcommand("optimize", "Single optimizer run");
  SingleRun single;
  std::string method_name;
  add_common(opt, common);
  add_data(opt, data);
  opt->add_option("--theta", data.theta, "Comma-separated starting point (default 0)");
  opt->add_option("--method", method_name, "gd, ngd, efgd, mcngd, varadapted");
  auto* step_opt = opt->add_option("--step-size", single.step_size, "Step size");
  auto* damp_opt = opt->add_option("--damping", single.damping, "Damping");
  auto* iter_opt = opt->add_option("--iterations", single.iterations, "Number of steps");

  auto* grid = app.add_subcommand("gridsearch", "Grid search over step size and damping");
  add_common(grid, common);
  add_data(grid, data);
  grid->add_flag("--full-grid", common.full_grid, "Use every grid point instead of the reduced grid");

  auto* f1 = app.add_subcommand("fig1", "Optimizer trajectories and vector fields on 2-D regression");
  add_common(f1, common);
  add_data(f1, data);

  auto* f2 = app.add_subcommand("fig2", "Quadratic models of the loss at the minimum");
  add_common(f2, common);

  auto* f3 = app.add_subcommand("fig3", "Loss curves and EF/NGD cosine on benchmark problems");
  std::string hyper;
  Index multistart = 0;
  add_common(f3, common);
  add_data(f3, data);
  f3->add_flag("--full-grid", common.full_grid, "Use every grid point instead of the reduced grid");
  f3->add_option("--hyperparameters", hyper, "grid or table6")->check(CLI::IsMember({"grid", "table6"}));
  f3->add_option("--multistart", multistart, "Extra EFGD runs from random starts")
      ->check(CLI::NonNegativeNumber);

  auto* vs = app.add_subcommand("validate-split", "Check whether a loss split is valid");
  std::string split_name;
  std::string split_model = "linear_gaussian";
  vs->add_option("split", split_name, "canonical, ef, trivial")->required();
  vs->add_option("--model", split_model, "linear_gaussian, logistic, softmax, scalar_sine");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*curv) return cmd_curvature(common, data, kind, split, samples, out);
    if (*opt) {
      std::set<std::string> given;
      if (!method_name.empty()) {
        try {
          single.method = parse_method(method_name);
        } catch (const ConfigError& e) {
          throw UsageError("--method", e.what());
        }
        given.insert("method");
      }
      if (step_opt->count()) given.insert("step");
      if (damp_opt->count()) given.insert("damping");
      if (iter_opt->count()) given.insert("iterations");
      return cmd_optimize(common, data, single, given, out);
    }
    if (*grid) return cmd_gridsearch(common, data, out);
    if (*f1) return cmd_fig1(common, data, out);
    if (*f2) return cmd_fig2(common, out);
    if (*f3) return cmd_fig3(common, data, hyper, multistart, out);
    if (*vs) return cmd_validate_split(split_name, split_model, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ParseError& e) {
    err << "error: --dataset: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace eflab
