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

#include "eflab/experiment.hpp"

#include "eflab/curvature.hpp"
#include "eflab/diagnostics.hpp"
#include "eflab/error.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>

namespace eflab {

using nlohmann::json;

std::vector<double> LogGrid::exponents() const {
  if (num < 1) throw ConfigError("grid needs num >= 1");
  if (stride < 1) throw ConfigError("grid needs stride >= 1");
  std::vector<double> out;
  for (int i = 0; i < num; i += stride)
    out.push_back(num == 1 ? start : start + i * (stop - start) / (num - 1));
  return out;
}

std::vector<ParamVector> fig1_starts() {
  std::vector<ParamVector> s;
  for (const auto& [a, b] : {std::pair{2.0, 4.5}, {1.0, 0.0}, {4.5, 3.0}, {-0.5, 3.0}}) {
    ParamVector p(2);
    p << a, b;
    s.push_back(p);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Config parsing. Every error names the JSON pointer of the offending field.

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) throw ConfigError(path_ + "/" + k + ": unknown key");
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string at(const char* key) const { return path_ + "/" + key; }
  Reader child(const char* key) const { return Reader(j_.at(key), at(key)); }
  const json& raw(const char* key) const { return j_.at(key); }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_number()) throw ConfigError(at(key) + ": expected a number");
    return j_.at(key).get<double>();
  }

  long long integer(const char* key, long long fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
    return j_.at(key).get<long long>();
  }

  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_string()) throw ConfigError(at(key) + ": expected a string");
    return j_.at(key).get<std::string>();
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) throw ConfigError(at(key) + ": expected true or false");
    return j_.at(key).get<bool>();
  }

  std::vector<double> numbers(const char* key) const {
    const json& a = j_.at(key);
    if (!a.is_array()) throw ConfigError(at(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : a) {
      if (!v.is_number()) throw ConfigError(at(key) + ": expected an array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError((path_.empty() ? "/" : path_) + ": " + what);
  }

 private:
  const json& j_;
  std::string path_;
};

// Rethrows parse_* errors with the field location prepended.
template <typename F>
auto located(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

ModelSpec read_model(const Reader& r) {
  r.allow({"kind", "bias", "num_classes"});
  const std::string kind = r.string("kind", "linear_gaussian");
  const bool bias = r.boolean("bias", kind != "scalar_sine");
  const int classes = static_cast<int>(r.integer("num_classes", 0));
  return located(r.at("kind"), [&] { return parse_model(kind, bias, classes); });
}

json write_model(const ModelSpec& m) {
  return {{"kind", m.name()}, {"bias", m.includes_bias}, {"num_classes", m.num_classes}};
}

LogGrid read_grid(const Reader& r, LogGrid g) {
  r.allow({"start", "stop", "num", "stride"});
  g.start = r.number("start", g.start);
  g.stop = r.number("stop", g.stop);
  g.num = static_cast<int>(r.integer("num", g.num));
  g.stride = static_cast<int>(r.integer("stride", g.stride));
  if (g.num < 1) throw ConfigError(r.at("num") + ": must be >= 1");
  if (g.stride < 1) throw ConfigError(r.at("stride") + ": must be >= 1");
  return g;
}

json write_grid(const LogGrid& g) {
  return {{"start", g.start}, {"stop", g.stop}, {"num", g.num}, {"stride", g.stride}};
}

std::vector<Method> read_methods(const Reader& r, const char* key) {
  const json& a = r.raw(key);
  if (!a.is_array() || a.empty()) throw ConfigError(r.at(key) + ": expected a non-empty array");
  std::vector<Method> out;
  for (const auto& v : a) {
    if (!v.is_string()) throw ConfigError(r.at(key) + ": expected method names");
    out.push_back(located(r.at(key), [&] { return parse_method(v.get<std::string>()); }));
  }
  return out;
}

json write_methods(const std::vector<Method>& methods) {
  json a = json::array();
  for (Method m : methods) a.push_back(to_string(m));
  return a;
}

std::vector<ParamVector> read_points(const Reader& r, const char* key) {
  const json& a = r.raw(key);
  if (!a.is_array()) throw ConfigError(r.at(key) + ": expected an array of points");
  std::vector<ParamVector> out;
  for (const auto& p : a) {
    if (!p.is_array() || p.empty()) throw ConfigError(r.at(key) + ": expected arrays of numbers");
    ParamVector v(static_cast<Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!p[i].is_number()) throw ConfigError(r.at(key) + ": expected arrays of numbers");
      v[static_cast<Index>(i)] = p[i].get<double>();
    }
    out.push_back(v);
  }
  return out;
}

json write_point(const ParamVector& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

DataSource read_source(const Reader& r, std::size_t index,
                       const std::optional<ModelSpec>& default_model, std::uint64_t default_seed) {
  r.allow({"name", "synthetic", "libsvm", "csv", "target", "task", "classes", "standardize",
           "model"});
  DataSource s;
  s.name = r.string("name", "dataset" + std::to_string(index));
  const int given = static_cast<int>(r.has("synthetic")) + static_cast<int>(r.has("libsvm")) +
                    static_cast<int>(r.has("csv"));
  if (given != 1) r.fail("exactly one of synthetic, libsvm, csv is required");
  if (r.has("synthetic")) {
    const Reader sr = r.child("synthetic");
    sr.allow({"generator", "variant", "n", "seed", "noise_sd", "lognormal_sigma"});
    SyntheticSpec spec;
    spec.generator = located(sr.at("generator"),
                             [&] { return parse_generator(sr.string("generator", "fig1_lognormal")); });
    spec.variant = located(sr.at("variant"), [&] { return parse_variant(sr.string("variant", "correct")); });
    spec.n = sr.integer("n", 1000);
    if (spec.n < 1) throw ConfigError(sr.at("n") + ": must be >= 1");
    const long long seed = sr.integer("seed", static_cast<long long>(default_seed));
    if (seed < 0) throw ConfigError(sr.at("seed") + ": must be >= 0");
    spec.seed = static_cast<std::uint64_t>(seed);
    if (sr.has("noise_sd")) spec.noise_sd = sr.number("noise_sd", 1.0);
    spec.lognormal_sigma = sr.number("lognormal_sigma", 0.75);
    s.synthetic = spec;
  }
  s.libsvm_path = r.string("libsvm", "");
  s.csv_path = r.string("csv", "");
  s.target_column = r.string("target", "");
  if (!s.csv_path.empty() && s.target_column.empty()) r.fail("csv datasets need a target column");
  if (r.has("task")) {
    const int classes = static_cast<int>(r.integer("classes", 0));
    const std::string task = r.string("task", "regression");
    if (task == "regression") s.task = Task::regression();
    else if (task == "binary") s.task = Task::binary();
    else if (task == "multiclass" && classes >= 2) s.task = Task::multiclass(classes);
    else throw ConfigError(r.at("task") + ": expected regression, binary, or multiclass with classes >= 2");
  }
  s.standardize = r.boolean("standardize", !s.synthetic.has_value());
  if (r.has("model")) s.model = read_model(r.child("model"));
  else s.model = default_model;
  return s;
}

json write_source(const DataSource& s) {
  json j;
  j["name"] = s.name;
  if (s.synthetic) {
    json sj{{"generator", to_string(s.synthetic->generator)},
            {"variant", to_string(s.synthetic->variant)},
            {"n", s.synthetic->n},
            {"seed", static_cast<long long>(s.synthetic->seed)},
            {"lognormal_sigma", s.synthetic->lognormal_sigma}};
    if (s.synthetic->noise_sd) sj["noise_sd"] = *s.synthetic->noise_sd;
    j["synthetic"] = sj;
  }
  if (!s.libsvm_path.empty()) j["libsvm"] = s.libsvm_path;
  if (!s.csv_path.empty()) {
    j["csv"] = s.csv_path;
    j["target"] = s.target_column;
  }
  if (s.task) {
    j["task"] = s.task->name();
    if (s.task->kind == TaskKind::Multiclass) j["classes"] = s.task->num_classes;
  }
  j["standardize"] = s.standardize;
  if (s.model) j["model"] = write_model(*s.model);
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  const Reader r(j, "");
  r.allow({"schema_version", "seed", "output_dir", "format", "model", "datasets", "methods",
           "grid", "iterations", "mc_samples", "theta0", "optimize", "fig1", "fig2", "fig3"});
  ExperimentConfig c;
  const long long version = r.integer("schema_version", kSchemaVersion);
  if (version != kSchemaVersion)
    throw ConfigError("/schema_version: unsupported version " + std::to_string(version) +
                      " (expected " + std::to_string(kSchemaVersion) + ")");
  const long long seed = r.integer("seed", 0);
  if (seed < 0) throw ConfigError("/seed: must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  c.output_dir = r.string("output_dir", c.output_dir);
  c.format = located("/format", [&] { return parse_format(r.string("format", "csv")); });

  std::optional<ModelSpec> model;
  if (r.has("model")) model = read_model(r.child("model"));
  if (r.has("datasets")) {
    const json& a = r.raw("datasets");
    if (!a.is_array()) throw ConfigError("/datasets: expected an array");
    for (std::size_t i = 0; i < a.size(); ++i)
      c.datasets.push_back(read_source(Reader(a[i], "/datasets/" + std::to_string(i)), i, model, c.seed));
  }
  if (r.has("methods")) c.methods = read_methods(r, "methods");
  if (r.has("grid")) {
    const Reader g = r.child("grid");
    g.allow({"step", "damping"});
    if (g.has("step")) c.step_grid = read_grid(g.child("step"), c.step_grid);
    if (g.has("damping")) c.damping_grid = read_grid(g.child("damping"), c.damping_grid);
  }
  c.iterations = r.integer("iterations", c.iterations);
  if (c.iterations < 1) throw ConfigError("/iterations: must be >= 1");
  c.mc_samples = r.integer("mc_samples", c.mc_samples);
  if (c.mc_samples < 1) throw ConfigError("/mc_samples: must be >= 1");
  if (r.has("theta0")) {
    const auto v = r.numbers("theta0");
    c.theta0 = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
  }
  if (r.has("optimize")) {
    const Reader o = r.child("optimize");
    o.allow({"method", "step_size", "damping", "iterations"});
    c.single.method = located(o.at("method"), [&] { return parse_method(o.string("method", "ngd")); });
    c.single.step_size = o.number("step_size", c.single.step_size);
    c.single.damping = o.number("damping", c.single.damping);
    c.single.iterations = o.integer("iterations", c.single.iterations);
    if (!(c.single.step_size > 0)) throw ConfigError(o.at("step_size") + ": must be > 0");
    if (!(c.single.damping >= 0)) throw ConfigError(o.at("damping") + ": must be >= 0");
    if (c.single.iterations < 1) throw ConfigError(o.at("iterations") + ": must be >= 1");
  }
  if (r.has("fig1")) {
    const Reader f = r.child("fig1");
    f.allow({"step_size", "damping", "iterations", "starts", "field_methods", "field_min",
             "field_max", "field_points", "trajectory_stride"});
    c.fig1.step_size = f.number("step_size", c.fig1.step_size);
    c.fig1.damping = f.number("damping", c.fig1.damping);
    c.fig1.iterations = f.integer("iterations", c.fig1.iterations);
    if (c.fig1.iterations < 1) throw ConfigError(f.at("iterations") + ": must be >= 1");
    if (f.has("starts")) c.fig1.starts = read_points(f, "starts");
    if (f.has("field_methods")) c.fig1.field_methods = read_methods(f, "field_methods");
    for (const char* key : {"field_min", "field_max"}) {
      if (!f.has(key)) continue;
      const auto v = f.numbers(key);
      if (v.size() != 2) throw ConfigError(f.at(key) + ": expected two numbers");
      double* dst = std::string(key) == "field_min" ? c.fig1.field_min : c.fig1.field_max;
      dst[0] = v[0];
      dst[1] = v[1];
    }
    if (f.has("field_points")) {
      const auto v = f.numbers("field_points");
      if (v.size() != 2 || v[0] < 1 || v[1] < 1)
        throw ConfigError(f.at("field_points") + ": expected two positive integers");
      c.fig1.field_points[0] = static_cast<int>(v[0]);
      c.fig1.field_points[1] = static_cast<int>(v[1]);
    }
    c.fig1.trajectory_stride = f.integer("trajectory_stride", c.fig1.trajectory_stride);
    if (c.fig1.trajectory_stride < 1) throw ConfigError(f.at("trajectory_stride") + ": must be >= 1");
  }
  if (r.has("fig2")) {
    const Reader f = r.child("fig2");
    f.allow({"n", "directions"});
    c.fig2.n = f.integer("n", c.fig2.n);
    c.fig2.directions = f.integer("directions", c.fig2.directions);
    if (c.fig2.n < 1) throw ConfigError(f.at("n") + ": must be >= 1");
    if (c.fig2.directions < 1) throw ConfigError(f.at("directions") + ": must be >= 1");
  }
  if (r.has("fig3")) {
    const Reader f = r.child("fig3");
    f.allow({"hyperparameters", "multistart"});
    const std::string h = f.string("hyperparameters", "grid");
    if (h == "grid") c.fig3.hyperparameters = HyperparameterSource::Grid;
    else if (h == "table6") c.fig3.hyperparameters = HyperparameterSource::Table6;
    else throw ConfigError(f.at("hyperparameters") + ": expected grid or table6");
    c.fig3.multistart = f.integer("multistart", 0);
    if (c.fig3.multistart < 0) throw ConfigError(f.at("multistart") + ": must be >= 0");
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = static_cast<long long>(seed);
  j["output_dir"] = output_dir;
  j["format"] = format == OutputFormat::Csv ? "csv" : "json";
  j["datasets"] = json::array();
  for (const auto& s : datasets) j["datasets"].push_back(write_source(s));
  j["methods"] = write_methods(methods);
  j["grid"] = {{"step", write_grid(step_grid)}, {"damping", write_grid(damping_grid)}};
  j["iterations"] = iterations;
  j["mc_samples"] = mc_samples;
  if (theta0) j["theta0"] = write_point(*theta0);
  j["optimize"] = {{"method", to_string(single.method)},
                   {"step_size", single.step_size},
                   {"damping", single.damping},
                   {"iterations", single.iterations}};
  json starts = json::array();
  for (const auto& s : fig1.starts) starts.push_back(write_point(s));
  j["fig1"] = {{"step_size", fig1.step_size},
               {"damping", fig1.damping},
               {"iterations", fig1.iterations},
               {"starts", starts},
               {"field_methods", write_methods(fig1.field_methods)},
               {"field_min", {fig1.field_min[0], fig1.field_min[1]}},
               {"field_max", {fig1.field_max[0], fig1.field_max[1]}},
               {"field_points", {fig1.field_points[0], fig1.field_points[1]}},
               {"trajectory_stride", fig1.trajectory_stride}};
  j["fig2"] = {{"n", fig2.n}, {"directions", fig2.directions}};
  j["fig3"] = {{"hyperparameters",
                fig3.hyperparameters == HyperparameterSource::Grid ? "grid" : "table6"},
               {"multistart", fig3.multistart}};
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config: " + path + " is not valid JSON: " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

// ---------------------------------------------------------------------------

Dataset load_source(const DataSource& source) {
  Dataset data;
  if (source.synthetic) {
    data = generate(*source.synthetic);
  } else {
    const std::string& path = source.libsvm_path.empty() ? source.csv_path : source.libsvm_path;
    if (!std::filesystem::exists(path))
      throw ConfigError("dataset '" + source.name + "': file not found: " + path);
    if (!source.libsvm_path.empty()) {
      LibsvmOptions opts;
      opts.task = source.task;
      data = load_libsvm(path, opts);
    } else {
      data = load_csv(path, source.target_column, source.task.value_or(Task::regression()));
    }
  }
  if (source.standardize) data = standardize(data).first;
  return data;
}

ModelSpec model_for(const DataSource& source, const Dataset& data) {
  if (source.model) return *source.model;
  switch (data.task.kind) {
    case TaskKind::Regression:
      return ModelSpec::linear_gaussian();
    case TaskKind::Binary:
      return ModelSpec::logistic();
    case TaskKind::Multiclass:
      return ModelSpec::softmax(data.task.num_classes);
  }
  return ModelSpec::linear_gaussian();
}

GridResult grid_search(const ExperimentConfig& config, const ModelSpec& model,
                       const Dataset& data, const ParamVector& theta0) {
  const std::vector<double> steps = config.step_grid.exponents();
  const std::vector<double> dampings = config.damping_grid.exponents();
  GridResult result;
  for (Method m : config.methods) {
    result.best[m] = std::nullopt;
    const std::vector<double> lambdas = m == Method::GD ? std::vector<double>{} : dampings;
    for (double s : steps) {
      if (m == Method::GD) {
        result.cells.push_back({m, s, -std::numeric_limits<double>::infinity(), 0, false});
        continue;
      }
      for (double l : lambdas) result.cells.push_back({m, s, l, 0, false});
    }
  }
  const double initial = loss(model, data, theta0);

  const Index count = static_cast<Index>(result.cells.size());
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < count; ++i) {
    GridCell& cell = result.cells[static_cast<std::size_t>(i)];
    OptimizerConfig oc;
    oc.method = cell.method;
    oc.step_size = std::pow(10.0, cell.log10_step);
    oc.damping = std::pow(10.0, cell.log10_damping);
    oc.iterations = config.iterations;
    oc.seed = config.seed;
    oc.mc_samples = config.mc_samples;
    try {
      const Trajectory t = run(oc, model, data, theta0);
      cell.diverged = t.diverged;
      cell.final_loss = initial;
      for (auto it = t.losses.rbegin(); it != t.losses.rend(); ++it)
        if (std::isfinite(*it)) {
          cell.final_loss = *it;
          break;
        }
    } catch (const NumericalError&) {
      cell.diverged = true;
      cell.final_loss = initial;
    }
  }

  for (const GridCell& cell : result.cells) {
    if (cell.diverged) continue;
    auto& best = result.best[cell.method];
    if (!best || cell.final_loss < best->final_loss ||
        (cell.final_loss == best->final_loss &&
         (cell.log10_step < best->log10_step ||
          (cell.log10_step == best->log10_step && cell.log10_damping < best->log10_damping))))
      best = cell;
  }
  return result;
}

namespace {

void write_grid_tables(OutputSink& sink, const std::string& prefix, const GridResult& grid) {
  std::map<Method, Table> tables;
  for (const GridCell& c : grid.cells) {
    auto it = tables.find(c.method);
    if (it == tables.end()) {
      std::vector<std::string> cols{"log10_step"};
      if (c.method != Method::GD) cols.push_back("log10_damping");
      cols.insert(cols.end(), {"final_loss", "diverged"});
      it = tables.emplace(c.method, Table(cols)).first;
    }
    std::vector<double> row{c.log10_step};
    if (c.method != Method::GD) row.push_back(c.log10_damping);
    row.insert(row.end(), {c.final_loss, c.diverged ? 1.0 : 0.0});
    it->second.add(row);
  }
  for (const auto& [m, t] : tables) sink.write(prefix + "grid_" + to_string(m), t);

  for (const auto& [m, b] : grid.best) {
    if (!b) {
      sink.note(prefix + to_string(m) + ": no viable cell");
      continue;
    }
    sink.note(prefix + to_string(m) + ": best log10_step=" + format_double(b->log10_step) +
              (m == Method::GD ? "" : " log10_damping=" + format_double(b->log10_damping)) +
              " final_loss=" + format_double(b->final_loss));
  }
}

Dataset fig1_dataset(const ExperimentConfig& config, const DataSource** source) {
  if (!config.datasets.empty()) {
    *source = &config.datasets.front();
    return load_source(config.datasets.front());
  }
  *source = nullptr;
  SyntheticSpec spec;
  spec.generator = Generator::Fig1Lognormal;
  spec.n = 1000;
  spec.seed = config.seed;
  return generate(spec);
}

double field_scale(Method m) {
  switch (m) {
    case Method::GD:
      return 1.0 / 3.0;
    case Method::EFGD:
      return 3.0;
    default:
      return 1.0;
  }
}

}  // namespace

Fig1Result reproduce_fig1(const ExperimentConfig& config, OutputSink* sink) {
  const DataSource* source = nullptr;
  const Dataset data = fig1_dataset(config, &source);
  const ModelSpec model = source ? model_for(*source, data) : ModelSpec::linear_gaussian();
  if (model.param_dim(data.input_dim()) != 2)
    throw ConfigError("fig1 needs a two-parameter model (one feature plus bias)");

  Fig1Result result;
  result.theta_star = minimize_reference(model, data, ParamVector::Zero(2));
  result.optimum_loss = loss(model, data, result.theta_star);

  // Vector field: negative preconditioned gradients, rescaled per method.
  const auto& fs = config.fig1;
  std::vector<std::string> cols{"theta0", "theta1"};
  for (Method m : fs.field_methods) {
    cols.push_back(to_string(m) + "_d0");
    cols.push_back(to_string(m) + "_d1");
  }
  Table field(cols);
  const Index nx = fs.field_points[0];
  const Index ny = fs.field_points[1];
  std::vector<std::vector<double>> field_rows(static_cast<std::size_t>(nx * ny));
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < nx * ny; ++k) {
    const Index ix = k / ny;
    const Index iy = k % ny;
    ParamVector theta(2);
    theta[0] = nx == 1 ? fs.field_min[0]
                       : fs.field_min[0] + (fs.field_max[0] - fs.field_min[0]) * ix / (nx - 1);
    theta[1] = ny == 1 ? fs.field_min[1]
                       : fs.field_min[1] + (fs.field_max[1] - fs.field_min[1]) * iy / (ny - 1);
    std::vector<double> row{theta[0], theta[1]};
    for (Method m : fs.field_methods) {
      Eigen::VectorXd v =
          -field_scale(m) * update_direction(m, model, data, theta, fs.damping, config.seed, 1);
      row.push_back(v[0]);
      row.push_back(v[1]);
    }
    field_rows[static_cast<std::size_t>(k)] = std::move(row);
  }
  for (auto& row : field_rows) field.add(std::move(row));
  result.field_rows = static_cast<Index>(field.rows.size());
  result.field_columns = static_cast<Index>(cols.size());

  // Trajectories.
  const std::vector<ParamVector> starts = fs.starts.empty() ? fig1_starts() : fs.starts;
  struct Job {
    Method method;
    Index start;
  };
  std::vector<Job> jobs;
  for (Method m : config.methods)
    for (Index s = 0; s < static_cast<Index>(starts.size()); ++s) jobs.push_back({m, s});
  std::vector<Trajectory> trajectories(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (Index j = 0; j < static_cast<Index>(jobs.size()); ++j) {
    OptimizerConfig oc;
    oc.method = jobs[static_cast<std::size_t>(j)].method;
    oc.step_size = fs.step_size;
    oc.damping = fs.damping;
    oc.iterations = fs.iterations;
    oc.seed = config.seed;
    oc.mc_samples = config.mc_samples;
    trajectories[static_cast<std::size_t>(j)] =
        run(oc, model, data, starts[static_cast<std::size_t>(jobs[static_cast<std::size_t>(j)].start)]);
  }

  std::map<Method, Table> traj_tables;
  std::map<Method, Table> summary_tables;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const Trajectory& t = trajectories[j];
    const Method m = jobs[j].method;
    RunSummary s;
    s.method = m;
    s.start_index = jobs[j].start;
    s.start = starts[static_cast<std::size_t>(jobs[j].start)];
    s.final_theta = t.thetas.back();
    s.final_loss = t.losses.back();
    s.distance_to_optimum = (s.final_theta - result.theta_star).norm();
    s.diverged = t.diverged;
    result.runs.push_back(s);

    auto& tt = traj_tables.try_emplace(m, Table({"start", "iteration", "theta0", "theta1", "loss"}))
                   .first->second;
    const Index last = static_cast<Index>(t.thetas.size()) - 1;
    for (Index i = 0; i <= last; ++i) {
      if (i % fs.trajectory_stride != 0 && i != last) continue;
      if (!t.thetas[static_cast<std::size_t>(i)].allFinite() ||
          !std::isfinite(t.losses[static_cast<std::size_t>(i)]))
        break;
      tt.add({static_cast<double>(s.start_index), static_cast<double>(i),
              t.thetas[static_cast<std::size_t>(i)][0], t.thetas[static_cast<std::size_t>(i)][1],
              t.losses[static_cast<std::size_t>(i)]});
    }
    auto& st = summary_tables
                   .try_emplace(m, Table({"start", "start0", "start1", "final0", "final1",
                                          "final_loss", "loss_gap", "distance_to_optimum",
                                          "diverged"}))
                   .first->second;
    if (!t.diverged)
      st.add({static_cast<double>(s.start_index), s.start[0], s.start[1], s.final_theta[0],
              s.final_theta[1], s.final_loss, s.final_loss - result.optimum_loss,
              s.distance_to_optimum, 0.0});
  }

  if (sink) {
    Table opt({"theta0", "theta1", "loss"});
    opt.add({result.theta_star[0], result.theta_star[1], result.optimum_loss});
    sink->write("fig1_optimum", opt);
    sink->write("fig1_field", field);
    for (const auto& [m, t] : traj_tables) sink->write("fig1_trajectory_" + to_string(m), t);
    for (const auto& [m, t] : summary_tables) sink->write("fig1_summary_" + to_string(m), t);
    for (const auto& r : result.runs)
      if (r.diverged)
        sink->note("fig1: " + to_string(r.method) + " from start " +
                   std::to_string(r.start_index) + " diverged");
  }
  return result;
}

const Fig2Entry& Fig2Result::find(const std::string& family, Variant variant) const {
  for (const auto& e : entries)
    if (e.family == family && e.variant == variant) return e;
  throw ConfigError("no fig2 entry for " + family + "/" + to_string(variant));
}

Fig2Result reproduce_fig2(const ExperimentConfig& config, OutputSink* sink) {
  Fig2Result result;
  const std::pair<const char*, Generator> families[] = {
      {"classification", Generator::Table3Classification},
      {"regression", Generator::Table4Regression}};
  for (const auto& [family, generator] : families) {
    const bool classification = generator == Generator::Table3Classification;
    const ModelSpec model = classification ? ModelSpec::logistic() : ModelSpec::linear_gaussian();
    std::optional<Table> summary;
    for (Variant v : {Variant::Correct, Variant::A, Variant::B}) {
      SyntheticSpec spec;
      spec.generator = generator;
      spec.variant = v;
      spec.n = config.fig2.n;
      spec.seed = config.seed;
      const Dataset data = generate(spec);
      const Index d = model.param_dim(data.input_dim());
      const ParamVector theta_star = minimize_reference(model, data, ParamVector::Zero(d));
      const CurvatureMatrix fi = fisher(model, data, theta_star);
      const QuadraticFitReport fit =
          quadratic_fit(model, data, theta_star, fi, config.fig2.directions, config.seed);

      Fig2Entry e;
      e.family = family;
      e.variant = v;
      e.gap = misspecification_gap(model, data, theta_star);
      e.max_ratio_error = fit.max_ratio_error;
      e.gradient_inf_norm = gradient(model, data, theta_star).lpNorm<Eigen::Infinity>();
      if (classification) e.accuracy = classification_accuracy(model, data, theta_star);
      result.entries.push_back(e);

      if (!sink) continue;
      if (!summary) {
        std::vector<std::string> cols{"variant", "gap", "max_ratio_error", "gradient_inf_norm"};
        if (classification) cols.push_back("accuracy");
        for (Index i = 0; i < d; ++i) cols.push_back("theta_star_" + std::to_string(i));
        summary.emplace(cols);
      }
      std::vector<double> row{static_cast<double>(v), e.gap, e.max_ratio_error,
                              e.gradient_inf_norm};
      if (classification) row.push_back(e.accuracy);
      for (Index i = 0; i < d; ++i) row.push_back(theta_star[i]);
      summary->add(row);

      std::vector<std::string> cols;
      for (Index i = 0; i < d; ++i) cols.push_back("d" + std::to_string(i));
      cols.insert(cols.end(), {"true_loss_delta", "fisher_model", "ef_model"});
      Table dirs(cols);
      for (Index k = 0; k < fit.directions.rows(); ++k) {
        std::vector<double> r;
        for (Index i = 0; i < d; ++i) r.push_back(fit.directions(k, i));
        r.insert(r.end(), {fit.true_loss_delta[k], fit.fisher_model[k], fit.ef_model[k]});
        dirs.add(r);
      }
      sink->write(std::string("fig2_") + family + "_" + to_string(v) + "_directions", dirs);
    }
    if (sink) sink->write(std::string("fig2_") + family, *summary);
  }
  return result;
}

std::optional<std::map<Method, SingleRun>> table6_hyperparameters(const std::string& dataset) {
  struct Row {
    const char* name;
    double gd, ngd, ngd_l, efgd, efgd_l;
  };
  static const Row rows[] = {
      {"boston", -5.250, 0.125, -10.0, -1.250, -8.0},
      {"breastcancer", -5.125, 0.125, -10.0, -1.250, -10.0},
      {"a1a", 0.250, 0.250, -10.0, -0.375, -8.0},
      {"wine", -5.625, 0.000, -8.5, -1.375, -6.0},
      {"energy", -5.500, 0.000, -7.5, 0.875, -3.0},
      {"powerplant", -5.750, -0.625, -8.0, 3.375, -1.0},
      {"yacht", -1.500, -0.750, -7.5, 1.625, -6.5},
  };
  std::string key;
  for (char c : dataset) key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const Row& r : rows) {
    if (key != r.name) continue;
    std::map<Method, SingleRun> out;
    out[Method::GD] = {Method::GD, std::pow(10.0, r.gd), 0.0, 100};
    out[Method::NGD] = {Method::NGD, std::pow(10.0, r.ngd), std::pow(10.0, r.ngd_l), 100};
    out[Method::EFGD] = {Method::EFGD, std::pow(10.0, r.efgd), std::pow(10.0, r.efgd_l), 100};
    return out;
  }
  return std::nullopt;
}

Fig3Result reproduce_fig3(const ExperimentConfig& config, OutputSink* sink) {
  std::vector<DataSource> sources = config.datasets;
  if (sources.empty()) {
    DataSource s;
    s.name = "fig1";
    SyntheticSpec spec;
    spec.seed = config.seed;
    s.synthetic = spec;
    sources.push_back(s);
  }

  Fig3Result result;
  for (const DataSource& source : sources) {
    Dataset data;
    try {
      data = load_source(source);
    } catch (const ConfigError& e) {
      result.skipped.push_back(source.name);
      if (sink) sink->note("fig3: skipped " + source.name + ": " + e.what());
      continue;
    }
    const ModelSpec model = model_for(source, data);
    const Index d = model.param_dim(data.input_dim());
    ParamVector theta0 = ParamVector::Zero(d);
    if (config.theta0 && config.theta0->size() == d) theta0 = *config.theta0;
    const std::string prefix = "fig3_" + source.name + "_";

    Fig3Dataset out;
    out.name = source.name;
    std::optional<std::map<Method, SingleRun>> table6;
    if (config.fig3.hyperparameters == HyperparameterSource::Table6) {
      table6 = table6_hyperparameters(source.name);
      if (!table6 && sink) sink->note("fig3: no fixed hyperparameters for " + source.name + "; grid search");
    }
    if (table6) {
      for (Method m : config.methods)
        if (table6->count(m)) out.hyperparameters[m] = table6->at(m);
    } else {
      const GridResult grid = grid_search(config, model, data, theta0);
      if (sink) write_grid_tables(*sink, prefix, grid);
      for (const auto& [m, best] : grid.best)
        if (best)
          out.hyperparameters[m] = {m, std::pow(10.0, best->log10_step),
                                    m == Method::GD ? 0.0 : std::pow(10.0, best->log10_damping),
                                    config.iterations};
    }

    for (const auto& [m, h] : out.hyperparameters) {
      OptimizerConfig oc;
      oc.method = m;
      oc.step_size = h.step_size;
      oc.damping = h.damping;
      oc.iterations = config.iterations;
      oc.seed = config.seed;
      oc.mc_samples = config.mc_samples;
      oc.record_cosine = m == Method::EFGD;
      Trajectory t = run(oc, model, data, theta0);
      if (m == Method::EFGD)
        for (std::size_t i = 0; i < t.steps.size(); ++i)
          if (t.steps[i].cosine_to_ngd) out.cosine.push_back(*t.steps[i].cosine_to_ngd);
      if (sink) {
        Table curve({"iteration", "loss"});
        for (std::size_t i = 0; i < t.losses.size(); ++i)
          if (std::isfinite(t.losses[i])) curve.add({static_cast<double>(i), t.losses[i]});
        sink->write(prefix + "loss_" + to_string(m), curve);
        if (m == Method::EFGD) {
          Table cos({"iteration", "cosine"});
          for (std::size_t i = 0; i < t.steps.size(); ++i)
            if (t.steps[i].cosine_to_ngd) cos.add({static_cast<double>(i), *t.steps[i].cosine_to_ngd});
          sink->write(prefix + "cosine", cos);
        }
        if (t.diverged) sink->note("fig3: " + source.name + " " + to_string(m) + " diverged");
      }
      out.runs.emplace(m, std::move(t));
    }

    if (config.fig3.multistart > 0 && out.hyperparameters.count(Method::EFGD)) {
      const ParamVector theta_star = minimize_reference(model, data, theta0);
      const SingleRun& h = out.hyperparameters.at(Method::EFGD);
      std::mt19937_64 rng(config.seed);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      std::vector<ParamVector> starts;
      for (Index k = 0; k < config.fig3.multistart; ++k) {
        ParamVector s(d);
        for (Index i = 0; i < d; ++i) s[i] = unit(rng) * std::abs(theta_star[i]);
        starts.push_back(s);
      }
      std::vector<MultistartRun> ms(starts.size());
#pragma omp parallel for schedule(dynamic)
      for (Index k = 0; k < static_cast<Index>(starts.size()); ++k) {
        OptimizerConfig oc;
        oc.method = Method::EFGD;
        oc.step_size = h.step_size;
        oc.damping = h.damping;
        oc.iterations = config.iterations;
        const Trajectory t = run(oc, model, data, starts[static_cast<std::size_t>(k)]);
        double last = t.losses.front();
        for (double l : t.losses)
          if (std::isfinite(l)) last = l;
        ms[static_cast<std::size_t>(k)] = {(starts[static_cast<std::size_t>(k)] - theta_star).norm(),
                                           t.losses.front(), last};
      }
      out.multistart = ms;
      if (sink) {
        Table t({"start", "initial_distance", "initial_loss", "final_loss"});
        for (std::size_t k = 0; k < ms.size(); ++k)
          t.add({static_cast<double>(k), ms[k].initial_distance, ms[k].initial_loss,
                 ms[k].final_loss});
        sink->write(prefix + "multistart", t);
      }
    }
    result.datasets.push_back(std::move(out));
  }
  return result;
}

}  // namespace eflab
