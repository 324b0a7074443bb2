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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace eflab {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

Task parse_task_name(const std::string& name, int classes) {
  if (name == "regression") return Task::regression();
  if (name == "binary") return Task::binary();
  if (name == "multiclass") {
    if (classes < 2) throw ConfigError("multiclass task needs classes >= 2");
    return Task::multiclass(classes);
  }
  throw ConfigError("unknown task '" + name + "' (expected regression, binary, multiclass)");
}

// Maps raw numeric targets onto the requested (or inferred) task.
void assign_targets(Dataset& d, const std::vector<double>& raw, std::optional<Task> task) {
  std::set<double> distinct(raw.begin(), raw.end());
  const bool integral = std::all_of(raw.begin(), raw.end(),
                                    [](double v) { return v == std::floor(v); });
  const bool pm_one = std::all_of(distinct.begin(), distinct.end(),
                                  [](double v) { return v == -1 || v == 0 || v == 1; });
  const bool one_two =
      std::all_of(distinct.begin(), distinct.end(), [](double v) { return v == 1 || v == 2; });

  if (!task) {
    if (pm_one || one_two)
      task = Task::binary();
    else if (integral && distinct.size() <= 64)
      task = Task::multiclass(static_cast<int>(distinct.size()));
    else
      task = Task::regression();
  }
  d.task = *task;
  d.labels.clear();
  d.targets.resize(0);

  switch (d.task.kind) {
    case TaskKind::Regression:
      d.targets = Eigen::Map<const Eigen::VectorXd>(raw.data(), static_cast<Index>(raw.size()));
      return;
    case TaskKind::Binary: {
      if (!(pm_one || one_two)) throw ConfigError("binary labels must be {-1,+1}, {0,1} or {1,2}");
      const bool shifted = one_two && !pm_one;
      for (double v : raw) d.labels.push_back(shifted ? static_cast<int>(v) - 1 : (v > 0 ? 1 : 0));
      return;
    }
    case TaskKind::Multiclass: {
      if (!integral) throw ConfigError("multiclass labels must be integers");
      std::map<double, int> index;
      for (double v : distinct) index.emplace(v, static_cast<int>(index.size()));
      if (static_cast<int>(index.size()) > d.task.num_classes)
        throw ConfigError("more distinct labels than classes");
      for (double v : raw) d.labels.push_back(index.at(v));
      return;
    }
  }
}

struct LibsvmHeader {
  Task task;
  Index features = 0;
};

std::optional<LibsvmHeader> parse_header(std::string_view line, std::size_t line_no) {
  const auto tokens = split_whitespace(line);
  if (tokens.size() < 3 || tokens[0] != "#" || tokens[1] != "eflab-libsvm") return std::nullopt;
  if (tokens[2] != "v1") throw ParseError("unsupported eflab-libsvm version", line_no);
  std::string task = "regression";
  int classes = 0;
  LibsvmHeader h;
  for (std::size_t i = 3; i < tokens.size(); ++i) {
    const auto kv = split(tokens[i], '=');
    if (kv.size() != 2) throw ParseError("malformed header field", line_no);
    const auto value = to_integer(kv[1]);
    if (kv[0] == "task") task = std::string(kv[1]);
    else if (kv[0] == "classes" && value) classes = static_cast<int>(*value);
    else if (kv[0] == "features" && value) h.features = static_cast<Index>(*value);
    else throw ParseError("malformed header field", line_no);
  }
  h.task = parse_task_name(task, classes);
  return h;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options) {
  struct Row {
    double label;
    std::vector<std::pair<Index, double>> entries;
  };
  std::vector<Row> rows;
  std::optional<LibsvmHeader> header;
  Index max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (rows.empty() && !header) header = parse_header(view, line_no);
      continue;
    }
    const auto tokens = split_whitespace(view);
    Row row;
    const auto label = to_double(tokens[0]);
    if (!label || !std::isfinite(*label)) throw ParseError("non-numeric label", line_no);
    row.label = *label;
    Index previous = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto colon = tokens[t].find(':');
      if (colon == std::string_view::npos) throw ParseError("missing ':' in feature", line_no);
      const auto index = to_integer(tokens[t].substr(0, colon));
      if (!index) throw ParseError("non-numeric feature index", line_no);
      if (*index < 1) throw ParseError("feature index < 1", line_no);
      if (*index <= previous) throw ParseError("non-increasing feature index", line_no);
      const auto value = to_double(tokens[t].substr(colon + 1));
      if (!value) throw ParseError("non-numeric feature value", line_no);
      if (!std::isfinite(*value)) throw ParseError("non-finite feature value", line_no);
      previous = static_cast<Index>(*index);
      row.entries.emplace_back(previous, *value);
    }
    max_index = std::max(max_index, previous);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no samples", line_no == 0 ? 1 : line_no);

  Index columns = std::max(max_index, options.num_features);
  if (header) columns = std::max(columns, header->features);
  Dataset d;
  d.features = Eigen::MatrixXd::Zero(static_cast<Index>(rows.size()), columns);
  std::vector<double> raw;
  raw.reserve(rows.size());
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (const auto& [index, value] : rows[n].entries)
      d.features(static_cast<Index>(n), index - 1) = value;
    raw.push_back(rows[n].label);
  }
  if (header && header->task.is_classification()) {
    d.task = header->task;
    for (double v : raw) d.labels.push_back(static_cast<int>(v));
  } else {
    assign_targets(d, raw, header ? std::optional<Task>(header->task) : options.task);
  }
  d.validate();
  return d;
}

Dataset load_libsvm(const std::filesystem::path& path, const LibsvmOptions& options) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open LIBSVM file " + path.string());
  return parse_libsvm(in, options);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  out << "# eflab-libsvm v1 task=" << data.task.name();
  if (data.task.kind == TaskKind::Multiclass) out << " classes=" << data.task.num_classes;
  out << " features=" << data.input_dim() << '\n';
  for (Index n = 0; n < data.size(); ++n) {
    if (data.task.is_classification())
      out << data.labels[static_cast<std::size_t>(n)];
    else
      out << format_double(data.targets[n]);
    for (Index k = 0; k < data.input_dim(); ++k)
      if (data.features(n, k) != 0) out << ' ' << (k + 1) << ':' << format_double(data.features(n, k));
    out << '\n';
  }
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split(view, ',');
    if (!have_header) {
      std::set<std::string> seen;
      for (auto f : fields) {
        const std::string name(trim(f));
        if (name.empty()) throw ParseError("empty column name", line_no);
        if (!seen.insert(name).second) throw ParseError("duplicate column name '" + name + "'", line_no);
        table.headers.push_back(name);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.headers.size())
      throw ParseError("ragged row: expected " + std::to_string(table.headers.size()) +
                           " fields, got " + std::to_string(fields.size()),
                       line_no);
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto cell = trim(fields[c]);
      const auto value = to_double(cell);
      if (!value || !std::isfinite(*value))
        throw ParseError("non-numeric cell '" + std::string(cell) + "' in column '" +
                             table.headers[c] + "'",
                         line_no);
      row.push_back(*value);
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("missing header row", line_no == 0 ? 1 : line_no);
  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.headers.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      table.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return table;
}

Dataset parse_csv(std::istream& in, std::string_view target_column, Task task) {
  const CsvTable table = read_csv(in);
  const auto it = std::find(table.headers.begin(), table.headers.end(), target_column);
  if (it == table.headers.end()) {
    std::string available;
    for (const auto& h : table.headers) available += (available.empty() ? "" : ", ") + h;
    throw ParseError("missing target column '" + std::string(target_column) +
                         "'; available columns: " + available,
                     1);
  }
  if (table.values.rows() == 0) throw ParseError("no data rows", 1);
  const Index target = static_cast<Index>(it - table.headers.begin());
  Dataset d;
  d.features.resize(table.values.rows(), table.values.cols() - 1);
  Index out = 0;
  for (Index c = 0; c < table.values.cols(); ++c)
    if (c != target) d.features.col(out++) = table.values.col(c);
  std::vector<double> raw(table.values.col(target).data(),
                          table.values.col(target).data() + table.values.rows());
  assign_targets(d, raw, task);
  d.validate();
  return d;
}

Dataset load_csv(const std::filesystem::path& path, std::string_view target_column, Task task) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file " + path.string());
  return parse_csv(in, target_column, task);
}

std::string to_string(Generator generator) {
  switch (generator) {
    case Generator::Fig1Lognormal:
      return "fig1_lognormal";
    case Generator::Table3Classification:
      return "table3_classification";
    case Generator::Table4Regression:
      return "table4_regression";
  }
  return "?";
}

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::Correct:
      return "correct";
    case Variant::A:
      return "A";
    case Variant::B:
      return "B";
  }
  return "?";
}

Generator parse_generator(const std::string& name) {
  if (name == "fig1_lognormal") return Generator::Fig1Lognormal;
  if (name == "table3_classification") return Generator::Table3Classification;
  if (name == "table4_regression") return Generator::Table4Regression;
  throw ConfigError("unknown generator '" + name +
                    "' (expected fig1_lognormal, table3_classification, table4_regression)");
}

Variant parse_variant(const std::string& name) {
  if (name == "correct") return Variant::Correct;
  if (name == "A" || name == "a") return Variant::A;
  if (name == "B" || name == "b") return Variant::B;
  throw ConfigError("unknown variant '" + name + "' (expected correct, A, B)");
}

namespace {

struct ClassConditional {
  Eigen::Vector2d mean;
  Eigen::Matrix2d cov;
};

std::pair<ClassConditional, ClassConditional> table3_classes(Variant v) {
  auto iso = [](double s) { return Eigen::Matrix2d(Eigen::Matrix2d::Identity() * s); };
  switch (v) {
    case Variant::Correct:
      return {{{1, 1}, iso(2)}, {{-1, -1}, iso(2)}};
    case Variant::A:
      return {{{1.5, 1.5}, iso(3)}, {{-1.5, -1.5}, iso(1)}};
    case Variant::B: {
      Eigen::Matrix2d c0;
      c0 << 1.5, -0.9, -0.9, 1.5;
      Eigen::Matrix2d c1;
      c1 << 1.5, 0.9, 0.9, 1.5;
      return {{{-1, -1}, c0}, {{1, 1}, c1}};
    }
  }
  return {};
}

}  // namespace

Dataset generate(const SyntheticSpec& spec) {
  if (spec.n < 1) throw ConfigError("synthetic dataset needs n >= 1");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const Index n = spec.n;
  Dataset d;

  switch (spec.generator) {
    case Generator::Fig1Lognormal: {
      const double noise = spec.noise_sd.value_or(1.0);
      d.features.resize(n, 1);
      d.targets.resize(n);
      for (Index i = 0; i < n; ++i) {
        const double x = std::exp(spec.lognormal_sigma * normal(rng));
        d.features(i, 0) = x;
        d.targets[i] = 2.0 + 2.0 * x + noise * normal(rng);
      }
      d.task = Task::regression();
      break;
    }
    case Generator::Table3Classification: {
      const auto [c0, c1] = table3_classes(spec.variant);
      const Eigen::Matrix2d l0 = c0.cov.llt().matrixL();
      const Eigen::Matrix2d l1 = c1.cov.llt().matrixL();
      d.features.resize(n, 2);
      d.labels.resize(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) {
        const int y = uniform(rng) < 0.5 ? 0 : 1;
        Eigen::Vector2d z;
        z[0] = normal(rng);
        z[1] = normal(rng);
        const Eigen::Vector2d x = y == 0 ? Eigen::Vector2d(c0.mean + l0 * z)
                                         : Eigen::Vector2d(c1.mean + l1 * z);
        d.features.row(i) = x.transpose();
        d.labels[static_cast<std::size_t>(i)] = y;
      }
      d.task = Task::binary();
      break;
    }
    case Generator::Table4Regression: {
      const double noise = spec.noise_sd.value_or(spec.variant == Variant::A ? 2.0 : 1.0);
      d.features.resize(n, 1);
      d.targets.resize(n);
      for (Index i = 0; i < n; ++i) {
        const double x = normal(rng);
        double y = x + noise * normal(rng);
        if (spec.variant == Variant::B) y += 0.5 * x * x;
        d.features(i, 0) = x;
        d.targets[i] = y;
      }
      d.task = Task::regression();
      break;
    }
  }
  d.validate();
  return d;
}

std::pair<Dataset, StandardizationReport> standardize(const Dataset& data) {
  StandardizationReport report;
  const Index cols = data.input_dim();
  const double n = static_cast<double>(data.size());
  report.mean = data.features.colwise().mean().transpose();
  report.sd.resize(cols);
  report.zero_variance.assign(static_cast<std::size_t>(cols), false);
  Dataset out = data;
  for (Index c = 0; c < cols; ++c) {
    const auto centered = data.features.col(c).array() - report.mean[c];
    report.sd[c] = std::sqrt(centered.square().sum() / n);
    if (report.sd[c] <= 1e-12 * std::max(1.0, std::abs(report.mean[c]))) {
      report.zero_variance[static_cast<std::size_t>(c)] = true;
      continue;
    }
    out.features.col(c) = (centered / report.sd[c]).matrix();
  }
  return {std::move(out), std::move(report)};
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw NumericalError("cannot format number");
  return std::string(buf, ptr);
}

}  // namespace eflab
