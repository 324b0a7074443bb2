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

#include "eflab/output.hpp"

#include "eflab/data_io.hpp"
#include "eflab/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace eflab {

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw ConfigError("unknown format '" + name + "' (expected csv, json)");
}

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw DimensionError("table row width mismatch");
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json Table::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[columns[c]] = row[c];
    arr.push_back(std::move(obj));
  }
  return arr;
}

OutputSink::OutputSink(std::filesystem::path dir, OutputFormat format)
    : dir_(std::move(dir)), format_(format) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir_.string());
}

std::string OutputSink::write_text(const std::string& file_name, const std::string& text) {
  std::ofstream out(dir_ / file_name, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + (dir_ / file_name).string());
  out << text;
  files_.push_back(file_name);
  return file_name;
}

std::string OutputSink::write(const std::string& stem, const Table& table) {
  for (const auto& row : table.rows)
    for (double v : row)
      if (!std::isfinite(v)) throw NumericalError("table '" + stem + "' has a non-finite value");
  if (format_ == OutputFormat::Csv) return write_text(stem + ".csv", table.to_csv());
  return write_text(stem + ".json", table.to_json().dump(2) + "\n");
}

void OutputSink::note(const std::string& message) { notes_.push_back(message); }

void OutputSink::write_manifest(const std::string& command, const nlohmann::json& config,
                                std::uint64_t seed) const {
  nlohmann::json m;
  m["tool"] = "eflab";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["config_hash"] = config_hash(config);
  m["seed"] = seed;
  m["files"] = files_;
  m["notes"] = notes_;
  m["config"] = config;
  std::ofstream out(dir_ / "manifest.json", std::ios::binary);
  if (!out) throw ConfigError("cannot write manifest in " + dir_.string());
  out << m.dump(2) << '\n';
}

std::string config_hash(const nlohmann::json& config) {
  const std::string text = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace eflab
