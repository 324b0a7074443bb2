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

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace eflab {

enum class OutputFormat { Csv, Json };

OutputFormat parse_format(const std::string& name);

/// A numeric table with a fixed column order. CSV output parses with
/// read_csv; JSON output is an array of objects with the same field names.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}
  void add(std::vector<double> row);
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Collects the files written by one run and records them in manifest.json,
/// which is written last.
class OutputSink {
 public:
  OutputSink(std::filesystem::path dir, OutputFormat format);

  // `stem` without extension; returns the file name written.
  std::string write(const std::string& stem, const Table& table);
  std::string write_text(const std::string& file_name, const std::string& text);
  void note(const std::string& message);

  void write_manifest(const std::string& command, const nlohmann::json& config,
                      std::uint64_t seed) const;

  const std::vector<std::string>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  OutputFormat format_;
  std::vector<std::string> files_;
  std::vector<std::string> notes_;
};

/// 64-bit FNV-1a of the canonical (sorted-key) JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace eflab
