// Copyright 2026 The Q-Patch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpatch/common.hpp"

namespace qpatch {

/// Shortest text that parses back to exactly the same double.
std::string format_double(double value);

/// Parses a double, throwing InputError with `context` on failure.
double parse_double(const std::string& text, const std::string& context);

/// One CSV table: header plus string cells. Cells never contain commas.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position by name; throws InputError when absent.
    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path, bool has_header = true);

/// Writes the whole file to a temporary sibling and renames it into place,
/// so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Dense matrix as header-less CSV, one row per matrix row.
void write_matrix_csv(const std::filesystem::path& path, const MatrixXd& m);
MatrixXd read_matrix_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// FNV-1a digest of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

}  // namespace qpatch
