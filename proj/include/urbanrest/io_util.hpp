// Copyright 2026 The urbanrest Authors
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

#ifndef URBANREST_IO_UTIL_HPP_
#define URBANREST_IO_UTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace urbanrest::io {

inline constexpr int kFormatVersion = 1;

// "# urbanrest-<kind> v1": first line of every text artifact we write.
std::string FormatHeader(std::string_view kind);

// Content lines of a text file: blank lines and '#' comments are dropped.
// A "# urbanrest-<kind> vN" header, when present, must name `kind` (if
// nonempty) and a supported version.
std::vector<std::string> ReadDataLines(const std::filesystem::path& path,
                                       std::string_view kind = {});

std::string ReadFile(const std::filesystem::path& path);

// Writes via a sibling temp file and rename.
void WriteFile(const std::filesystem::path& path, std::string_view content);

// Appends one line and fsyncs before returning.
void AppendLineDurable(const std::filesystem::path& path, std::string_view line);

// JSON header line followed by little-endian IEEE-754 doubles.
void WriteBinaryDoubles(const std::filesystem::path& path,
                        nlohmann::json header, std::span<const double> values);
struct BinaryDoubles {
  nlohmann::json header;
  std::vector<double> values;
};
BinaryDoubles ReadBinaryDoubles(const std::filesystem::path& path,
                                std::string_view format);

// Shortest round-trip decimal form.
std::string FormatDouble(double v);
double ParseDouble(std::string_view text, std::string_view what);
long long ParseInt(std::string_view text, std::string_view what);

std::string_view Trim(std::string_view s);
std::vector<std::string_view> Split(std::string_view s, char sep);
std::vector<std::string_view> SplitWhitespace(std::string_view s);

// Stable 64-bit FNV-1a, used for provenance hashes.
std::uint64_t Fnv1a(std::string_view bytes);
std::string Hex64(std::uint64_t v);

}  // namespace urbanrest::io

#endif  // URBANREST_IO_UTIL_HPP_
