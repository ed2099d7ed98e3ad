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

#include "urbanrest/io_util.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <bit>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "urbanrest/error.hpp"

namespace urbanrest::io {
namespace fs = std::filesystem;

std::string FormatHeader(std::string_view kind) {
  return "# urbanrest-" + std::string(kind) + " v" +
         std::to_string(kFormatVersion);
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowData("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> ReadDataLines(const fs::path& path,
                                       std::string_view kind) {
  const std::string text = ReadFile(path);
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = Trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      constexpr std::string_view kPrefix = "# urbanrest-";
      if (t.starts_with(kPrefix)) {
        const auto parts = SplitWhitespace(t.substr(2));
        if (parts.size() != 2 || !parts[1].starts_with("v")) {
          ThrowData(path.string() + ": malformed format header");
        }
        const std::string_view got_kind = parts[0].substr(kPrefix.size() - 2);
        if (!kind.empty() && got_kind != kind) {
          ThrowData(path.string() + ": expected a '" + std::string(kind) +
                    "' file, found '" + std::string(got_kind) + "'");
        }
        const long long version = ParseInt(parts[1].substr(1), "format version");
        if (version != kFormatVersion) {
          ThrowData(path.string() + ": unsupported format version " +
                    std::to_string(version));
        }
      }
      continue;
    }
    lines.emplace_back(t);
  }
  return lines;
}

void WriteFile(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) ThrowData("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) ThrowData("write failed: " + path.string());
  }
  fs::rename(tmp, path);
}

void AppendLineDurable(const fs::path& path, std::string_view line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) ThrowData("cannot open ledger " + path.string());
  std::string buf(line);
  buf.push_back('\n');
  std::size_t off = 0;
  while (off < buf.size()) {
    const ssize_t n = ::write(fd, buf.data() + off, buf.size() - off);
    if (n < 0) {
      ::close(fd);
      ThrowData("ledger write failed: " + path.string());
    }
    off += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

void WriteBinaryDoubles(const fs::path& path, nlohmann::json header,
                        std::span<const double> values) {
  header["version"] = kFormatVersion;
  header["count"] = values.size();
  header["encoding"] = "f64le";
  std::string out = header.dump();
  out.push_back('\n');
  out.reserve(out.size() + values.size() * 8);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
  }
  WriteFile(path, out);
}

BinaryDoubles ReadBinaryDoubles(const fs::path& path, std::string_view format) {
  const std::string raw = ReadFile(path);
  const auto nl = raw.find('\n');
  if (nl == std::string::npos) ThrowData(path.string() + ": missing header");
  BinaryDoubles result;
  try {
    result.header = nlohmann::json::parse(raw.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    ThrowData(path.string() + ": bad header: " + e.what());
  }
  if (result.header.value("format", "") != format) {
    ThrowData(path.string() + ": expected format " + std::string(format));
  }
  if (result.header.value("version", -1) != kFormatVersion) {
    ThrowData(path.string() + ": unsupported format version");
  }
  const std::size_t count = result.header.value("count", std::size_t{0});
  if (raw.size() - nl - 1 != count * 8) {
    ThrowData(path.string() + ": payload size mismatch");
  }
  result.values.resize(count);
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data() + nl + 1);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(p[8 * i + b]) << (8 * b);
    }
    result.values[i] = std::bit_cast<double>(bits);
  }
  return result;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ParseDouble(std::string_view text, std::string_view what) {
  text = Trim(text);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    ThrowData("invalid number for " + std::string(what) + ": '" +
              std::string(text) + "'");
  }
  return v;
}

long long ParseInt(std::string_view text, std::string_view what) {
  text = Trim(text);
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    ThrowData("invalid integer for " + std::string(what) + ": '" +
              std::string(text) + "'");
  }
  return v;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::vector<std::string_view> SplitWhitespace(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) parts.push_back(s.substr(start, i - start));
  }
  return parts;
}

std::uint64_t Fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace urbanrest::io
