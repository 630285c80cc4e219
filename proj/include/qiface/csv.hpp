// Copyright 2026 The qiface Authors
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

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace qiface {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

/// Header plus string cells; numeric formatting happens at insertion so a
/// written file re-reads bit identically.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != header.size())
      throw std::invalid_argument("Table: row width mismatch");
    rows.push_back(std::move(row));
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::invalid_argument("Table: no column '" + name + "'");
  }

  std::vector<double> numeric_column(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(parse_double(row[c]));
    return out;
  }
};

namespace detail {

inline void split_csv_line(const std::string& line,
                           std::vector<std::string>& out) {
  out.clear();
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.emplace_back(line, start, i - start);
      start = i + 1;
    }
  }
}

}  // namespace detail

/// Writes LF-terminated CSV via a temporary file renamed into place, so a
/// crash mid-write never leaves a truncated file at the target path.
inline void write_csv(const std::filesystem::path& path, const Table& t) {
  std::ostringstream body;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    body << (i ? "," : "") << t.header[i];
  body << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      body << (i ? "," : "") << row[i];
    body << '\n';
  }

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string());
    f << body.str();
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline Table read_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && f.eof()) break;
    if (first) {
      detail::split_csv_line(line, t.header);
      first = false;
    } else {
      std::vector<std::string> row;
      detail::split_csv_line(line, row);
      if (row.size() != t.header.size())
        throw std::runtime_error(path.string() + ": ragged row");
      t.rows.push_back(std::move(row));
    }
  }
  if (first) throw std::runtime_error(path.string() + ": empty file");
  return t;
}

}  // namespace qiface
