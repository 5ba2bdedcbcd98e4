// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace lidarperf {

/// Formats a double with 9 significant digits (CSV convention).
inline std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

/// Writes `content` to `path` atomically (temp file + rename), creating
/// parent directories as needed.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

/// Reads a whole file; throws ParseError if unreadable.
std::string read_file(const std::filesystem::path& path);

/// Splits a CSV file into rows of cells, skipping `#` comment lines and the
/// header row. Cells never contain commas in any lidarperf format.
std::vector<std::vector<std::string>> read_csv_rows(
    const std::filesystem::path& path);

}  // namespace lidarperf
