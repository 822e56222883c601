// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

// Minimal RFC 4180 reader for experiment tables: quoted fields, CRLF, blank
// lines and '#' comment lines skipped.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emem::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // source line of each row

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
};

Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);

std::string quote(std::string_view field);

}  // namespace emem::csv
