// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

// Report formatting shared by the subcommands.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emem::cli {

enum class Format { kText, kCsv, kJson };

Format parse_format(std::string_view name);

std::string sha256_file(const std::filesystem::path& path);

// Inputs and seed a report was computed from. Paths print as given so that
// reruns from the same directory are byte-identical.
struct Provenance {
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::optional<std::uint64_t> seed;

  void add_input(const std::filesystem::path& path);
  // "# "-prefixed lines for text and CSV reports.
  void write_comment(std::ostream& out) const;
  std::string json() const;
};

std::string version_string();

// Fixed-point with an explicit sign, e.g. +2.60.
std::string signed_fixed(double v, int digits);
std::string fixed(double v, int digits);

// Column-aligned plain text table.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  void write(std::ostream& out) const;
  void write_csv(std::ostream& out) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace emem::cli
