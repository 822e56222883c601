// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "reports.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <json.hpp>
#include <ostream>

#include "emem/csv.hpp"
#include "emem/error.hpp"
#include "emem/version.hpp"

namespace emem::cli {

Format parse_format(std::string_view name) {
  if (name == "text") return Format::kText;
  if (name == "csv") return Format::kCsv;
  if (name == "json") return Format::kJson;
  fail(ErrorCode::kInvalidArgument, "unknown format '" + std::string(name) + "'");
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) fail(ErrorCode::kIo, "sha256 init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

void Provenance::add_input(const std::filesystem::path& path) {
  const std::string p = path.string();
  if (std::none_of(inputs.begin(), inputs.end(), [&](const auto& kv) { return kv.first == p; })) {
    inputs.emplace_back(p, std::filesystem::is_directory(path) ? std::string("directory") : sha256_file(path));
  }
}

void Provenance::write_comment(std::ostream& out) const {
  out << "# " << version_string() << '\n';
  for (const auto& [path, hash] : inputs) out << "# input " << path << " sha256=" << hash << '\n';
  if (seed) out << "# seed " << *seed << '\n';
}

std::string Provenance::json() const {
  nlohmann::ordered_json j;
  j["version"] = version_string();
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& [path, hash] : inputs) j["inputs"].push_back({{"path", path}, {"sha256", hash}});
  if (seed) j["seed"] = *seed;
  return j.dump();
}

std::string version_string() { return std::string("emem ") + std::string(kVersion); }

std::string signed_fixed(double v, int digits) { return fmt::format("{:+.{}f}", v, digits); }
std::string fixed(double v, int digits) { return fmt::format("{:.{}f}", v, digits); }

void TextTable::write(std::ostream& out) const {
  std::vector<std::size_t> width(header_.size(), 0);
  auto widen = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());
  };
  widen(header_);
  for (const auto& r : rows_) widen(r);
  auto line = [&](const std::vector<std::string>& row) {
    std::string s;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) s += "  ";
      s += row[c];
      if (c + 1 < row.size()) s.append(width[c] - row[c].size(), ' ');
    }
    out << s << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

void TextTable::write_csv(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv::quote(row[c]);
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

}  // namespace emem::cli
