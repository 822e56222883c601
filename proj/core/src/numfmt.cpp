// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/numfmt.hpp"

#include <charconv>

#include "emem/error.hpp"

namespace emem {

std::string format_exact(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) fail(ErrorCode::kInvalidArgument, "cannot format number");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '+')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    fail(ErrorCode::kInvalidArgument, "'" + std::string(text) + "' is not a number");
  }
  return v;
}

}  // namespace emem
