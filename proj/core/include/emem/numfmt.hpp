// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace emem {

// Shortest decimal text that parses back to the same double.
std::string format_exact(double value);
double parse_double(std::string_view text);

}  // namespace emem
