// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace emem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// Runs the emem command line. args excludes the program name. Reports go to
// out, diagnostics and usage text to err.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace emem::cli
