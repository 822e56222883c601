// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emem {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kShapeMismatch,
  kDuplicate,
  kNotFound,
  kMalformed,
  kTruncated,
  kUnknownDtype,
  kDegenerate,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every domain failure in the library surfaces as an emem::Error. The code
// lets callers (and the CLI exit-code mapping) tell failure classes apart
// without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace emem
