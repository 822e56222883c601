// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/error.hpp"

namespace emem {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kDuplicate: return "duplicate";
    case ErrorCode::kNotFound: return "not found";
    case ErrorCode::kMalformed: return "malformed";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kUnknownDtype: return "unknown dtype";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kIo: return "i/o";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace emem
