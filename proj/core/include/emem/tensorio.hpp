// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

// Portable tensor container (.emt).
//
// Layout:
//   [u64 little-endian N][N bytes of UTF-8 JSON header][payload]
//
// Header:
//   {"version": 1,
//    "entries": [{"name", "dtype": "f32", "shape": [...], "offset", "length"}],
//    "metadata": {"key": "value", ...}}          // optional
//
// Offsets are relative to the start of the payload. Payload values are raw
// little-endian IEEE-754 binary32. Entries are sorted by offset and never
// overlap; gaps are allowed and zero-filled by the writer.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emem::tensorio {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kFileExtension = ".emt";

// Upper bound on the JSON header; anything larger is treated as hostile.
inline constexpr std::uint64_t kMaxHeaderBytes = 64ull << 20;

enum class DType { kF32 };

std::string_view to_string(DType dtype);
DType parse_dtype(std::string_view name);

struct TensorEntry {
  std::string name;
  DType dtype = DType::kF32;
  std::vector<std::uint64_t> shape;
  std::uint64_t byte_offset = 0;
  std::uint64_t byte_length = 0;

  std::uint64_t element_count() const;

  bool operator==(const TensorEntry&) const = default;
};

struct TensorManifest {
  int format_version = kFormatVersion;
  std::vector<TensorEntry> entries;
  std::map<std::string, std::string> metadata;

  // Throws Error{kMalformed|kShapeMismatch|kDuplicate} on the first violated
  // invariant: positive shapes, shape product x 4 == byte_length, unique
  // names, entries sorted by offset and non-overlapping.
  void validate() const;

  // One past the last payload byte referenced by any entry.
  std::uint64_t payload_size() const;

  const TensorEntry* find(std::string_view name) const;

  bool operator==(const TensorManifest&) const = default;
};

struct Tensor {
  std::vector<std::uint64_t> shape;
  std::vector<float> values;

  bool operator==(const Tensor&) const = default;
};

using TensorMap = std::map<std::string, Tensor, std::less<>>;

struct Container {
  TensorManifest manifest;
  TensorMap tensors;

  const Tensor& at(std::string_view name) const;
  const Tensor* find(std::string_view name) const;
  std::string metadata_or(std::string_view key, std::string fallback = {}) const;
};

// Writes `blobs` under the layout described by `manifest`. Every manifest
// entry must have a blob of identical shape and vice versa.
void write_container(const TensorManifest& manifest, const TensorMap& blobs, std::ostream& out);

// Reads a whole container. Allocation is bounded by the bytes actually
// present in the stream, so a manifest that over-declares fails with
// kTruncated rather than reserving its declared size up front.
Container read_container(std::istream& in);

Container read_container_bytes(std::string_view bytes);
Container read_container_file(const std::filesystem::path& path);

// Assigns back-to-back offsets in insertion order.
class ContainerBuilder {
 public:
  ContainerBuilder& add(std::string name, std::vector<std::uint64_t> shape, std::span<const float> values);
  ContainerBuilder& add(std::string name, std::span<const float> values);
  ContainerBuilder& add_scalar(std::string name, float value);
  ContainerBuilder& set_metadata(std::string key, std::string value);

  const TensorManifest& manifest() const { return manifest_; }
  const TensorMap& tensors() const { return tensors_; }

  void write(std::ostream& out) const;
  std::string bytes() const;
  void write_file(const std::filesystem::path& path) const;

 private:
  TensorManifest manifest_;
  TensorMap tensors_;
  std::uint64_t next_offset_ = 0;
};

// Write-to-temporary then rename, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace emem::tensorio
