// Copyright 2026 The emem Authors
// SPDX-License-Identifier: Apache-2.0

#include "emem/tensorio.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "emem/error.hpp"

namespace emem::tensorio {
namespace {

using nlohmann::json;

constexpr std::size_t kReadChunk = 1u << 20;

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0x000000FFu) << 24) | ((v & 0x0000FF00u) << 8) | ((v & 0x00FF0000u) >> 8) |
         ((v & 0xFF000000u) >> 24);
}

void put_u64_le(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 8);
}

std::uint64_t get_u64_le(const char* buf) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

void write_f32_le(std::ostream& out, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
  } else {
    for (float f : values) {
      std::uint32_t bits = byteswap32(std::bit_cast<std::uint32_t>(f));
      out.write(reinterpret_cast<const char*>(&bits), 4);
    }
  }
}

// Reads exactly n bytes, growing the buffer chunk by chunk so a lying length
// field cannot force a large allocation.
std::string read_exact(std::istream& in, std::uint64_t n, const char* what) {
  std::string buf;
  while (buf.size() < n) {
    std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(kReadChunk, n - buf.size()));
    std::size_t old = buf.size();
    buf.resize(old + want);
    in.read(buf.data() + old, static_cast<std::streamsize>(want));
    auto got = static_cast<std::size_t>(in.gcount());
    if (got < want) {
      fail(ErrorCode::kTruncated, std::string(what) + ": expected " + std::to_string(n) +
                                      " bytes, stream ended after " + std::to_string(old + got));
    }
  }
  return buf;
}

std::vector<float> decode_f32_le(const char* data, std::uint64_t count) {
  std::vector<float> out(count);
  std::memcpy(out.data(), data, count * sizeof(float));
  if constexpr (std::endian::native != std::endian::little) {
    for (auto& f : out) f = std::bit_cast<float>(byteswap32(std::bit_cast<std::uint32_t>(f)));
  }
  return out;
}

std::uint64_t checked_product(const std::vector<std::uint64_t>& shape, const std::string& name) {
  std::uint64_t n = 1;
  for (auto d : shape) {
    if (d == 0) fail(ErrorCode::kMalformed, "tensor '" + name + "' has a zero dimension");
    if (n > std::numeric_limits<std::uint64_t>::max() / 4 / d) {
      fail(ErrorCode::kMalformed, "tensor '" + name + "' shape overflows");
    }
    n *= d;
  }
  return n;
}

json manifest_to_json(const TensorManifest& manifest) {
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    entries.push_back({{"name", e.name},
                       {"dtype", to_string(e.dtype)},
                       {"shape", e.shape},
                       {"offset", e.byte_offset},
                       {"length", e.byte_length}});
  }
  json header = {{"version", manifest.format_version}, {"entries", std::move(entries)}};
  if (!manifest.metadata.empty()) header["metadata"] = manifest.metadata;
  return header;
}

TensorManifest manifest_from_json(const std::string& text) {
  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& ex) {
    fail(ErrorCode::kMalformed, std::string("header is not valid JSON: ") + ex.what());
  }
  TensorManifest manifest;
  try {
    if (!header.is_object()) fail(ErrorCode::kMalformed, "header must be a JSON object");
    manifest.format_version = header.at("version").get<int>();
    if (manifest.format_version != kFormatVersion) {
      fail(ErrorCode::kMalformed, "unsupported container version " + std::to_string(manifest.format_version));
    }
    for (const auto& je : header.at("entries")) {
      TensorEntry e;
      e.name = je.at("name").get<std::string>();
      e.dtype = parse_dtype(je.at("dtype").get<std::string>());
      for (const auto& d : je.at("shape")) {
        if (!d.is_number_integer() || d.get<std::int64_t>() <= 0) {
          fail(ErrorCode::kMalformed, "tensor '" + e.name + "' has a non-positive dimension");
        }
        e.shape.push_back(d.get<std::uint64_t>());
      }
      const auto& off = je.at("offset");
      const auto& len = je.at("length");
      if (!off.is_number_unsigned() && !(off.is_number_integer() && off.get<std::int64_t>() >= 0)) {
        fail(ErrorCode::kMalformed, "tensor '" + e.name + "' has an invalid offset");
      }
      if (!len.is_number_unsigned() && !(len.is_number_integer() && len.get<std::int64_t>() >= 0)) {
        fail(ErrorCode::kMalformed, "tensor '" + e.name + "' has an invalid length");
      }
      e.byte_offset = off.get<std::uint64_t>();
      e.byte_length = len.get<std::uint64_t>();
      manifest.entries.push_back(std::move(e));
    }
    if (auto it = header.find("metadata"); it != header.end()) {
      for (auto& [k, v] : it->items()) manifest.metadata[k] = v.get<std::string>();
    }
  } catch (const json::exception& ex) {
    fail(ErrorCode::kMalformed, std::string("header field error: ") + ex.what());
  }
  manifest.validate();
  return manifest;
}

}  // namespace

std::string_view to_string(DType dtype) {
  switch (dtype) {
    case DType::kF32: return "f32";
  }
  return "?";
}

DType parse_dtype(std::string_view name) {
  if (name == "f32") return DType::kF32;
  fail(ErrorCode::kUnknownDtype, "dtype '" + std::string(name) + "' is not supported (only f32)");
}

std::uint64_t TensorEntry::element_count() const {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void TensorManifest::validate() const {
  std::set<std::string_view> names;
  std::uint64_t end = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (!names.insert(e.name).second) fail(ErrorCode::kDuplicate, "tensor name '" + e.name + "' repeated");
    if (e.shape.empty()) fail(ErrorCode::kMalformed, "tensor '" + e.name + "' has an empty shape");
    std::uint64_t count = checked_product(e.shape, e.name);
    if (count * 4 != e.byte_length) {
      fail(ErrorCode::kShapeMismatch, "tensor '" + e.name + "' declares " + std::to_string(e.byte_length) +
                                          " bytes but its shape needs " + std::to_string(count * 4));
    }
    if (i > 0 && e.byte_offset < end) {
      fail(ErrorCode::kMalformed, "tensor '" + e.name + "' overlaps or precedes the previous entry");
    }
    if (e.byte_offset > std::numeric_limits<std::uint64_t>::max() - e.byte_length) {
      fail(ErrorCode::kMalformed, "tensor '" + e.name + "' offset overflows");
    }
    end = e.byte_offset + e.byte_length;
  }
}

std::uint64_t TensorManifest::payload_size() const {
  return entries.empty() ? 0 : entries.back().byte_offset + entries.back().byte_length;
}

const TensorEntry* TensorManifest::find(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

const Tensor& Container::at(std::string_view name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) fail(ErrorCode::kNotFound, "container has no tensor '" + std::string(name) + "'");
  return it->second;
}

const Tensor* Container::find(std::string_view name) const {
  auto it = tensors.find(name);
  return it == tensors.end() ? nullptr : &it->second;
}

std::string Container::metadata_or(std::string_view key, std::string fallback) const {
  auto it = manifest.metadata.find(std::string(key));
  return it == manifest.metadata.end() ? fallback : it->second;
}

void write_container(const TensorManifest& manifest, const TensorMap& blobs, std::ostream& out) {
  manifest.validate();
  if (blobs.size() != manifest.entries.size()) {
    fail(ErrorCode::kShapeMismatch, "manifest lists " + std::to_string(manifest.entries.size()) +
                                        " tensors but " + std::to_string(blobs.size()) + " blobs were given");
  }
  for (const auto& e : manifest.entries) {
    auto it = blobs.find(e.name);
    if (it == blobs.end()) fail(ErrorCode::kShapeMismatch, "no blob for manifest entry '" + e.name + "'");
    if (it->second.shape != e.shape || it->second.values.size() != e.element_count()) {
      fail(ErrorCode::kShapeMismatch, "blob '" + e.name + "' does not match its manifest shape");
    }
  }

  const std::string header = manifest_to_json(manifest).dump();
  put_u64_le(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::uint64_t cursor = 0;
  const std::string zeros(64, '\0');
  for (const auto& e : manifest.entries) {
    while (cursor < e.byte_offset) {
      auto n = std::min<std::uint64_t>(zeros.size(), e.byte_offset - cursor);
      out.write(zeros.data(), static_cast<std::streamsize>(n));
      cursor += n;
    }
    write_f32_le(out, blobs.find(e.name)->second.values);
    cursor += e.byte_length;
  }
  if (!out) fail(ErrorCode::kIo, "failed writing container");
}

Container read_container(std::istream& in) {
  std::string len_bytes = read_exact(in, 8, "header length");
  std::uint64_t header_len = get_u64_le(len_bytes.data());
  if (header_len > kMaxHeaderBytes) {
    fail(ErrorCode::kMalformed, "header length " + std::to_string(header_len) + " exceeds limit");
  }
  Container c;
  c.manifest = manifest_from_json(read_exact(in, header_len, "header"));

  std::uint64_t cursor = 0;
  for (const auto& e : c.manifest.entries) {
    if (e.byte_offset > cursor) {
      in.ignore(static_cast<std::streamsize>(e.byte_offset - cursor));
      if (static_cast<std::uint64_t>(in.gcount()) != e.byte_offset - cursor) {
        fail(ErrorCode::kTruncated, "payload ends before tensor '" + e.name + "'");
      }
    }
    std::string raw = read_exact(in, e.byte_length, ("payload of tensor '" + e.name + "'").c_str());
    c.tensors.emplace(e.name, Tensor{e.shape, decode_f32_le(raw.data(), e.element_count())});
    cursor = e.byte_offset + e.byte_length;
  }
  return c;
}

Container read_container_bytes(std::string_view bytes) {
  std::istringstream in{std::string(bytes)};
  return read_container(in);
}

Container read_container_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return read_container(in);
}

ContainerBuilder& ContainerBuilder::add(std::string name, std::vector<std::uint64_t> shape,
                                        std::span<const float> values) {
  std::uint64_t count = checked_product(shape, name);
  if (count != values.size()) {
    fail(ErrorCode::kShapeMismatch, "tensor '" + name + "' has " + std::to_string(values.size()) +
                                        " values for a shape of " + std::to_string(count));
  }
  if (tensors_.contains(name)) fail(ErrorCode::kDuplicate, "tensor name '" + name + "' repeated");
  TensorEntry e{name, DType::kF32, shape, next_offset_, count * 4};
  next_offset_ += e.byte_length;
  manifest_.entries.push_back(e);
  tensors_.emplace(std::move(name), Tensor{std::move(shape), {values.begin(), values.end()}});
  return *this;
}

ContainerBuilder& ContainerBuilder::add(std::string name, std::span<const float> values) {
  return add(std::move(name), {static_cast<std::uint64_t>(values.size())}, values);
}

ContainerBuilder& ContainerBuilder::add_scalar(std::string name, float value) {
  return add(std::move(name), {1}, std::span<const float>(&value, 1));
}

ContainerBuilder& ContainerBuilder::set_metadata(std::string key, std::string value) {
  manifest_.metadata[std::move(key)] = std::move(value);
  return *this;
}

void ContainerBuilder::write(std::ostream& out) const { write_container(manifest_, tensors_, out); }

std::string ContainerBuilder::bytes() const {
  std::ostringstream out(std::ios::binary);
  write(out);
  return std::move(out).str();
}

void ContainerBuilder::write_file(const std::filesystem::path& path) const { write_file_atomic(path, bytes()); }

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorCode::kIo, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIo, "cannot rename '" + tmp.string() + "': " + ec.message());
}

}  // namespace emem::tensorio
