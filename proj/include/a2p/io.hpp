/**
 * Copyright (c) 2026-present, The a2p Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace a2p::io {

using nlohmann::json;

/// Writes `bytes` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const json& value);
json read_json(const std::filesystem::path& path);

/// Little-endian raw array encoders.
void append_f32(std::string& out, std::span<const float> values);
void append_f64(std::string& out, std::span<const double> values);
void append_i32(std::string& out, std::span<const int> values);
void append_u32(std::string& out, std::uint32_t value);
void append_u64(std::string& out, std::uint64_t value);

/// Sequential little-endian decoder over an in-memory buffer. Every read names
/// the field it belongs to so that truncation errors point at it.
class Reader {
 public:
  explicit Reader(std::string_view buffer) : buffer_(buffer) {}

  std::uint32_t u32(std::string_view field);
  std::uint64_t u64(std::string_view field);
  std::string_view bytes(std::size_t n, std::string_view field);
  std::vector<float> f32(std::size_t n, std::string_view field);
  std::vector<double> f64(std::size_t n, std::string_view field);
  std::vector<int> i32(std::size_t n, std::string_view field);
  std::size_t remaining() const { return buffer_.size() - pos_; }

 private:
  void need(std::size_t n, std::string_view field) const;

  std::string_view buffer_;
  std::size_t pos_ = 0;
};

/// Encodes doubles for JSON; non-finite values become the strings "inf",
/// "-inf" and "nan".
json number(double value);
double to_double(const json& value);

/// Canonical text for a JSON document: two-space indent, trailing newline.
std::string dump(const json& value);

}  // namespace a2p::io
