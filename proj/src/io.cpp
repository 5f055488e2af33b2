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

#include "a2p/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "a2p/common.hpp"

namespace a2p::io {

static_assert(std::endian::native == std::endian::little,
              "raw array encoding assumes a little-endian host");

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dump(const json& value) { return value.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const json& value) {
  write_file_atomic(path, dump(value));
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": invalid JSON: " + e.what());
  }
}

namespace {

template <typename T>
void append_raw(std::string& out, std::span<const T> values) {
  const auto* p = reinterpret_cast<const char*>(values.data());
  out.append(p, values.size_bytes());
}

}  // namespace

void append_f32(std::string& out, std::span<const float> values) { append_raw(out, values); }
void append_f64(std::string& out, std::span<const double> values) { append_raw(out, values); }
void append_i32(std::string& out, std::span<const int> values) {
  static_assert(sizeof(int) == 4);
  append_raw(out, values);
}
void append_u32(std::string& out, std::uint32_t value) {
  append_raw(out, std::span<const std::uint32_t>(&value, 1));
}
void append_u64(std::string& out, std::uint64_t value) {
  append_raw(out, std::span<const std::uint64_t>(&value, 1));
}

void Reader::need(std::size_t n, std::string_view field) const {
  if (remaining() < n) {
    throw FormatError("truncated data in field '" + std::string(field) + "': need " +
                      std::to_string(n) + " bytes, have " + std::to_string(remaining()));
  }
}

std::string_view Reader::bytes(std::size_t n, std::string_view field) {
  need(n, field);
  auto out = buffer_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint32_t Reader::u32(std::string_view field) {
  std::uint32_t v;
  std::memcpy(&v, bytes(4, field).data(), 4);
  return v;
}

std::uint64_t Reader::u64(std::string_view field) {
  std::uint64_t v;
  std::memcpy(&v, bytes(8, field).data(), 8);
  return v;
}

std::vector<float> Reader::f32(std::size_t n, std::string_view field) {
  if (n > remaining() / 4) need(n * 4, field);
  std::vector<float> v(n);
  std::memcpy(v.data(), bytes(n * 4, field).data(), n * 4);
  return v;
}

std::vector<double> Reader::f64(std::size_t n, std::string_view field) {
  if (n > remaining() / 8) need(n * 8, field);
  std::vector<double> v(n);
  std::memcpy(v.data(), bytes(n * 8, field).data(), n * 8);
  return v;
}

std::vector<int> Reader::i32(std::size_t n, std::string_view field) {
  if (n > remaining() / 4) need(n * 4, field);
  std::vector<int> v(n);
  std::memcpy(v.data(), bytes(n * 4, field).data(), n * 4);
  return v;
}

json number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

double to_double(const json& value) {
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw FormatError("expected a number, got string '" + s + "'");
  }
  if (!value.is_number()) throw FormatError("expected a number");
  return value.get<double>();
}

}  // namespace a2p::io
