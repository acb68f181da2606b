/*
 * Copyright 2026 The mrmult Authors
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

// Binary record encoding for keys and payloads crossing the shuffle.
//
// Integers are big-endian so that byte-wise comparison of encoded keys agrees
// with numeric comparison of the fields they encode.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mrmult {

using Bytes = std::string;

class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(std::size_t reserve) { buf_.reserve(reserve); }

  ByteWriter& u8(std::uint8_t v) {
    buf_.push_back(static_cast<char>(v));
    return *this;
  }

  ByteWriter& u32(std::uint32_t v) {
    char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                 static_cast<char>(v >> 8), static_cast<char>(v)};
    buf_.append(b, 4);
    return *this;
  }

  ByteWriter& u64(std::uint64_t v) {
    u32(static_cast<std::uint32_t>(v >> 32));
    return u32(static_cast<std::uint32_t>(v));
  }

  ByteWriter& f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }

  ByteWriter& raw(std::string_view s) {
    buf_.append(s);
    return *this;
  }

  /// Length-prefixed (col, value) run.
  ByteWriter& entries(std::span<const std::uint32_t> cols, std::span<const double> values) {
    u32(static_cast<std::uint32_t>(cols.size()));
    for (std::size_t p = 0; p < cols.size(); ++p) {
      u32(cols[p]);
      f64(values[p]);
    }
    return *this;
  }

  std::size_t size() const noexcept { return buf_.size(); }
  Bytes take() { return std::move(buf_); }
  const Bytes& str() const noexcept { return buf_; }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }

  std::uint32_t u32() {
    need(4);
    const auto* p = reinterpret_cast<const unsigned char*>(data_.data() + pos_);
    pos_ += 4;
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
           std::uint32_t{p[3]};
  }

  std::uint64_t u64() {
    const std::uint64_t hi = u32();
    return (hi << 32) | u32();
  }

  double f64() { return std::bit_cast<double>(u64()); }

  /// Reads a run written by ByteWriter::entries, invoking f(col, value).
  template <typename F>
  std::uint32_t entries(F&& f) {
    const auto n = u32();
    need(std::size_t{n} * 12);
    for (std::uint32_t p = 0; p < n; ++p) {
      const auto c = u32();
      f(c, f64());
    }
    return n;
  }

  std::string_view rest() const noexcept { return data_.substr(pos_); }
  bool done() const noexcept { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw std::out_of_range("ByteReader: truncated record");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace mrmult
