// Copyright 2026 The soundsal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOUNDSAL_BINARY_IO_H_
#define SOUNDSAL_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "soundsal/error.h"

namespace soundsal::internal {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

// Appends little-endian encodings to an in-memory buffer.
class ByteWriter {
 public:
  void Bytes(std::string_view raw) { buffer_.append(raw); }
  template <typename T>
  void Put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buffer_.append(raw, sizeof(T));
  }
  const std::string& buffer() const { return buffer_; }

 private:
  std::string buffer_;
};

class ByteReader {
 public:
  ByteReader(std::string data, std::string source)
      : data_(std::move(data)), source_(std::move(source)) {}

  std::string_view Bytes(std::size_t count) {
    Require(count);
    std::string_view out(data_.data() + offset_, count);
    offset_ += count;
    return out;
  }
  template <typename T>
  T Get() {
    Require(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + offset_, sizeof(T));
    offset_ += sizeof(T);
    return value;
  }
  bool AtEnd() const { return offset_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - offset_; }
  const std::string& source() const { return source_; }

 private:
  void Require(std::size_t count) const {
    if (data_.size() - offset_ < count) {
      throw FormatError(source_ + ": truncated file (needed " +
                        std::to_string(count) + " bytes at offset " +
                        std::to_string(offset_) + ")");
    }
  }

  std::string data_;
  std::string source_;
  std::size_t offset_ = 0;
};

inline std::string ReadWholeFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path);
  return data;
}

inline void WriteWholeFile(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace soundsal::internal

#endif  // SOUNDSAL_BINARY_IO_H_
