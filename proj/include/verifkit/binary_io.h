// Copyright (c) 2026 The verifkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VERIFKIT_BINARY_IO_H_
#define VERIFKIT_BINARY_IO_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace verifkit {

// Little-endian encoder for the on-disk formats.
class BinaryWriter {
 public:
  void PutMagic(std::string_view magic) { buffer_.append(magic); }
  void PutU32(std::uint32_t value);
  void PutI32(std::int32_t value) { PutU32(static_cast<std::uint32_t>(value)); }
  void PutF32(float value);
  void PutF64(double value);
  // u32 byte length followed by the raw bytes.
  void PutString(std::string_view value);

  const std::string& buffer() const { return buffer_; }
  std::string Release() { return std::move(buffer_); }

 private:
  void PutU64(std::uint64_t value);
  std::string buffer_;
};

// Decoder over an in-memory byte string. Every getter throws DataError with
// `what` context on truncation.
class BinaryReader {
 public:
  BinaryReader(std::string_view data, std::string context)
      : data_(data), context_(std::move(context)) {}

  void ExpectMagic(std::string_view magic);
  std::uint32_t GetU32();
  std::int32_t GetI32() { return static_cast<std::int32_t>(GetU32()); }
  float GetF32();
  double GetF64();
  std::string GetString();

  std::size_t remaining() const { return data_.size() - pos_; }
  bool AtEnd() const { return pos_ == data_.size(); }
  // Throws unless remaining() >= bytes.
  void Require(std::size_t bytes, std::string_view what) const;
  const std::string& context() const { return context_; }

 private:
  std::uint64_t GetU64();
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string context_;
};

std::string ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, std::string_view bytes);

}  // namespace verifkit

#endif  // VERIFKIT_BINARY_IO_H_
