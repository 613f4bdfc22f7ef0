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

#include "verifkit/binary_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "verifkit/error.h"

namespace verifkit {

namespace {

template <typename T>
T ToLittle(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    T out;
    auto* src = reinterpret_cast<const unsigned char*>(&value);
    auto* dst = reinterpret_cast<unsigned char*>(&out);
    for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
    return out;
  } else {
    return value;
  }
}

}  // namespace

void BinaryWriter::PutU32(std::uint32_t value) {
  value = ToLittle(value);
  buffer_.append(reinterpret_cast<const char*>(&value), sizeof(value));
}

void BinaryWriter::PutU64(std::uint64_t value) {
  value = ToLittle(value);
  buffer_.append(reinterpret_cast<const char*>(&value), sizeof(value));
}

void BinaryWriter::PutF32(float value) {
  PutU32(std::bit_cast<std::uint32_t>(value));
}

void BinaryWriter::PutF64(double value) {
  PutU64(std::bit_cast<std::uint64_t>(value));
}

void BinaryWriter::PutString(std::string_view value) {
  PutU32(static_cast<std::uint32_t>(value.size()));
  buffer_.append(value);
}

void BinaryReader::Require(std::size_t bytes, std::string_view what) const {
  if (remaining() < bytes) {
    throw DataError(context_ + ": truncated payload reading " +
                    std::string(what) + " (need " + std::to_string(bytes) +
                    " bytes, have " + std::to_string(remaining()) + ")");
  }
}

void BinaryReader::ExpectMagic(std::string_view magic) {
  if (remaining() < magic.size() ||
      data_.substr(pos_, magic.size()) != magic) {
    throw DataError(context_ + ": bad magic (expected \"" +
                    std::string(magic) + "\")");
  }
  pos_ += magic.size();
}

std::uint32_t BinaryReader::GetU32() {
  Require(4, "u32");
  std::uint32_t value;
  std::memcpy(&value, data_.data() + pos_, 4);
  pos_ += 4;
  return ToLittle(value);
}

std::uint64_t BinaryReader::GetU64() {
  Require(8, "u64");
  std::uint64_t value;
  std::memcpy(&value, data_.data() + pos_, 8);
  pos_ += 8;
  return ToLittle(value);
}

float BinaryReader::GetF32() { return std::bit_cast<float>(GetU32()); }

double BinaryReader::GetF64() { return std::bit_cast<double>(GetU64()); }

std::string BinaryReader::GetString() {
  std::uint32_t length = GetU32();
  Require(length, "string");
  std::string out(data_.substr(pos_, length));
  pos_ += length;
  return out;
}

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path + " for reading");
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace verifkit
