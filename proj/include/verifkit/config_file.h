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

#ifndef VERIFKIT_CONFIG_FILE_H_
#define VERIFKIT_CONFIG_FILE_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace verifkit {

// Flat key=value configuration. Lines starting with '#' and blank lines are
// ignored; later assignments override earlier ones. Keys are kept sorted so
// serialization (and hence the hash) is canonical.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(std::string_view text);
  static KeyValueConfig Read(const std::string& path);

  // "key=value" override, as given on a command line.
  void SetAssignment(std::string_view assignment);
  void Set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }
  bool Has(const std::string& key) const { return values_.count(key) > 0; }

  std::string GetString(const std::string& key, const std::string& fallback) const;
  std::int64_t GetInt(const std::string& key, std::int64_t fallback) const;
  std::uint64_t GetUint(const std::string& key, std::uint64_t fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;
  // Comma-separated list; empty entries dropped.
  std::vector<std::string> GetList(const std::string& key,
                                   const std::vector<std::string>& fallback) const;

  // Keys never read through a getter; used to reject typos.
  std::vector<std::string> UnusedKeys() const;

  std::string Serialize() const;
  // 64-bit FNV-1a of Serialize().
  std::uint64_t Hash() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  void MarkUsed(const std::string& key) const { used_[key] = true; }
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> used_;
};

std::uint64_t Fnv1a64(std::string_view bytes);

}  // namespace verifkit

#endif  // VERIFKIT_CONFIG_FILE_H_
