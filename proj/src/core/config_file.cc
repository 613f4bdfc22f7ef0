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

#include "verifkit/config_file.h"

#include <charconv>

#include "verifkit/binary_io.h"
#include "verifkit/error.h"
#include "verifkit/manifest.h"

namespace verifkit {

namespace {

template <typename T>
T ParseNumber(const std::string& key, const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw UsageError("config key " + key + ": cannot parse \"" + text + "\"");
  return value;
}

}  // namespace

KeyValueConfig KeyValueConfig::Parse(std::string_view text) {
  KeyValueConfig config;
  std::size_t line_number = 0;
  while (!text.empty()) {
    ++line_number;
    std::size_t newline = text.find('\n');
    std::string_view line = Trim(text.substr(0, newline));
    text = newline == std::string_view::npos ? std::string_view()
                                             : text.substr(newline + 1);
    if (line.empty() || line.front() == '#') continue;
    if (line.find('=') == std::string_view::npos)
      throw UsageError("config line " + std::to_string(line_number) +
                       ": expected key=value");
    config.SetAssignment(line);
  }
  return config;
}

KeyValueConfig KeyValueConfig::Read(const std::string& path) {
  return Parse(ReadFileBytes(path));
}

void KeyValueConfig::SetAssignment(std::string_view assignment) {
  std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw UsageError("expected key=value, got \"" + std::string(assignment) +
                     "\"");
  std::string key(Trim(assignment.substr(0, eq)));
  if (key.empty()) throw UsageError("empty config key");
  values_[key] = std::string(Trim(assignment.substr(eq + 1)));
}

std::string KeyValueConfig::GetString(const std::string& key,
                                      const std::string& fallback) const {
  MarkUsed(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::int64_t KeyValueConfig::GetInt(const std::string& key,
                                    std::int64_t fallback) const {
  MarkUsed(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback
                             : ParseNumber<std::int64_t>(key, it->second);
}

std::uint64_t KeyValueConfig::GetUint(const std::string& key,
                                      std::uint64_t fallback) const {
  MarkUsed(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback
                             : ParseNumber<std::uint64_t>(key, it->second);
}

double KeyValueConfig::GetDouble(const std::string& key, double fallback) const {
  MarkUsed(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : ParseNumber<double>(key, it->second);
}

bool KeyValueConfig::GetBool(const std::string& key, bool fallback) const {
  MarkUsed(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw UsageError("config key " + key + ": expected boolean, got \"" + v + "\"");
}

std::vector<std::string> KeyValueConfig::GetList(
    const std::string& key, const std::vector<std::string>& fallback) const {
  MarkUsed(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out;
  std::string_view rest = it->second;
  while (true) {
    std::size_t comma = rest.find(',');
    std::string_view item = Trim(rest.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

std::vector<std::string> KeyValueConfig::UnusedKeys() const {
  std::vector<std::string> unused;
  for (const auto& [key, value] : values_)
    if (!used_.count(key)) unused.push_back(key);
  return unused;
}

std::string KeyValueConfig::Serialize() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + '=' + value + '\n';
  return out;
}

std::uint64_t KeyValueConfig::Hash() const { return Fnv1a64(Serialize()); }

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace verifkit
