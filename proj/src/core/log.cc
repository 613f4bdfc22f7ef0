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

#include "verifkit/log.h"

#include <iostream>
#include <mutex>

namespace verifkit {

namespace {

std::mutex& LogMutex() {
  static std::mutex mutex;
  return mutex;
}

LogLevel g_min_level = LogLevel::kInfo;
LogSink g_sink;

}  // namespace

std::string_view LogLevelName(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug:
      return "DEBUG";
    case LogLevel::kInfo:
      return "INFO";
    case LogLevel::kWarning:
      return "WARNING";
    case LogLevel::kError:
      return "ERROR";
  }
  return "INFO";
}

void Log(LogLevel level, std::string_view stage, std::string_view message) {
  std::lock_guard<std::mutex> lock(LogMutex());
  if (g_sink) {
    g_sink(level, stage, message);
    return;
  }
  if (level < g_min_level) return;
  std::cerr << LogLevelName(level) << '\t' << stage << '\t' << message << '\n';
}

void SetMinLogLevel(LogLevel level) {
  std::lock_guard<std::mutex> lock(LogMutex());
  g_min_level = level;
}

void SetLogSink(LogSink sink) {
  std::lock_guard<std::mutex> lock(LogMutex());
  g_sink = std::move(sink);
}

}  // namespace verifkit
