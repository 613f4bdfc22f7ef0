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

#ifndef VERIFKIT_LOG_H_
#define VERIFKIT_LOG_H_

#include <functional>
#include <sstream>
#include <string>
#include <string_view>

namespace verifkit {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3 };

std::string_view LogLevelName(LogLevel level);

// Lines go to stderr as "LEVEL<TAB>stage<TAB>message".
void Log(LogLevel level, std::string_view stage, std::string_view message);

// Messages below this level are dropped. Default kInfo.
void SetMinLogLevel(LogLevel level);

// Replaces the stderr sink; pass an empty function to restore it. Tests use
// this to capture warnings.
using LogSink = std::function<void(LogLevel, std::string_view stage,
                                   std::string_view message)>;
void SetLogSink(LogSink sink);

// Stream-style helper: LogMessage(LogLevel::kWarning, "plda") << "ridge " << r;
class LogMessage {
 public:
  LogMessage(LogLevel level, std::string_view stage)
      : level_(level), stage_(stage) {}
  LogMessage(const LogMessage&) = delete;
  LogMessage& operator=(const LogMessage&) = delete;
  ~LogMessage() { Log(level_, stage_, stream_.str()); }

  template <typename T>
  LogMessage& operator<<(const T& value) {
    stream_ << value;
    return *this;
  }

 private:
  LogLevel level_;
  std::string stage_;
  std::ostringstream stream_;
};

}  // namespace verifkit

#endif  // VERIFKIT_LOG_H_
