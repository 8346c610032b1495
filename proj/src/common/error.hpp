/*
 * Copyright 2026 The FedTrust Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDTRUST_COMMON_ERROR_HPP_
#define FEDTRUST_COMMON_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace fedtrust {

// Error categories. The numeric values double as CLI exit codes.
enum class ErrorKind {
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
  kInput = 5,
  kMetricUndefined = 6,
  kIo = 7,
};

const char* ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void ThrowConfig(const std::string& msg) {
  throw Error(ErrorKind::kConfig, msg);
}
[[noreturn]] inline void ThrowData(const std::string& msg) {
  throw Error(ErrorKind::kData, msg);
}
[[noreturn]] inline void ThrowNumeric(const std::string& msg) {
  throw Error(ErrorKind::kNumeric, msg);
}
[[noreturn]] inline void ThrowInput(const std::string& msg) {
  throw Error(ErrorKind::kInput, msg);
}
[[noreturn]] inline void ThrowMetricUndefined(const std::string& msg) {
  throw Error(ErrorKind::kMetricUndefined, msg);
}
[[noreturn]] inline void ThrowIo(const std::string& msg) {
  throw Error(ErrorKind::kIo, msg);
}

}  // namespace fedtrust

#endif  // FEDTRUST_COMMON_ERROR_HPP_
