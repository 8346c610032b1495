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

#include "common/log.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <mutex>

namespace fedtrust {
namespace {

LogLevel InitialLevel() {
  const char* env = std::getenv("FEDTRUST_LOG");
  if (env == nullptr) return LogLevel::kWarning;
  if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
  if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
  if (std::strcmp(env, "error") == 0) return LogLevel::kError;
  if (std::strcmp(env, "off") == 0) return LogLevel::kOff;
  return LogLevel::kWarning;
}

std::atomic<int>& Level() {
  static std::atomic<int> level{static_cast<int>(InitialLevel())};
  return level;
}

std::mutex& SinkMutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

void SetLogLevel(LogLevel level) { Level() = static_cast<int>(level); }

LogLevel GetLogLevel() { return static_cast<LogLevel>(Level().load()); }

void Log(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) < Level().load()) return;
  static const char* kTags[] = {"D", "I", "W", "E"};
  std::lock_guard<std::mutex> lock(SinkMutex());
  std::cerr << "[fedtrust " << kTags[static_cast<int>(level)] << "] "
            << message << '\n';
}

}  // namespace fedtrust
