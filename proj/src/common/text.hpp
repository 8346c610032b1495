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

#ifndef FEDTRUST_COMMON_TEXT_HPP_
#define FEDTRUST_COMMON_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace fedtrust {

// Shortest form that still uses 17 significant digits, so every double
// round-trips exactly through text.
std::string FormatDouble17(double v);

// Compact form for human-facing tables (up to 10 significant digits).
std::string FormatDoubleShort(double v);

// Strict parse: the whole (trimmed) string must be consumed.
bool ParseDouble(std::string_view text, double* out);
bool ParseUint64(std::string_view text, uint64_t* out);

std::string_view Trim(std::string_view s);
std::vector<std::string> Split(std::string_view s, char delim);

std::string ReadFile(const std::string& path);
// Writes via a temporary file and rename so readers never see partial files.
void WriteFileAtomic(const std::string& path, std::string_view contents);

}  // namespace fedtrust

#endif  // FEDTRUST_COMMON_TEXT_HPP_
