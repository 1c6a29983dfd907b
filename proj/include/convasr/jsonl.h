// Copyright (c) 2026 The convasr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONVASR_JSONL_H_
#define CONVASR_JSONL_H_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace convasr {

// Calls `fn(record, line_number)` for every non-blank line. Parse errors and
// any DataError/json exception thrown by `fn` are rethrown as DataError
// carrying the path and line number.
void ForEachJsonLine(
    const std::filesystem::path& path,
    const std::function<void(const nlohmann::json&, size_t)>& fn);

void WriteJsonLines(const std::filesystem::path& path,
                    const std::vector<nlohmann::json>& records);

// Writes `content` to `path`, creating parent directories. Throws Error when
// the file cannot be written.
void WriteTextFile(const std::filesystem::path& path,
                   const std::string& content);
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace convasr

#endif  // CONVASR_JSONL_H_
