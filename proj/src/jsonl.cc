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

#include "convasr/jsonl.h"

#include <fstream>
#include <sstream>

#include "convasr/error.h"
#include "convasr/text.h"

namespace convasr {

using nlohmann::json;

void ForEachJsonLine(const std::filesystem::path& path,
                     const std::function<void(const json&, size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file", path.string());
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw DataError("malformed record (expected a JSON object)",
                      path.string(), line_no);
    }
    try {
      fn(record, line_no);
    } catch (const DataError& e) {
      if (e.line() != 0) throw;
      throw DataError(e.what(), path.string(), line_no);
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed record: ") + e.what(),
                      path.string(), line_no);
    }
  }
}

void WriteJsonLines(const std::filesystem::path& path,
                    const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  WriteTextFile(path, out);
}

void WriteTextFile(const std::filesystem::path& path,
                   const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("cannot write " + path.string());
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace convasr
