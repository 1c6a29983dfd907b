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

#ifndef CONVASR_TEXT_H_
#define CONVASR_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace convasr {

// Lowercases ASCII letters, removes ASCII punctuation (an apostrophe survives
// only when both neighbours are word characters, as in "don't"), and collapses
// runs of whitespace to a single space. Bytes >= 0x80 are treated as word
// characters so UTF-8 text passes through untouched. Idempotent.
std::string NormalizeText(std::string_view s);

// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string> SplitWords(std::string_view s);

std::string_view Trim(std::string_view s);

// Replaces every run of whitespace (including newlines) with one space and
// trims the ends.
std::string CollapseWhitespace(std::string_view s);

bool StartsWithIgnoreCase(std::string_view s, std::string_view prefix);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace convasr

#endif  // CONVASR_TEXT_H_
