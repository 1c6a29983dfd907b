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

#include "convasr/stubs.h"

#include <cmath>
#include <fstream>

#include "convasr/error.h"
#include "convasr/text.h"

namespace convasr {

using nlohmann::json;

uint64_t Fnv1a64(std::string_view data) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// --- ScriptedChatStub --------------------------------------------------------

ScriptedChatStub::ScriptedChatStub(std::vector<Rule> rules,
                                   std::optional<std::string> default_response,
                                   std::string name)
    : rules_(std::move(rules)),
      default_(std::move(default_response)),
      name_(std::move(name)) {}

ScriptedChatStub ScriptedChatStub::FromJson(const json& script,
                                            std::string name) {
  if (!script.is_object()) throw DataError("chat script must be a JSON object");
  std::vector<Rule> rules;
  if (script.contains("rules")) {
    for (const auto& r : script.at("rules")) {
      Rule rule;
      if (r.contains("tag")) rule.tag = r.at("tag").get<std::string>();
      if (r.contains("contains")) {
        const auto& c = r.at("contains");
        if (c.is_string()) {
          rule.contains.push_back(c.get<std::string>());
        } else {
          rule.contains = c.get<std::vector<std::string>>();
        }
      }
      if (r.contains("prompt_sha256")) {
        rule.prompt_sha256 = r.at("prompt_sha256").get<std::string>();
      }
      if (!r.contains("response")) {
        throw DataError("chat script rule without \"response\"");
      }
      rule.response = r.at("response").get<std::string>();
      rules.push_back(std::move(rule));
    }
  }
  std::optional<std::string> fallback;
  if (script.contains("default") && !script.at("default").is_null()) {
    fallback = script.at("default").get<std::string>();
  }
  return ScriptedChatStub(std::move(rules), std::move(fallback),
                          std::move(name));
}

ScriptedChatStub ScriptedChatStub::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open chat script", path.string());
  json script = json::parse(in, nullptr, false);
  if (script.is_discarded()) throw DataError("invalid JSON", path.string());
  return FromJson(script, "scripted-stub:" + path.filename().string());
}

std::string ScriptedChatStub::Complete(const ChatRequest& req) {
  const std::string prompt = req.PromptText();
  std::optional<std::string> prompt_hash;
  for (const auto& rule : rules_) {
    if (rule.tag && *rule.tag != req.request_tag) continue;
    bool all = true;
    for (const auto& needle : rule.contains) {
      if (prompt.find(needle) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (!all) continue;
    if (rule.prompt_sha256) {
      if (!prompt_hash) prompt_hash = Sha256Hex(prompt);
      if (*prompt_hash != *rule.prompt_sha256) continue;
    }
    return rule.response;
  }
  if (default_) return *default_;
  throw BackendError(BackendError::Kind::kUnscripted,
                     "unscripted request (tag \"" + req.request_tag + "\")");
}

// --- EchoChatStub ------------------------------------------------------------

std::string EchoChatStub::Complete(const ChatRequest& req) {
  if (req.messages.empty()) return {};
  std::string_view content = req.messages.back().content;
  std::string_view last;
  size_t pos = 0;
  while (pos <= content.size()) {
    size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    if (!Trim(line).empty()) last = line;
    pos = nl + 1;
  }
  return std::string(last);
}

// --- HashEmbeddingStub -------------------------------------------------------

HashEmbeddingStub::HashEmbeddingStub(size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw InvalidArgument("embedding dimension must be > 0");
}

std::string HashEmbeddingStub::Identity() const {
  return "hash-stub:" + std::to_string(dimension_);
}

std::vector<double> HashEmbeddingStub::Embed(const EmbeddingRequest& req) {
  std::vector<double> v(dimension_, 0.0);
  auto bump = [&](uint64_t h) { v[h % dimension_] += (h >> 63) ? -1.0 : 1.0; };
  const std::string normalized = NormalizeText(req.input);
  for (const auto& token : SplitWords(normalized)) bump(Fnv1a64(token));
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    bump(Fnv1a64("\x01" + normalized));
    norm2 = 1.0;
  }
  const double norm = std::sqrt(norm2);
  for (double& x : v) x /= norm;
  return v;
}

// --- ScriptedEmbeddingStub ---------------------------------------------------

ScriptedEmbeddingStub::ScriptedEmbeddingStub(
    std::map<std::string, std::vector<double>> table, std::string name)
    : table_(std::move(table)), name_(std::move(name)) {}

ScriptedEmbeddingStub ScriptedEmbeddingStub::FromJson(const json& script,
                                                      std::string name) {
  const json& table =
      script.contains("embeddings") ? script.at("embeddings") : script;
  if (!table.is_object()) {
    throw DataError("embedding script must map text to vectors");
  }
  return ScriptedEmbeddingStub(
      table.get<std::map<std::string, std::vector<double>>>(), std::move(name));
}

std::vector<double> ScriptedEmbeddingStub::Embed(const EmbeddingRequest& req) {
  auto it = table_.find(req.input);
  if (it == table_.end()) {
    std::string shown =
        req.input.size() > 60 ? req.input.substr(0, 60) + "..." : req.input;
    throw BackendError(BackendError::Kind::kUnscripted,
                       "unscripted request (embedding of \"" + shown + "\")");
  }
  return it->second;
}

}  // namespace convasr
