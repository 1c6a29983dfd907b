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

// Deterministic offline backends used by tests, goldens and `--offline` runs.

#ifndef CONVASR_STUBS_H_
#define CONVASR_STUBS_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "convasr/backends.h"
#include "json.hpp"

namespace convasr {

// Answers chat requests from an ordered rule list; the first matching rule
// wins. A rule matches when every given condition holds:
//   tag            equals the request tag
//   contains       every listed substring occurs in the prompt text
//   prompt_sha256  equals Sha256Hex(req.PromptText())
// Without a match the default answer is used; without a default the call
// fails with an "unscripted request" error.
//
// Script JSON: {"default": "...", "rules": [{"tag": "...", "contains": [...],
// "prompt_sha256": "...", "response": "..."}],
// "embeddings": {"text": [..]}}
class ScriptedChatStub : public ChatBackend {
 public:
  struct Rule {
    std::optional<std::string> tag;
    std::vector<std::string> contains;
    std::optional<std::string> prompt_sha256;
    std::string response;
  };

  ScriptedChatStub(std::vector<Rule> rules,
                   std::optional<std::string> default_response = {},
                   std::string name = "scripted-stub");

  static ScriptedChatStub FromJson(const nlohmann::json& script,
                                   std::string name = "scripted-stub");
  static ScriptedChatStub FromFile(const std::filesystem::path& path);

  std::string Complete(const ChatRequest& req) override;
  std::string Identity() const override { return name_; }

 private:
  std::vector<Rule> rules_;
  std::optional<std::string> default_;
  std::string name_;
};

// Returns the last non-empty line of the last message, verbatim.
class EchoChatStub : public ChatBackend {
 public:
  std::string Complete(const ChatRequest& req) override;
  std::string Identity() const override { return "echo-stub"; }
};

// Bag-of-tokens hash embedding: the normalized text is split on whitespace,
// each token adds +1 or -1 at a position picked by its 64-bit FNV-1a hash
// (index = hash mod dimension, sign = top bit), and the sum is scaled to unit
// length. If the tokens cancel out (or there are none) a single bump derived
// from the hash of the whole normalized text is used instead.
class HashEmbeddingStub : public EmbeddingBackend {
 public:
  static constexpr size_t kDefaultDimension = 384;

  explicit HashEmbeddingStub(size_t dimension = kDefaultDimension);

  std::vector<double> Embed(const EmbeddingRequest& req) override;
  std::string Identity() const override;
  size_t dimension() const { return dimension_; }

 private:
  size_t dimension_;
};

// Exact text -> vector lookup, for fixtures that need specific similarities.
class ScriptedEmbeddingStub : public EmbeddingBackend {
 public:
  explicit ScriptedEmbeddingStub(
      std::map<std::string, std::vector<double>> table,
      std::string name = "scripted-embed-stub");

  static ScriptedEmbeddingStub FromJson(
      const nlohmann::json& script, std::string name = "scripted-embed-stub");

  std::vector<double> Embed(const EmbeddingRequest& req) override;
  std::string Identity() const override { return name_; }

 private:
  std::map<std::string, std::vector<double>> table_;
  std::string name_;
};

uint64_t Fnv1a64(std::string_view data);

}  // namespace convasr

#endif  // CONVASR_STUBS_H_
