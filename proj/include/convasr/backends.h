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

// Chat and embedding backends.
//
// A backend (ChatBackend / EmbeddingBackend) performs one raw call. A service
// (ChatService / EmbeddingService) wraps a backend with the shared machinery:
// content-addressed response cache, retry with exponential backoff, a token
// bucket rate limiter and the audit trail. Callers only ever talk to services.

#ifndef CONVASR_BACKENDS_H_
#define CONVASR_BACKENDS_H_

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace convasr {

enum class ChatRole { kSystem, kUser, kAssistant };

const char* ChatRoleName(ChatRole role);

struct ChatMessage {
  ChatRole role = ChatRole::kUser;
  std::string content;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::optional<int> max_tokens;
  std::string request_tag;

  // Throws InvalidArgument if messages is empty or temperature < 0.
  void Validate() const;
  // All message contents joined with newlines.
  std::string PromptText() const;
};

struct EmbeddingRequest {
  std::string model_id;
  std::string input;
  std::string request_tag;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_id;
};

enum class CacheKind { kChat, kEmbed };

struct CacheKey {
  std::string digest;  // lowercase hex SHA-256

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

std::string Sha256Hex(std::string_view data);

// Canonical serialization: JSON with sorted keys, no whitespace, and the
// temperature rendered as a fixed six-decimal string.
std::string CanonicalPayload(const ChatRequest& req);
std::string CanonicalPayload(const EmbeddingRequest& req);

CacheKey MakeCacheKey(CacheKind kind, std::string_view payload);
CacheKey MakeCacheKey(const ChatRequest& req);
CacheKey MakeCacheKey(const EmbeddingRequest& req);

struct JudgeVerdict {
  bool value = false;
  std::string raw;
};

// Case-insensitive scan for the first standalone "yes" or "no" token. Throws
// UnparseableVerdict when neither occurs.
JudgeVerdict ParseYesNo(std::string_view raw);

// Cosine similarity. Throws InvalidArgument on length mismatch or a zero
// vector.
double Cosine(std::span<const double> a, std::span<const double> b);

// --- raw backends ---------------------------------------------------------

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string Complete(const ChatRequest& req) = 0;
  virtual std::string Identity() const = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<double> Embed(const EmbeddingRequest& req) = 0;
  virtual std::string Identity() const = 0;
};

// --- shared machinery ------------------------------------------------------

// On-disk key/value store: one file per digest inside `dir`.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> Get(const CacheKey& key) const;
  // Writes through a temporary file and renames, so concurrent writers of the
  // same key never expose a torn value.
  void Put(const CacheKey& key, std::string_view value);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::atomic<uint64_t> tmp_counter_{0};
};

struct AuditEntry {
  std::string key;
  std::string kind;  // "chat" | "embed"
  std::string request_tag;
  nlohmann::json prompt;
  std::string response;
  bool cached = false;
};

// Append-only record of every backend interaction. Always kept in memory; also
// appended as JSON lines to `path` when one is given.
class AuditLog {
 public:
  AuditLog() = default;
  explicit AuditLog(const std::filesystem::path& path);

  void Record(AuditEntry entry);
  std::vector<AuditEntry> Entries() const;

 private:
  mutable std::mutex mu_;
  std::vector<AuditEntry> entries_;
  std::ofstream out_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};
  // Replaced in tests so backoff does not actually wait.
  std::function<void(std::chrono::milliseconds)> sleep;

  std::chrono::milliseconds BackoffFor(int attempt) const;
};

// Runs `fn` until it succeeds, retrying only transient BackendErrors.
template <typename Fn>
auto WithRetry(const RetryPolicy& policy, Fn&& fn) -> decltype(fn());

// Token bucket holding up to `requests_per_minute` tokens, refilled
// continuously. A rate of 0 disables limiting.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute);

  void Acquire();
  bool TryAcquire();

 private:
  void Refill();

  double capacity_;
  double tokens_;
  double per_second_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mu_;
};

struct ServiceOptions {
  std::shared_ptr<ResponseCache> cache;
  std::shared_ptr<AuditLog> audit;
  RetryPolicy retry;
  double requests_per_minute = 0.0;
  double temperature = 0.0;
  std::optional<int> max_tokens;
};

class ChatService {
 public:
  ChatService(std::shared_ptr<ChatBackend> backend, std::string model_id,
              ServiceOptions options = {});

  // Cache lookup, then rate-limited retried backend call; the answer is cached
  // before it is returned. Every call lands in the audit trail.
  std::string Complete(const ChatRequest& req);

  // A single-user-message request carrying this service's model and decoding
  // parameters.
  ChatRequest MakeRequest(std::string request_tag, std::string content) const;

  const std::string& model_id() const { return model_id_; }
  const ServiceOptions& options() const { return options_; }
  std::string Identity() const { return backend_->Identity(); }
  uint64_t backend_calls() const { return backend_calls_.load(); }
  uint64_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::shared_ptr<ChatBackend> backend_;
  std::string model_id_;
  ServiceOptions options_;
  RateLimiter limiter_;
  std::atomic<uint64_t> backend_calls_{0};
  std::atomic<uint64_t> cache_hits_{0};
};

class EmbeddingService {
 public:
  EmbeddingService(std::shared_ptr<EmbeddingBackend> backend,
                   std::string model_id, ServiceOptions options = {});

  EmbeddingVector Embed(const std::string& text,
                        const std::string& request_tag = "embed");

  const std::string& model_id() const { return model_id_; }
  std::string Identity() const { return backend_->Identity(); }
  uint64_t backend_calls() const { return backend_calls_.load(); }
  uint64_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::shared_ptr<EmbeddingBackend> backend_;
  std::string model_id_;
  ServiceOptions options_;
  RateLimiter limiter_;
  std::atomic<uint64_t> backend_calls_{0};
  std::atomic<uint64_t> cache_hits_{0};
};

inline constexpr std::string_view kVerdictReask =
    "Answer with exactly Yes or No.";

// Sends `req` and parses a Yes/No verdict. If the answer is unparseable the
// question is asked once more with kVerdictReask appended to the last
// message; a second failure throws UnparseableVerdict.
JudgeVerdict AskYesNo(ChatService& chat, const ChatRequest& req);

}  // namespace convasr

#include "convasr/backends_inl.h"

#endif  // CONVASR_BACKENDS_H_
