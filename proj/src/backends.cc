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

#include "convasr/backends.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "convasr/error.h"

namespace convasr {

using nlohmann::json;

const char* ChatRoleName(ChatRole role) {
  switch (role) {
    case ChatRole::kSystem:
      return "system";
    case ChatRole::kUser:
      return "user";
    case ChatRole::kAssistant:
      return "assistant";
  }
  return "user";
}

void ChatRequest::Validate() const {
  if (messages.empty()) throw InvalidArgument("chat request has no messages");
  if (!(temperature >= 0.0)) {
    throw InvalidArgument("chat request temperature must be >= 0");
  }
}

std::string ChatRequest::PromptText() const {
  std::string out;
  for (size_t i = 0; i < messages.size(); ++i) {
    if (i) out += '\n';
    out += messages[i].content;
  }
  return out;
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

namespace {

std::string FixedDecimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v + 0.0);  // + 0.0 folds -0 into 0
  return buf;
}

}  // namespace

std::string CanonicalPayload(const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back(
        {{"role", ChatRoleName(m.role)}, {"content", m.content}});
  }
  json j = {
      {"model", req.model_id},
      {"messages", std::move(messages)},
      {"temperature", FixedDecimal(req.temperature)},
      {"max_tokens", req.max_tokens ? json(*req.max_tokens) : json(nullptr)},
      {"request_tag", req.request_tag},
  };
  return j.dump();
}

std::string CanonicalPayload(const EmbeddingRequest& req) {
  json j = {{"model", req.model_id},
            {"input", req.input},
            {"request_tag", req.request_tag}};
  return j.dump();
}

CacheKey MakeCacheKey(CacheKind kind, std::string_view payload) {
  std::string data = kind == CacheKind::kChat ? "chat\n" : "embed\n";
  data.append(payload);
  return CacheKey{Sha256Hex(data)};
}

CacheKey MakeCacheKey(const ChatRequest& req) {
  return MakeCacheKey(CacheKind::kChat, CanonicalPayload(req));
}

CacheKey MakeCacheKey(const EmbeddingRequest& req) {
  return MakeCacheKey(CacheKind::kEmbed, CanonicalPayload(req));
}

JudgeVerdict ParseYesNo(std::string_view raw) {
  size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() &&
           !std::isalnum(static_cast<unsigned char>(raw[i]))) {
      ++i;
    }
    size_t start = i;
    while (i < raw.size() && std::isalnum(static_cast<unsigned char>(raw[i]))) {
      ++i;
    }
    std::string token(raw.substr(start, i - start));
    for (auto& c : token) c = static_cast<char>(std::tolower(c));
    if (token == "yes") return {true, std::string(raw)};
    if (token == "no") return {false, std::string(raw)};
  }
  throw UnparseableVerdict(std::string(raw));
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("cosine of vectors with different lengths (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw InvalidArgument("cosine of a zero vector");
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

// --- ResponseCache -----------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<std::string> ResponseCache::Get(const CacheKey& key) const {
  std::ifstream in(dir_ / key.digest, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ResponseCache::Put(const CacheKey& key, std::string_view value) {
  std::ostringstream tmp_name;
  tmp_name << "." << key.digest << ".tmp." << std::this_thread::get_id() << "."
           << tmp_counter_.fetch_add(1);
  auto tmp = dir_ / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache file " + tmp.string());
    out.write(value.data(), static_cast<std::streamsize>(value.size()));
    if (!out) throw Error("cannot write cache file " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, dir_ / key.digest, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot publish cache entry " + key.digest);
  }
}

// --- AuditLog ----------------------------------------------------------------

AuditLog::AuditLog(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  out_.open(path, std::ios::app);
  if (!out_) throw Error("cannot open audit log " + path.string());
}

void AuditLog::Record(AuditEntry entry) {
  std::lock_guard<std::mutex> lock(mu_);
  if (out_.is_open()) {
    json line = {{"key", entry.key},
                 {"kind", entry.kind},
                 {"request_tag", entry.request_tag},
                 {"prompt", entry.prompt},
                 {"response", entry.response},
                 {"cached", entry.cached}};
    out_ << line.dump() << '\n';
    out_.flush();
  }
  entries_.push_back(std::move(entry));
}

std::vector<AuditEntry> AuditLog::Entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

// --- retry / rate limiting ---------------------------------------------------

std::chrono::milliseconds RetryPolicy::BackoffFor(int attempt) const {
  double ms = static_cast<double>(initial_backoff.count()) *
              std::pow(multiplier, std::max(0, attempt - 1));
  ms = std::min(ms, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<int64_t>(ms));
}

RateLimiter::RateLimiter(double requests_per_minute)
    : capacity_(requests_per_minute > 0 ? std::max(1.0, requests_per_minute)
                                        : 0.0),
      tokens_(capacity_),
      per_second_(requests_per_minute / 60.0),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::Refill() {
  auto now = std::chrono::steady_clock::now();
  double elapsed = std::chrono::duration<double>(now - last_).count();
  last_ = now;
  tokens_ = std::min(capacity_, tokens_ + elapsed * per_second_);
}

bool RateLimiter::TryAcquire() {
  if (capacity_ == 0.0) return true;
  std::lock_guard<std::mutex> lock(mu_);
  Refill();
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

void RateLimiter::Acquire() {
  if (capacity_ == 0.0) return;
  for (;;) {
    double wait_s;
    {
      std::lock_guard<std::mutex> lock(mu_);
      Refill();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait_s = (1.0 - tokens_) / per_second_;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
  }
}

// --- services ----------------------------------------------------------------

namespace {

json PromptJson(const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back(
        {{"role", ChatRoleName(m.role)}, {"content", m.content}});
  }
  return {{"model", req.model_id}, {"messages", std::move(messages)}};
}

}  // namespace

ChatService::ChatService(std::shared_ptr<ChatBackend> backend,
                         std::string model_id, ServiceOptions options)
    : backend_(std::move(backend)),
      model_id_(std::move(model_id)),
      options_(std::move(options)),
      limiter_(options_.requests_per_minute) {}

ChatRequest ChatService::MakeRequest(std::string request_tag,
                                     std::string content) const {
  ChatRequest req;
  req.model_id = model_id_;
  req.messages.push_back({ChatRole::kUser, std::move(content)});
  req.temperature = options_.temperature;
  req.max_tokens = options_.max_tokens;
  req.request_tag = std::move(request_tag);
  return req;
}

std::string ChatService::Complete(const ChatRequest& req) {
  req.Validate();
  const CacheKey key = MakeCacheKey(req);
  auto audit = [&](const std::string& response, bool cached) {
    if (!options_.audit) return;
    options_.audit->Record({key.digest, "chat", req.request_tag,
                            PromptJson(req), response, cached});
  };
  if (options_.cache) {
    if (auto hit = options_.cache->Get(key)) {
      cache_hits_.fetch_add(1);
      audit(*hit, true);
      return *hit;
    }
  }
  std::string answer = WithRetry(options_.retry, [&] {
    limiter_.Acquire();
    backend_calls_.fetch_add(1);
    return backend_->Complete(req);
  });
  if (options_.cache) options_.cache->Put(key, answer);
  audit(answer, false);
  return answer;
}

EmbeddingService::EmbeddingService(std::shared_ptr<EmbeddingBackend> backend,
                                   std::string model_id, ServiceOptions options)
    : backend_(std::move(backend)),
      model_id_(std::move(model_id)),
      options_(std::move(options)),
      limiter_(options_.requests_per_minute) {}

EmbeddingVector EmbeddingService::Embed(const std::string& text,
                                        const std::string& request_tag) {
  EmbeddingRequest req{model_id_, text, request_tag};
  const CacheKey key = MakeCacheKey(req);
  auto audit = [&](const std::string& response, bool cached) {
    if (!options_.audit) return;
    options_.audit->Record({key.digest, "embed", request_tag,
                            json{{"model", model_id_}, {"input", text}},
                            response, cached});
  };
  if (options_.cache) {
    if (auto hit = options_.cache->Get(key)) {
      json parsed = json::parse(*hit, nullptr, false);
      if (parsed.is_array()) {
        cache_hits_.fetch_add(1);
        audit(*hit, true);
        return {parsed.get<std::vector<double>>(), model_id_};
      }
    }
  }
  std::vector<double> values = WithRetry(options_.retry, [&] {
    limiter_.Acquire();
    backend_calls_.fetch_add(1);
    return backend_->Embed(req);
  });
  if (values.empty()) {
    throw BackendError(BackendError::Kind::kMalformed,
                       "embedding backend returned an empty vector");
  }
  std::string payload = json(values).dump();
  if (options_.cache) options_.cache->Put(key, payload);
  audit(payload, false);
  return {std::move(values), model_id_};
}

JudgeVerdict AskYesNo(ChatService& chat, const ChatRequest& req) {
  std::string raw = chat.Complete(req);
  try {
    return ParseYesNo(raw);
  } catch (const UnparseableVerdict&) {
  }
  ChatRequest again = req;
  again.messages.back().content += "\n\n";
  again.messages.back().content += kVerdictReask;
  return ParseYesNo(chat.Complete(again));
}

}  // namespace convasr
