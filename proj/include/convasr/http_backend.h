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

// OpenAI-compatible HTTP backends:
//   POST {base_url}/chat/completions   {model, messages, temperature[,
//   max_tokens]} POST {base_url}/embeddings         {model, input}

#ifndef CONVASR_HTTP_BACKEND_H_
#define CONVASR_HTTP_BACKEND_H_

#include <string>

#include "convasr/backends.h"

namespace convasr {

struct HttpEndpoint {
  std::string base_url;     // e.g. "https://api.openai.com/v1"
  std::string api_key_env;  // empty: no Authorization header
  double timeout_s = 60.0;
  bool offline = false;  // every call fails with BackendError::kOffline
};

class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpEndpoint endpoint);

  std::string Complete(const ChatRequest& req) override;
  std::string Identity() const override { return "http:" + endpoint_.base_url; }

 private:
  HttpEndpoint endpoint_;
};

class HttpEmbeddingBackend : public EmbeddingBackend {
 public:
  explicit HttpEmbeddingBackend(HttpEndpoint endpoint);

  std::vector<double> Embed(const EmbeddingRequest& req) override;
  std::string Identity() const override { return "http:" + endpoint_.base_url; }

 private:
  HttpEndpoint endpoint_;
};

// POSTs `body` to base_url + path and returns the parsed JSON response,
// mapping HTTP failures onto BackendError kinds (429/5xx/connection errors are
// transient, 401/403 auth, other statuses request errors).
nlohmann::json PostJson(const HttpEndpoint& endpoint, const std::string& path,
                        const nlohmann::json& body);

}  // namespace convasr

#endif  // CONVASR_HTTP_BACKEND_H_
