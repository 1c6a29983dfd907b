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

#include "convasr/http_backend.h"

#include <cstdlib>

#include "convasr/error.h"
#include "httplib.h"

namespace convasr {

using nlohmann::json;
using Kind = BackendError::Kind;

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash, may be empty
};

SplitUrl ParseBaseUrl(const std::string& base_url) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw InvalidArgument("base_url needs a scheme: \"" + base_url + "\"");
  }
  auto path_start = base_url.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.origin = base_url;
  } else {
    out.origin = base_url.substr(0, path_start);
    out.prefix = base_url.substr(path_start);
  }
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

std::string Snippet(const std::string& body) {
  constexpr size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

}  // namespace

json PostJson(const HttpEndpoint& endpoint, const std::string& path,
              const json& body) {
  if (endpoint.offline) {
    throw BackendError(Kind::kOffline, "offline mode: refusing to contact " +
                                           endpoint.base_url);
  }
  const SplitUrl url = ParseBaseUrl(endpoint.base_url);

  httplib::Headers headers;
  if (!endpoint.api_key_env.empty()) {
    const char* key = std::getenv(endpoint.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw BackendError(Kind::kAuth, "environment variable " +
                                          endpoint.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration<double>(endpoint.timeout_s);
  client.set_connection_timeout(
      std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(
      std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(
      std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  auto res =
      client.Post(url.prefix + path, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendError(Kind::kTransient,
                       "request to " + endpoint.base_url + path +
                           " failed: " + httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 401 || status == 403) {
    throw BackendError(Kind::kAuth, "HTTP " + std::to_string(status) + ": " +
                                        Snippet(res->body));
  }
  if (status == 408 || status == 429 || status >= 500) {
    throw BackendError(Kind::kTransient, "HTTP " + std::to_string(status) +
                                             ": " + Snippet(res->body));
  }
  if (status < 200 || status >= 300) {
    throw BackendError(Kind::kRequest, "HTTP " + std::to_string(status) + ": " +
                                           Snippet(res->body));
  }
  json parsed = json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) {
    throw BackendError(Kind::kMalformed,
                       "response is not JSON: " + Snippet(res->body));
  }
  return parsed;
}

HttpChatBackend::HttpChatBackend(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  ParseBaseUrl(endpoint_.base_url);
}

std::string HttpChatBackend::Complete(const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back(
        {{"role", ChatRoleName(m.role)}, {"content", m.content}});
  }
  json body = {{"model", req.model_id},
               {"messages", std::move(messages)},
               {"temperature", req.temperature}};
  if (req.max_tokens) body["max_tokens"] = *req.max_tokens;

  json response = PostJson(endpoint_, "/chat/completions", body);
  const json* content = nullptr;
  if (response.contains("choices") && response["choices"].is_array() &&
      !response["choices"].empty()) {
    const json& choice = response["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
      content = &choice["message"]["content"];
    }
  }
  if (content == nullptr) {
    throw BackendError(Kind::kMalformed,
                       "no choices[0].message.content in chat response");
  }
  return content->get<std::string>();
}

HttpEmbeddingBackend::HttpEmbeddingBackend(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  ParseBaseUrl(endpoint_.base_url);
}

std::vector<double> HttpEmbeddingBackend::Embed(const EmbeddingRequest& req) {
  json body = {{"model", req.model_id}, {"input", req.input}};
  json response = PostJson(endpoint_, "/embeddings", body);
  if (!response.contains("data") || !response["data"].is_array() ||
      response["data"].empty() || !response["data"][0].contains("embedding") ||
      !response["data"][0]["embedding"].is_array()) {
    throw BackendError(Kind::kMalformed,
                       "no data[0].embedding in embeddings response");
  }
  try {
    return response["data"][0]["embedding"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw BackendError(Kind::kMalformed,
                       std::string("bad embedding values: ") + e.what());
  }
}

}  // namespace convasr
