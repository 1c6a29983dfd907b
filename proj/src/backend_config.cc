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

#include "convasr/backend_config.h"

#include <fstream>

#include "convasr/error.h"
#include "convasr/http_backend.h"
#include "convasr/stubs.h"

namespace convasr {

using nlohmann::json;

BackendSpec BackendSpec::FromJson(const json& j,
                                  const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw DataError("backend spec must be a JSON object");
  BackendSpec spec;
  spec.kind = j.value("kind", std::string());
  if (spec.kind != "http" && spec.kind != "scripted-stub" &&
      spec.kind != "hash-stub" && spec.kind != "echo-stub") {
    throw DataError("unknown backend kind \"" + spec.kind + "\"");
  }
  spec.base_url = j.value("base_url", std::string());
  spec.model = j.value("model", spec.kind);
  spec.api_key_env = j.value("api_key_env", std::string());
  spec.dimension = j.value("dimension", size_t{384});
  spec.temperature = j.value("temperature", 0.0);
  if (j.contains("max_tokens") && !j["max_tokens"].is_null()) {
    spec.max_tokens = j["max_tokens"].get<int>();
  }
  spec.max_attempts = j.value("max_attempts", 4);
  spec.requests_per_minute = j.value("requests_per_minute", 0.0);
  spec.timeout_s = j.value("timeout_s", 60.0);

  if (j.contains("script")) {
    const json& s = j["script"];
    if (s.is_string()) {
      auto path = base_dir / s.get<std::string>();
      std::ifstream in(path);
      if (!in) throw DataError("cannot open backend script", path.string());
      spec.script = json::parse(in, nullptr, false);
      if (spec.script.is_discarded()) {
        throw DataError("invalid JSON", path.string());
      }
    } else {
      spec.script = s;
    }
  }
  if (spec.kind == "http" && spec.base_url.empty()) {
    throw DataError("http backend needs a base_url");
  }
  if (spec.temperature < 0) throw DataError("temperature must be >= 0");
  return spec;
}

namespace {

ServiceOptions OptionsFor(const BackendSpec& spec, const ServiceEnv& env) {
  ServiceOptions opts;
  opts.cache = env.cache;
  opts.audit = env.audit;
  opts.retry.max_attempts = spec.max_attempts;
  opts.retry.sleep = env.sleep;
  opts.requests_per_minute = spec.requests_per_minute;
  opts.temperature = spec.temperature;
  opts.max_tokens = spec.max_tokens;
  return opts;
}

HttpEndpoint EndpointFor(const BackendSpec& spec, const ServiceEnv& env) {
  return {spec.base_url, spec.api_key_env, spec.timeout_s, env.offline};
}

}  // namespace

std::unique_ptr<ChatService> MakeChatService(const BackendSpec& spec,
                                             const ServiceEnv& env) {
  std::shared_ptr<ChatBackend> backend;
  if (spec.kind == "http") {
    backend = std::make_shared<HttpChatBackend>(EndpointFor(spec, env));
  } else if (spec.kind == "scripted-stub") {
    backend = std::make_shared<ScriptedChatStub>(ScriptedChatStub::FromJson(
        spec.script.is_null() ? json::object() : spec.script));
  } else if (spec.kind == "echo-stub") {
    backend = std::make_shared<EchoChatStub>();
  } else {
    throw DataError("backend kind \"" + spec.kind +
                    "\" cannot serve chat requests");
  }
  return std::make_unique<ChatService>(std::move(backend), spec.model,
                                       OptionsFor(spec, env));
}

std::unique_ptr<EmbeddingService> MakeEmbeddingService(const BackendSpec& spec,
                                                       const ServiceEnv& env) {
  std::shared_ptr<EmbeddingBackend> backend;
  if (spec.kind == "http") {
    backend = std::make_shared<HttpEmbeddingBackend>(EndpointFor(spec, env));
  } else if (spec.kind == "hash-stub") {
    backend = std::make_shared<HashEmbeddingStub>(spec.dimension);
  } else if (spec.kind == "scripted-stub") {
    backend =
        std::make_shared<ScriptedEmbeddingStub>(ScriptedEmbeddingStub::FromJson(
            spec.script.is_null() ? json::object() : spec.script));
  } else {
    throw DataError("backend kind \"" + spec.kind +
                    "\" cannot serve embedding requests");
  }
  return std::make_unique<EmbeddingService>(std::move(backend), spec.model,
                                            OptionsFor(spec, env));
}

}  // namespace convasr
