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

#ifndef CONVASR_BACKEND_CONFIG_H_
#define CONVASR_BACKEND_CONFIG_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "convasr/backends.h"
#include "json.hpp"

namespace convasr {

// One backend as written in a config file:
//   {"kind": "http" | "scripted-stub" | "hash-stub" | "echo-stub",
//    "base_url": ..., "model": ..., "api_key_env": ...,
//    "script": <path or inline object>, "dimension": 384,
//    "temperature": 0, "max_tokens": n, "max_attempts": 4,
//    "requests_per_minute": 0, "timeout_s": 60}
struct BackendSpec {
  std::string kind;
  std::string base_url;
  std::string model;
  std::string api_key_env;
  nlohmann::json script;  // resolved inline script for scripted stubs
  size_t dimension = 384;
  double temperature = 0.0;
  std::optional<int> max_tokens;
  int max_attempts = 4;
  double requests_per_minute = 0.0;
  double timeout_s = 60.0;

  // Relative script paths are resolved against `base_dir`.
  static BackendSpec FromJson(const nlohmann::json& j,
                              const std::filesystem::path& base_dir);
};

// What every service built for one run shares.
struct ServiceEnv {
  std::shared_ptr<ResponseCache> cache;
  std::shared_ptr<AuditLog> audit;
  bool offline = false;
  std::function<void(std::chrono::milliseconds)> sleep;
};

std::unique_ptr<ChatService> MakeChatService(const BackendSpec& spec,
                                             const ServiceEnv& env);
std::unique_ptr<EmbeddingService> MakeEmbeddingService(const BackendSpec& spec,
                                                       const ServiceEnv& env);

}  // namespace convasr

#endif  // CONVASR_BACKEND_CONFIG_H_
