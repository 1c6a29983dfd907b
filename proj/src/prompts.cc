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

#include "convasr/prompts.h"

#include "convasr/error.h"
#include "convasr/text.h"

namespace convasr {

std::string PromptTemplate::Render(
    const std::map<std::string, std::string>& values) const {
  std::string out;
  size_t pos = 0;
  while (pos < body.size()) {
    size_t open = body.find('{', pos);
    if (open == std::string::npos) break;
    size_t close = body.find('}', open + 1);
    if (close == std::string::npos) break;
    std::string key = body.substr(open + 1, close - open - 1);
    bool is_name = !key.empty();
    for (char c : key) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
        is_name = false;
      }
    }
    out.append(body, pos, open - pos);
    if (!is_name) {
      out.push_back('{');
      pos = open + 1;
      continue;
    }
    auto it = values.find(key);
    if (it == values.end()) {
      throw InvalidArgument("template \"" + name + "\": placeholder {" + key +
                            "} is not filled");
    }
    out += it->second;
    pos = close + 1;
  }
  out.append(body, pos, std::string::npos);
  return out;
}

std::string RenderTurns(const DialogueContext& context) {
  std::string out;
  for (size_t i = 0; i < context.turns.size(); ++i) {
    const auto& turn = context.turns[i];
    if (i) out += '\n';
    out += turn.role == Role::kBot ? "Person A: " : "Person B: ";
    out += CollapseWhitespace(turn.text);
  }
  return out;
}

namespace {

std::string Line(std::string_view speaker, std::string_view text) {
  std::string out(speaker);
  out += ": ";
  out += CollapseWhitespace(text);
  return out;
}

}  // namespace

std::string RelevancePrompt(const DialogueContext& context,
                            std::string_view answer) {
  return std::string(kRelevanceInstruction) + "\n\n" + RenderTurns(context) +
         "\n" + Line("Person B", answer);
}

std::string ResponseGenerationPrompt(const DialogueContext& context,
                                     std::string_view answer) {
  return std::string(kResponseGenerationInstruction) + "\n\nConversation:\n" +
         RenderTurns(context) + "\n" + Line("Person B", answer);
}

std::string SensibilityPrompt(const DialogueContext& context,
                              std::string_view answer,
                              std::string_view bot_response) {
  return std::string(kSensibilityInstruction) + "\n\nConversation:\n" +
         RenderTurns(context) + "\n" + Line("Person B", answer) + "\n" +
         Line("Person A", bot_response);
}

std::string EasySamplePrompt(const DialogueContext& context,
                             std::string_view answer) {
  return std::string(kEasySampleInstruction) + "\n\nConversation:\n" +
         RenderTurns(context) + "\n" + Line("Person B", answer);
}

}  // namespace convasr
