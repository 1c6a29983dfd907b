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

// Instruction texts for every LLM call the toolkit makes, and the shared
// "Person A / Person B" conversation rendering. The instruction strings must
// stay byte-identical; tests check them by substring.

#ifndef CONVASR_PROMPTS_H_
#define CONVASR_PROMPTS_H_

#include <map>
#include <string>
#include <string_view>

#include "convasr/corpus.h"

namespace convasr {

inline constexpr std::string_view kCorrectionInstruction =
    "You are an expert transcriptionist and have been given the task to "
    "review the accuracy of a speech recognition system. Below is a "
    "conversation transcription. Identify any speech recognition errors in "
    "the transcript and provide the corrected version. Remember, do not "
    "correct grammatical errors, sentence structures, verb tenses, "
    "repetitions, and hesitations. Your focus should be solely on fixing "
    "speech recognition errors.";

inline constexpr std::string_view kRelevanceInstruction =
    "Check if person B's response has at least a point. Please focus only on "
    "the overall meaning of the response. Give a clear answer (Yes or No).";

inline constexpr std::string_view kSensibilityInstruction =
    "As an expert conversationalist, your task is to evaluate a conversation "
    "between two individuals. Assess whether Person A's response is sensible "
    "and relevant to Person B's response. Additionally, ensure that Person A "
    "does not misunderstand Person B and does not bring up irrelevant "
    "entities that were not mentioned by Person B. Finally, check if person A "
    "does not ask redundant clarification questions when person B has "
    "already provided a valid answer. Provide a clear 'Yes' or 'No' answer "
    "indicating whether Person A's response meets all the requirements.";

inline constexpr std::string_view kResponseGenerationInstruction =
    "You're an expert conversationalist. You will be given a conversation "
    "between two people: Person A and Person B. I want you to play the role "
    "of Person A and write the next response.";

inline constexpr std::string_view kEasySampleInstruction =
    "You're an expert conversationalist. Given a conversation below, "
    "determine whether Person B's answer is clear, sensible, relevant to "
    "Person A's question. Please provide a clear preference (Yes or No).";

// Request tags used in the audit trail and cache keys.
inline constexpr std::string_view kTagCorrection = "correction";
inline constexpr std::string_view kTagRelevance = "relevance";
inline constexpr std::string_view kTagSensibility = "nrs-judge";
inline constexpr std::string_view kTagGeneration = "nrs-generate";
inline constexpr std::string_view kTagEasy = "easy-filter";

// A template body with {name} placeholders.
struct PromptTemplate {
  std::string name;
  std::string body;

  // Substitutes every placeholder. Throws InvalidArgument naming the first
  // placeholder without a value. Values are inserted verbatim.
  std::string Render(const std::map<std::string, std::string>& values) const;
};

// One "Person A: ..." / "Person B: ..." line per turn (bot turns are Person A,
// learner turns Person B), joined by newlines.
std::string RenderTurns(const DialogueContext& context);

std::string RelevancePrompt(const DialogueContext& context,
                            std::string_view answer);
std::string ResponseGenerationPrompt(const DialogueContext& context,
                                     std::string_view answer);
std::string SensibilityPrompt(const DialogueContext& context,
                              std::string_view answer,
                              std::string_view bot_response);
std::string EasySamplePrompt(const DialogueContext& context,
                             std::string_view answer);

}  // namespace convasr

#endif  // CONVASR_PROMPTS_H_
