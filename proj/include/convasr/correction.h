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

// ASR error correction: LLM-prompted (zero- or few-shot), identity, and
// corrections produced elsewhere and loaded from disk.

#ifndef CONVASR_CORRECTION_H_
#define CONVASR_CORRECTION_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "convasr/backends.h"
#include "convasr/corpus.h"
#include "convasr/prompts.h"

namespace convasr {

struct FewShotExemplar {
  DialogueContext context;
  std::string erroneous;
  std::string corrected;
};

struct CorrectionResult {
  std::string sample_id;
  std::string source_system;
  std::string corrected;
  std::string corrector_id;
  CacheKey prompt_digest;  // empty for corrections not produced by a prompt
  std::string raw_response;
  bool fell_back = false;  // extraction was empty, original hypothesis kept
};

// The correction prompt template. Placeholders: {exemplars} (may be empty),
// {context_turns}, {hypothesis}.
const PromptTemplate& CorrectionTemplate();

// Renders the exemplar block: a header line followed by one
// Person A / Person B / Corrected triple per exemplar. Empty for no exemplars.
std::string RenderExemplars(const std::vector<FewShotExemplar>& exemplars);

ChatRequest BuildCorrectionPrompt(const DialogueContext& context,
                                  std::string_view hypothesis,
                                  const std::vector<FewShotExemplar>& exemplars,
                                  const std::string& model_id,
                                  double temperature = 0.0,
                                  std::optional<int> max_tokens = std::nullopt);

// Pulls the corrected learner line out of a model answer. Uses the first line
// labelled "Person B:" or "Corrected:" if there is one, else the first
// non-empty line; strips the label and surrounding quotes. Returns an empty
// string when nothing is left.
std::string ExtractCorrection(std::string_view raw);

CorrectionResult CorrectHypothesis(
    const ConversationSample& sample, const std::string& source_system,
    ChatService& chat, const std::vector<FewShotExemplar>& exemplars);

// Line-delimited {context, erroneous, corrected}; context is a turn list or a
// plain question string.
std::vector<FewShotExemplar> LoadExemplars(const std::filesystem::path& path);

// Line-delimited {sample_id, corrected[, raw_response]}. When `manifest` is
// given every sample id must exist in it.
std::map<std::string, CorrectionResult> LoadExternalCorrections(
    const std::filesystem::path& path, const std::string& corrector_id,
    const CorpusManifest* manifest = nullptr);

void SaveCorrections(const std::vector<CorrectionResult>& results,
                     const std::filesystem::path& path);

// A method that maps a sample's ASR hypothesis to a corrected one.
class Corrector {
 public:
  virtual ~Corrector() = default;
  virtual CorrectionResult Correct(const ConversationSample& sample,
                                   const std::string& source_system) = 0;
  virtual std::string Id() const = 0;
};

class IdentityCorrector : public Corrector {
 public:
  CorrectionResult Correct(const ConversationSample& sample,
                           const std::string& source_system) override;
  std::string Id() const override { return "none"; }
};

class LlmCorrector : public Corrector {
 public:
  LlmCorrector(std::shared_ptr<ChatService> chat,
               std::vector<FewShotExemplar> exemplars);

  CorrectionResult Correct(const ConversationSample& sample,
                           const std::string& source_system) override;
  std::string Id() const override;

 private:
  std::shared_ptr<ChatService> chat_;
  std::vector<FewShotExemplar> exemplars_;
};

class ExternalCorrector : public Corrector {
 public:
  ExternalCorrector(std::string id,
                    std::map<std::string, CorrectionResult> corrections);

  // Throws DataError if the sample has no stored correction.
  CorrectionResult Correct(const ConversationSample& sample,
                           const std::string& source_system) override;
  std::string Id() const override { return id_; }

 private:
  std::string id_;
  std::map<std::string, CorrectionResult> corrections_;
};

}  // namespace convasr

#endif  // CONVASR_CORRECTION_H_
