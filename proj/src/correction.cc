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

#include "convasr/correction.h"

#include <set>

#include "convasr/error.h"
#include "convasr/jsonl.h"
#include "convasr/text.h"

namespace convasr {

using nlohmann::json;

const PromptTemplate& CorrectionTemplate() {
  static const PromptTemplate kTemplate{
      "asr-correction",
      std::string(kCorrectionInstruction) +
          "\n\n{exemplars}Conversation Transcription:\n{context_turns}\n"
          "Person B: {hypothesis}"};
  return kTemplate;
}

std::string RenderExemplars(const std::vector<FewShotExemplar>& exemplars) {
  if (exemplars.empty()) return {};
  std::string out = "Examples:\n\n";
  for (const auto& ex : exemplars) {
    out += RenderTurns(ex.context);
    out += "\nPerson B: " + CollapseWhitespace(ex.erroneous);
    out += "\nCorrected: " + CollapseWhitespace(ex.corrected);
    out += "\n\n";
  }
  return out;
}

ChatRequest BuildCorrectionPrompt(const DialogueContext& context,
                                  std::string_view hypothesis,
                                  const std::vector<FewShotExemplar>& exemplars,
                                  const std::string& model_id,
                                  double temperature,
                                  std::optional<int> max_tokens) {
  if (context.turns.empty()) {
    throw InvalidArgument("correction prompt needs a dialogue context");
  }
  if (Trim(hypothesis).empty()) {
    throw InvalidArgument("correction prompt needs a non-empty hypothesis");
  }
  ChatRequest req;
  req.model_id = model_id;
  req.temperature = temperature;
  req.max_tokens = max_tokens;
  req.request_tag = std::string(kTagCorrection);
  req.messages.push_back(
      {ChatRole::kUser, CorrectionTemplate().Render(
                            {{"exemplars", RenderExemplars(exemplars)},
                             {"context_turns", RenderTurns(context)},
                             {"hypothesis", CollapseWhitespace(hypothesis)}})});
  return req;
}

namespace {

std::string_view StripLabel(std::string_view line) {
  for (std::string_view label : {"Person B:", "Corrected:"}) {
    if (StartsWithIgnoreCase(line, label))
      return Trim(line.substr(label.size()));
  }
  return line;
}

std::string_view StripQuotes(std::string_view s) {
  static const std::pair<std::string_view, std::string_view> kPairs[] = {
      {"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}};
  for (const auto& [open, close] : kPairs) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) &&
        s.ends_with(close)) {
      return Trim(s.substr(open.size(), s.size() - open.size() - close.size()));
    }
  }
  return s;
}

}  // namespace

std::string ExtractCorrection(std::string_view raw) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  while (pos <= raw.size()) {
    size_t nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    std::string_view line = Trim(raw.substr(pos, nl - pos));
    if (!line.empty()) lines.push_back(line);
    pos = nl + 1;
  }
  if (lines.empty()) return {};
  std::string_view chosen = lines.front();
  for (auto line : lines) {
    if (StartsWithIgnoreCase(line, "Person B:") ||
        StartsWithIgnoreCase(line, "Corrected:")) {
      chosen = line;
      break;
    }
  }
  return CollapseWhitespace(StripQuotes(StripLabel(chosen)));
}

CorrectionResult CorrectHypothesis(
    const ConversationSample& sample, const std::string& source_system,
    ChatService& chat, const std::vector<FewShotExemplar>& exemplars) {
  const std::string& hypothesis = sample.Hypothesis(source_system);
  ChatRequest req = BuildCorrectionPrompt(
      sample.context, hypothesis, exemplars, chat.model_id(),
      chat.options().temperature, chat.options().max_tokens);

  CorrectionResult out;
  out.sample_id = sample.id;
  out.source_system = source_system;
  out.corrector_id = chat.model_id();
  out.prompt_digest = MakeCacheKey(req);
  out.raw_response = chat.Complete(req);
  out.corrected = ExtractCorrection(out.raw_response);
  if (out.corrected.empty()) {
    out.corrected = hypothesis;
    out.fell_back = true;
  }
  return out;
}

std::vector<FewShotExemplar> LoadExemplars(const std::filesystem::path& path) {
  std::vector<FewShotExemplar> out;
  ForEachJsonLine(path, [&](const json& j, size_t) {
    FewShotExemplar ex;
    ex.context = ContextFromJson(j.at("context"));
    ex.erroneous = j.at("erroneous").get<std::string>();
    ex.corrected = j.at("corrected").get<std::string>();
    if (Trim(ex.erroneous).empty() || Trim(ex.corrected).empty()) {
      throw DataError("exemplar with an empty transcription");
    }
    out.push_back(std::move(ex));
  });
  return out;
}

std::map<std::string, CorrectionResult> LoadExternalCorrections(
    const std::filesystem::path& path, const std::string& corrector_id,
    const CorpusManifest* manifest) {
  std::set<std::string> known;
  if (manifest) {
    for (const auto& s : manifest->samples) known.insert(s.id);
  }
  std::map<std::string, CorrectionResult> out;
  ForEachJsonLine(path, [&](const json& j, size_t) {
    CorrectionResult r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.corrected = j.at("corrected").get<std::string>();
    r.raw_response = j.value("raw_response", r.corrected);
    r.corrector_id = corrector_id;
    r.source_system = j.value("source_system", std::string());
    if (Trim(r.corrected).empty()) {
      throw DataError("empty correction for sample \"" + r.sample_id + "\"");
    }
    if (manifest && !known.count(r.sample_id)) {
      throw DataError("correction for unknown sample \"" + r.sample_id + "\"");
    }
    std::string id = r.sample_id;
    if (!out.emplace(id, std::move(r)).second) {
      throw DataError("duplicate sample_id \"" + id + "\"");
    }
  });
  return out;
}

void SaveCorrections(const std::vector<CorrectionResult>& results,
                     const std::filesystem::path& path) {
  std::vector<json> records;
  for (const auto& r : results) {
    records.push_back({{"sample_id", r.sample_id},
                       {"source_system", r.source_system},
                       {"corrected", r.corrected},
                       {"corrector_id", r.corrector_id},
                       {"prompt_digest", r.prompt_digest.digest},
                       {"raw_response", r.raw_response},
                       {"fell_back", r.fell_back}});
  }
  WriteJsonLines(path, records);
}

CorrectionResult IdentityCorrector::Correct(const ConversationSample& sample,
                                            const std::string& source_system) {
  CorrectionResult out;
  out.sample_id = sample.id;
  out.source_system = source_system;
  out.corrected = sample.Hypothesis(source_system);
  out.corrector_id = Id();
  out.raw_response = out.corrected;
  return out;
}

LlmCorrector::LlmCorrector(std::shared_ptr<ChatService> chat,
                           std::vector<FewShotExemplar> exemplars)
    : chat_(std::move(chat)), exemplars_(std::move(exemplars)) {}

CorrectionResult LlmCorrector::Correct(const ConversationSample& sample,
                                       const std::string& source_system) {
  return CorrectHypothesis(sample, source_system, *chat_, exemplars_);
}

std::string LlmCorrector::Id() const { return chat_->model_id(); }

ExternalCorrector::ExternalCorrector(
    std::string id, std::map<std::string, CorrectionResult> corrections)
    : id_(std::move(id)), corrections_(std::move(corrections)) {}

CorrectionResult ExternalCorrector::Correct(const ConversationSample& sample,
                                            const std::string& source_system) {
  auto it = corrections_.find(sample.id);
  if (it == corrections_.end()) {
    throw DataError("no external correction for sample \"" + sample.id + "\"");
  }
  CorrectionResult out = it->second;
  out.source_system = source_system;
  return out;
}

}  // namespace convasr
