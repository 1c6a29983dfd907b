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

#include <fstream>

#include "convasr/correction.h"
#include "convasr/error.h"
#include "convasr/prompts.h"
#include "convasr/stubs.h"
#include "doctest.h"
#include "test_util.h"

namespace convasr {
namespace {

using testing::DataPath;
using testing::TempDir;

std::filesystem::path DefaultExemplars() {
  return std::filesystem::path(CONVASR_REPO_DATA) / "exemplars.default.jsonl";
}

ConversationSample Rocket() {
  ConversationSample s;
  s.id = "g03";
  s.question_id = "q03";
  s.speaker_id = "spk3";
  s.context = DialogueContext::Question("What animals do you like?");
  s.reference = "I like a cat";
  s.hypotheses["whisper"] = "I like rocket";
  return s;
}

size_t Count(const std::string& hay, const std::string& needle) {
  size_t n = 0;
  for (size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("zero-shot correction prompt") {
  auto req = BuildCorrectionPrompt(
      DialogueContext::Question("What animals do you like?"), "I like rocket",
      {}, "gpt-4");
  REQUIRE(req.messages.size() == 1);
  CHECK(req.request_tag == kTagCorrection);
  CHECK(req.model_id == "gpt-4");
  CHECK(req.temperature == 0.0);
  CHECK(req.messages[0].content ==
        std::string(kCorrectionInstruction) +
            "\n\nConversation Transcription:\n"
            "Person A: What animals do you like?\nPerson B: I like rocket");
}

TEST_CASE("few-shot correction prompt carries every exemplar") {
  auto exemplars = LoadExemplars(DefaultExemplars());
  REQUIRE(exemplars.size() == 5);
  auto req = BuildCorrectionPrompt(
      DialogueContext::Question("What animals do you like?"), "I like rocket",
      exemplars, "gpt-4", 0.3, 128);
  const std::string& p = req.messages[0].content;
  CHECK(p.starts_with(std::string(kCorrectionInstruction)));
  CHECK(Count(p, "Corrected: ") == 5);
  for (const auto& ex : exemplars) {
    CHECK(p.find("Person B: " + ex.erroneous +
                 "\nCorrected: " + ex.corrected) != std::string::npos);
  }
  // the sample under correction comes last
  CHECK(p.ends_with(
      "Person A: What animals do you like?\nPerson B: I like rocket"));
  CHECK(p.find("Examples:") < p.find("Conversation Transcription:"));
  CHECK(req.temperature == 0.3);
  CHECK(req.max_tokens == 128);

  // exemplars change the cache key
  auto zero = BuildCorrectionPrompt(
      DialogueContext::Question("What animals do you like?"), "I like rocket",
      {}, "gpt-4", 0.3, 128);
  CHECK(MakeCacheKey(zero).digest != MakeCacheKey(req).digest);
}

TEST_CASE("correction prompt preconditions") {
  CHECK_THROWS_AS(BuildCorrectionPrompt(DialogueContext{}, "x", {}, "m"),
                  InvalidArgument);
  CHECK_THROWS_AS(
      BuildCorrectionPrompt(DialogueContext::Question("Hi?"), "  ", {}, "m"),
      InvalidArgument);
}

TEST_CASE("prompt template placeholders") {
  PromptTemplate t{"t", "{a} and {b}"};
  CHECK(t.Render({{"a", "x"}, {"b", "{a}"}}) == "x and {a}");
  CHECK_THROWS_WITH_AS(t.Render({{"a", "x"}}), doctest::Contains("b"),
                       InvalidArgument);
}

TEST_CASE("judge and generator prompts contain their instructions") {
  auto ctx = DialogueContext::Question("What animals do you like?");
  CHECK(ResponseGenerationPrompt(ctx, "I like rocket")
            .find(std::string(kResponseGenerationInstruction)) == 0);
  CHECK(SensibilityPrompt(ctx, "I like a cat", "Do you have one?")
            .ends_with("Person B: I like a cat\nPerson A: Do you have one?"));
  CHECK(SensibilityPrompt(ctx, "I like a cat", "Do you have one?")
            .find(std::string(kSensibilityInstruction)) == 0);
  CHECK(EasySamplePrompt(ctx, "I like a cat")
            .find(std::string(kEasySampleInstruction)) == 0);
  CHECK(RelevancePrompt(ctx, "I like a cat")
            .find(std::string(kRelevanceInstruction)) == 0);
}

TEST_CASE("multi-turn contexts render one line per turn") {
  DialogueContext ctx{{{Role::kBot, "Hello!"},
                       {Role::kLearner, "hi"},
                       {Role::kBot, "How old are you?"}}};
  CHECK(RenderTurns(ctx) ==
        "Person A: Hello!\nPerson B: hi\nPerson A: How old are you?");
}

TEST_CASE("extracting the corrected line") {
  CHECK(ExtractCorrection("I like a cat") == "I like a cat");
  CHECK(ExtractCorrection("Person B: I like a cat") == "I like a cat");
  CHECK(ExtractCorrection("Here is the fix:\nPerson B: \"I like a cat\"\n") ==
        "I like a cat");
  CHECK(ExtractCorrection("\n\ncorrected:  I like   a cat ") == "I like a cat");
  CHECK(ExtractCorrection("'yes I do'") == "yes I do");
  CHECK(ExtractCorrection("  \n ").empty());
  CHECK(ExtractCorrection("Person B:").empty());
}

TEST_CASE("LLM corrector") {
  auto audit = std::make_shared<AuditLog>();
  ServiceOptions opts;
  opts.audit = audit;
  auto chat = std::make_shared<ChatService>(
      std::make_shared<ScriptedChatStub>(
          std::vector<ScriptedChatStub::Rule>{{std::string(kTagCorrection),
                                               {"Person B: I like rocket"},
                                               std::nullopt,
                                               "Person B: I like a cat"}},
          std::string("")),
      "gpt-4", opts);
  LlmCorrector corrector(chat, {});
  CHECK(corrector.Id() == "gpt-4");
  auto r = corrector.Correct(Rocket(), "whisper");
  CHECK(r.corrected == "I like a cat");
  CHECK(r.raw_response == "Person B: I like a cat");
  CHECK(r.source_system == "whisper");
  CHECK_FALSE(r.fell_back);
  CHECK(r.prompt_digest.digest == audit->Entries()[0].key);

  // an empty answer keeps the original hypothesis
  auto s = Rocket();
  s.hypotheses["whisper"] = "I like rabbits";
  auto fallback = corrector.Correct(s, "whisper");
  CHECK(fallback.fell_back);
  CHECK(fallback.corrected == "I like rabbits");
}

TEST_CASE("identity corrector") {
  IdentityCorrector id;
  auto r = id.Correct(Rocket(), "whisper");
  CHECK(r.corrected == "I like rocket");
  CHECK(r.corrector_id == "none");
  CHECK(r.prompt_digest.digest.empty());
  CHECK_THROWS_AS(id.Correct(Rocket(), "kaldi"), DataError);
}

TEST_CASE("external corrections") {
  auto manifest = LoadManifest(DataPath("golden/manifest.jsonl"));
  auto corr = LoadExternalCorrections(
      DataPath("golden/seq2seq_corrections.jsonl"), "seq2seq", &manifest);
  CHECK(corr.size() == 12);
  ExternalCorrector ext("seq2seq", corr);
  CHECK(ext.Id() == "seq2seq");
  CHECK(ext.Correct(manifest.samples[1], "whisper").corrected ==
        "Thank you I want a coke");
  auto other = Rocket();
  other.id = "zzz";
  CHECK_THROWS_AS(ext.Correct(other, "whisper"), DataError);

  TempDir dir;
  std::ofstream(dir / "dup.jsonl")
      << R"({"sample_id":"g01","corrected":"a"})" << "\n"
      << R"({"sample_id":"g01","corrected":"b"})" << "\n";
  CHECK_THROWS_WITH_AS(LoadExternalCorrections(dir / "dup.jsonl", "x"),
                       doctest::Contains("duplicate"), DataError);
  std::ofstream(dir / "unknown.jsonl")
      << R"({"sample_id":"nope","corrected":"a"})" << "\n";
  CHECK_NOTHROW(LoadExternalCorrections(dir / "unknown.jsonl", "x"));
  CHECK_THROWS_WITH_AS(
      LoadExternalCorrections(dir / "unknown.jsonl", "x", &manifest),
      doctest::Contains("unknown sample"), DataError);
}

TEST_CASE("saved corrections load back as external corrections") {
  TempDir dir;
  IdentityCorrector id;
  std::vector<CorrectionResult> results = {id.Correct(Rocket(), "whisper")};
  SaveCorrections(results, dir / "c.jsonl");
  auto back = LoadExternalCorrections(dir / "c.jsonl", "replay");
  REQUIRE(back.count("g03") == 1);
  CHECK(back["g03"].corrected == "I like rocket");
  CHECK(back["g03"].corrector_id == "replay");
}

}  // namespace convasr
