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

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <tuple>

#include "convasr/backends.h"
#include "convasr/error.h"
#include "convasr/metrics.h"
#include "convasr/prompts.h"
#include "convasr/stubs.h"
#include "convasr/text.h"
#include "doctest.h"
#include "test_util.h"
#include "wer_oracle.h"

namespace convasr {

using testing::AllSequences;
using testing::BruteForceAlign;

TEST_CASE("NormalizeText lowercases and strips punctuation") {
  CHECK(NormalizeText("My color, ICE is blues!") == "my color ice is blues");
  CHECK(NormalizeText("  I   don't  KNOW. ") == "i don't know");
  CHECK(NormalizeText("'hello' world'") == "hello world");
  CHECK(NormalizeText("well-known") == "well known");
  CHECK(NormalizeText("caf\xC3\xA9 ok") == "caf\xC3\xA9 ok");
  CHECK(NormalizeText("...").empty());
}

TEST_CASE("NormalizeText is idempotent") {
  std::mt19937 rng(11);
  const std::string chars = "aB c'D-.,!?  xyz'9\t";
  for (int n = 0; n < 2000; ++n) {
    std::string s;
    size_t len = rng() % 24;
    for (size_t i = 0; i < len; ++i) s += chars[rng() % chars.size()];
    std::string once = NormalizeText(s);
    CHECK(NormalizeText(once) == once);
  }
}

TEST_CASE("WER worked examples") {
  auto w1 = WordErrorRate("my color eyes is blues", "my color ice is blues");
  CHECK(w1.substitutions == 1);
  CHECK(w1.insertions == 0);
  CHECK(w1.deletions == 0);
  CHECK(w1.ref_len == 5);
  CHECK(w1.wer_percent == 20.0);

  auto w2 = WordErrorRate("my color eyes is blues", "my eye color is blue");
  CHECK(w2.errors() == 3);
  CHECK(w2.wer_percent == 60.0);
}

TEST_CASE("WER edge cases") {
  CHECK(WordErrorRate("a b c", "a b c").wer_percent == 0.0);
  CHECK(WordErrorRate("Hello, World", "hello world").wer_percent == 0.0);
  auto all_deleted = WordErrorRate("a b c", "");
  CHECK(all_deleted.deletions == 3);
  CHECK(all_deleted.wer_percent == 100.0);
  auto inserted = WordErrorRate("a", "a b c");
  CHECK(inserted.insertions == 2);
  CHECK(inserted.wer_percent == 200.0);
  CHECK_THROWS_AS(WordErrorRate("", "a"), InvalidArgument);
  CHECK_THROWS_AS(WordErrorRate(" ?! ", "a"), InvalidArgument);
}

TEST_CASE("alignment matches brute force on all short sequences") {
  auto seqs = AllSequences(4);
  REQUIRE(seqs.size() == 121);
  size_t pairs = 0;
  for (const auto& r : seqs) {
    for (const auto& h : seqs) {
      EditCounts got = AlignWords(r, h);
      EditCounts want = BruteForceAlign(r, h);
      if (!(got == want)) {
        FAIL_CHECK("mismatch for ref=" << Join(r, " ")
                                       << " hyp=" << Join(h, " "));
      }
      ++pairs;
    }
  }
  CHECK(pairs == 14641);
}

TEST_CASE("edit total is symmetric and bounded") {
  auto seqs = AllSequences(3);
  for (const auto& r : seqs) {
    for (const auto& h : seqs) {
      EditCounts a = AlignWords(r, h);
      EditCounts b = AlignWords(h, r);
      CHECK(a.total() == b.total());
      CHECK(a.total() <= std::max(r.size(), h.size()));
      CHECK(a.insertions + r.size() == a.deletions + h.size());
      CHECK((a.total() == 0) == (r == h));
    }
  }
}

TEST_CASE("rounding is half away from zero at one decimal") {
  CHECK(FormatOneDecimal(82.28346456692913) == "82.3");
  CHECK(FormatOneDecimal(0.15) == "0.2");
  CHECK(FormatOneDecimal(0.25) == "0.3");
  CHECK(FormatOneDecimal(2.45) == "2.5");
  CHECK(FormatOneDecimal(-2.45) == "-2.5");
  CHECK(FormatOneDecimal(99.96) == "100.0");
  CHECK(FormatOneDecimal(-0.04) == "0.0");
  CHECK(FormatOneDecimal(20.0) == "20.0");
  CHECK(RoundHalfUp(1.005, 2) == 1.01);
  CHECK(FormatFull(0.1) == "0.1");
  CHECK(FormatFull(91.98662110078) == "91.98662110078");
}

TEST_CASE("aggregate NRS and length-weighted WER") {
  std::vector<SampleMetrics> rows(1016);
  for (size_t i = 0; i < rows.size(); ++i) {
    rows[i].sensible = i < 836;
    rows[i].wer.ref_len = 5;
    rows[i].sts = 90.0;
  }
  auto agg = AggregateReport(rows);
  CHECK(agg.rows == 1016);
  CHECK(FormatOneDecimal(agg.nrs_percent) == "82.3");
  CHECK(agg.wer_percent == 0.0);
  CHECK(agg.sts_mean == doctest::Approx(90.0));

  for (auto& r : rows) r.sensible = true;
  CHECK(FormatOneDecimal(AggregateReport(rows).nrs_percent) == "100.0");

  // One long perfect row outweighs a short wrong one.
  std::vector<SampleMetrics> two(2);
  two[0].wer = WordErrorRate("a b c d e f g h i", "a b c d e f g h i");
  two[1].wer = WordErrorRate("x", "y");
  CHECK(AggregateReport(two).wer_percent == 10.0);

  CHECK_THROWS_AS(AggregateReport({}), InvalidArgument);
}

TEST_CASE("agreement arithmetic") {
  std::vector<std::pair<std::string, bool>> verdicts;
  std::vector<AnnotationRecord> annotations;
  for (int i = 0; i < 3048; ++i) {
    std::string id = "s" + std::to_string(i);
    bool verdict = i % 2 == 0;
    bool agree = i < 2643;
    verdicts.emplace_back(id, verdict);
    bool human = agree ? verdict : !verdict;
    annotations.push_back({id, "gpt4-cor", human, human});
  }
  double pct = AgreementPercent(verdicts, annotations, AnnotationField::kNrs);
  CHECK(pct == doctest::Approx(100.0 * 2643 / 3048));
  CHECK(FormatOneDecimal(pct) == "86.7");

  annotations.push_back({"s0", "other", true, true});
  CHECK_THROWS_AS(
      AgreementPercent(verdicts, annotations, AnnotationField::kNrs),
      DataError);
  CHECK(FormatOneDecimal(AgreementPercent(verdicts, annotations,
                                          AnnotationField::kNrs,
                                          std::string("gpt4-cor"))) == "86.7");
  CHECK_THROWS_AS(
      AgreementPercent({{"missing", true}}, annotations, AnnotationField::kSe),
      DataError);
  CHECK_THROWS_AS(AgreementPercent({}, annotations, AnnotationField::kSe),
                  InvalidArgument);
}

TEST_CASE("human evaluation table") {
  std::vector<AnnotationRecord> a = {{"1", "whisper", true, false},
                                     {"2", "whisper", true, true},
                                     {"1", "gpt4-cor", true, true},
                                     {"2", "gpt4-cor", false, true}};
  auto rows = HumanEvaluation(a);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method_id == "whisper");
  CHECK(rows[0].se_percent == 100.0);
  CHECK(rows[0].nrs_percent == 50.0);
  CHECK(HumanEvaluationMarkdown(rows) ==
        "| Methods | SE | NRS |\n|---|---|---|\n"
        "| whisper | 100.0 | 50.0 |\n| gpt4-cor | 50.0 | 100.0 |\n");
}

TEST_CASE("context-prefixed STS input") {
  auto ctx = DialogueContext::Question("What colour are your eyes?");
  CHECK(ContextPrefixed(ctx, "my color ice is blues") ==
        "What colour are your eyes? [SEP] my color ice is blues");
  DialogueContext two{{{Role::kBot, "Hi"},
                       {Role::kLearner, "hello"},
                       {Role::kBot, "How are you?"}}};
  CHECK(ContextPrefixed(two, "fine") ==
        "Hi [SEP] hello [SEP] How are you? [SEP] fine");
}

TEST_CASE("STS with the hash embedding matches pinned values") {
  EmbeddingService embed(std::make_shared<HashEmbeddingStub>(), "hash-384");
  auto ctx = DialogueContext::Question("What colour are your eyes?");
  double s1 =
      StsScore(ctx, "my color ice is blues", "my color eyes is blues", embed);
  double s2 =
      StsScore(ctx, "my eye color is blue", "my color eyes is blues", embed);
  CHECK(s1 == doctest::Approx(91.986621100779999).epsilon(1e-12));
  CHECK(s2 == doctest::Approx(91.986621100779999).epsilon(1e-12));
  CHECK_THROWS_AS(StsScore(ctx, "", "x", embed), InvalidArgument);
}

TEST_CASE("STS properties over random triples") {
  EmbeddingService embed(std::make_shared<HashEmbeddingStub>(), "hash-384");
  const std::vector<std::string> vocab = {
      "i",    "like", "cats", "dogs",     "my",    "color",
      "eyes", "ice",  "is",   "blue",     "blues", "the",
      "sea",  "went", "to",   "football", "play",  "a"};
  std::mt19937_64 rng(2024);
  auto sentence = [&] {
    std::string s;
    size_t n = 1 + rng() % 8;
    for (size_t i = 0; i < n; ++i) {
      if (i) s += " ";
      s += vocab[rng() % vocab.size()];
    }
    return s;
  };
  for (int i = 0; i < 1000; ++i) {
    auto ctx = DialogueContext::Question(sentence() + "?");
    std::string t = sentence(), r = sentence();
    double ab = StsScore(ctx, t, r, embed);
    double ba = StsScore(ctx, r, t, embed);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab >= -100.0);
    CHECK(ab <= 100.0);
    CHECK(std::abs(StsScore(ctx, t, t, embed) - 100.0) <= 1e-4);
  }
}

TEST_CASE(
    "NRS generates from the hypothesis and judges against the reference") {
  auto audit = std::make_shared<AuditLog>();
  ServiceOptions opts;
  opts.audit = audit;
  ChatService generator(std::make_shared<ScriptedChatStub>(
                            std::vector<ScriptedChatStub::Rule>{
                                {std::nullopt,
                                 {"Person B: I like rocket"},
                                 std::nullopt,
                                 "Person A:  Do you mean Rocket the raccoon?"}},
                            std::nullopt),
                        "gen", opts);
  ChatService judge(
      std::make_shared<ScriptedChatStub>(
          std::vector<ScriptedChatStub::Rule>{{std::nullopt,
                                               {"Person B: I like a cat"},
                                               std::nullopt,
                                               "No, it is unrelated."}},
          std::nullopt),
      "judge", opts);
  auto ctx = DialogueContext::Question("What animals do you like?");
  auto out = NextResponseSensibility(ctx, "I like rocket", "I like a cat",
                                     generator, judge);
  CHECK(out.generated_response == "Do you mean Rocket the raccoon?");
  CHECK_FALSE(out.sensible);
  CHECK(out.judge_raw == "No, it is unrelated.");
  CHECK(out.generator_id == "gen");
  CHECK(out.judge_id == "judge");

  auto entries = audit->Entries();
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].request_tag == kTagGeneration);
  std::string gen_prompt = entries[0].prompt.dump();
  CHECK(gen_prompt.find("I like rocket") != std::string::npos);
  CHECK(gen_prompt.find("I like a cat") == std::string::npos);
  CHECK(entries[1].request_tag == kTagSensibility);
  std::string judge_prompt = entries[1].prompt.dump();
  CHECK(judge_prompt.find("Person B: I like a cat") != std::string::npos);
  CHECK(judge_prompt.find("Person A: Do you mean Rocket") != std::string::npos);
  CHECK(judge_prompt.find(std::string(kSensibilityInstruction)) !=
        std::string::npos);
}

TEST_CASE("NRS re-asks once and then gives up on an unparseable verdict") {
  auto audit = std::make_shared<AuditLog>();
  ServiceOptions opts;
  opts.audit = audit;
  ChatService generator(std::make_shared<EchoChatStub>(), "echo", opts);
  ChatService judge(
      std::make_shared<ScriptedChatStub>(std::vector<ScriptedChatStub::Rule>{},
                                         std::string("Maybe")),
      "judge", opts);
  auto ctx = DialogueContext::Question("Do you like tea?");
  CHECK_THROWS_AS(
      NextResponseSensibility(ctx, "yes a lot", "yes a lot", generator, judge),
      UnparseableVerdict);
  auto entries = audit->Entries();
  REQUIRE(entries.size() == 3);
  CHECK(entries[2].prompt.dump().find(std::string(kVerdictReask)) !=
        std::string::npos);

  ChatService lenient(
      std::make_shared<ScriptedChatStub>(
          std::vector<ScriptedChatStub::Rule>{{std::nullopt,
                                               {std::string(kVerdictReask)},
                                               std::nullopt,
                                               "YES"}},
          std::string("Maybe")),
      "judge2");
  CHECK(
      NextResponseSensibility(ctx, "yes a lot", "yes a lot", generator, lenient)
          .sensible);
}

TEST_CASE("generated response cleanup") {
  CHECK(CleanGeneratedResponse("Person A: Hi there!\n How are you?") ==
        "Hi there! How are you?");
  CHECK(CleanGeneratedResponse("  \"Quoted\"  ") == "Quoted");
  CHECK(CleanGeneratedResponse("person a:   ") == "");
}

}  // namespace convasr
