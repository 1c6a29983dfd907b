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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "convasr/error.h"
#include "convasr/jsonl.h"
#include "convasr/pipeline.h"
#include "convasr/prompts.h"
#include "convasr/stubs.h"
#include "doctest.h"
#include "test_util.h"

namespace convasr {
namespace {

using testing::DataPath;
using testing::NoSleep;
using testing::TempDir;

RunOptions Quiet() {
  RunOptions o;
  o.sleep = NoSleep;
  return o;
}

EvalConfig Golden() {
  return EvalConfig::FromFile(DataPath("golden/config.json"));
}

// Set CONVASR_REGENERATE_GOLDENS=1 to rewrite the golden files instead of
// comparing against them.
void CheckGolden(const std::string& actual, const std::string& name) {
  auto path = DataPath("golden/" + name);
  if (std::getenv("CONVASR_REGENERATE_GOLDENS")) {
    WriteTextFile(path, actual);
    return;
  }
  CHECK(actual == ReadTextFile(path));
}

}  // namespace

TEST_CASE("golden report") {
  TempDir dir;
  EvalConfig config = Golden();
  config.cache_dir = dir / "cache";
  RunStats stats;
  EvalReport report = RunEvaluation(config, Quiet(), &stats);
  CHECK(stats.backend_calls > 0);

  CHECK(report.counts.input == 12);
  CHECK(report.counts.easy_removed == 3);
  CHECK(report.counts.evaluated == 9);
  CHECK(report.counts.failed == 2);
  REQUIRE(report.aggregates.size() == 3);
  CHECK(report.aggregates[0].method_id == "none");
  CHECK(report.aggregates[2].method_id == "seq2seq-ext");

  // values from the independent oracle in tests/oracles
  const auto& none = *report.aggregates[0].aggregate;
  CHECK(none.wer_percent == doctest::Approx(29.032258064516128).epsilon(1e-12));
  CHECK(none.sts_mean == doctest::Approx(91.295479957213516).epsilon(1e-12));
  CHECK(none.nrs_percent == 50.0);
  CHECK(none.rows == 8);
  const auto& ext = *report.aggregates[2].aggregate;
  CHECK(ext.wer_percent == doctest::Approx(16.176470588235293).epsilon(1e-12));
  CHECK(ext.sts_mean == doctest::Approx(96.748652933527808).epsilon(1e-12));
  CHECK(ext.nrs_percent == doctest::Approx(88.888888888888886).epsilon(1e-12));

  CheckGolden(RenderReport(report, ReportFormat::kJson), "report.json");
  CheckGolden(RenderReport(report, ReportFormat::kMarkdown), "report.md");
  CheckGolden(RenderReport(report, ReportFormat::kCsv), "report.csv");
}

TEST_CASE("warm cache re-run makes no backend calls") {
  TempDir dir;
  EvalConfig config = Golden();
  config.cache_dir = dir / "cache";
  EvalReport first = RunEvaluation(config, Quiet());

  config.audit_log = dir / "audit.jsonl";
  RunStats stats;
  EvalReport second = RunEvaluation(config, Quiet(), &stats);
  CHECK(stats.backend_calls == 0);
  CHECK(stats.cache_hits > 0);
  CHECK(RenderReport(first, ReportFormat::kJson) ==
        RenderReport(second, ReportFormat::kJson));

  size_t entries = 0;
  ForEachJsonLine(config.audit_log, [&](const nlohmann::json& j, size_t) {
    ++entries;
    CHECK(j.at("cached") == true);
  });
  CHECK(entries == stats.cache_hits);
}

TEST_CASE("report does not depend on parallelism") {
  std::string reference;
  for (size_t p : {1, 2, 8}) {
    EvalConfig config = Golden();
    config.parallelism = p;
    std::string json =
        RenderReport(RunEvaluation(config, Quiet()), ReportFormat::kJson);
    if (reference.empty()) {
      reference = json;
    } else {
      CHECK(json == reference);
    }
  }
}

TEST_CASE("report invariants") {
  EvalConfig config = Golden();
  EvalReport report = RunEvaluation(config, Quiet());

  // rows ordered by (method, manifest order)
  REQUIRE(report.rows.size() == 27);
  CHECK(report.rows[0].method_id == "none");
  CHECK(report.rows[0].sample_id == "g01");
  CHECK(report.rows[9].method_id == "echo-llm");
  CHECK(report.rows[26].sample_id == "g12");

  size_t ok = 0;
  for (const auto& r : report.rows) {
    if (r.failed) {
      CHECK_FALSE(r.failure.empty());
      CHECK_FALSE(r.nrs.has_value());
    } else {
      ++ok;
      CHECK((r.wer && r.sts && r.nrs));
    }
  }
  CHECK(report.counts.evaluated * config.methods.size() ==
        ok + report.counts.failed);
  CHECK(report.counts.input ==
        report.counts.easy_removed + report.counts.evaluated);

  auto again = Summarize(report.rows, {"none", "echo-llm", "seq2seq-ext"});
  for (size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i].aggregate->wer_percent ==
          report.aggregates[i].aggregate->wer_percent);
    CHECK(again[i].aggregate->nrs_percent ==
          report.aggregates[i].aggregate->nrs_percent);
    CHECK(again[i].failed == report.aggregates[i].failed);
  }

  // echoing the hypothesis back is the identity correction
  for (size_t i = 0; i < 9; ++i) {
    const auto& a = report.rows[i];
    const auto& b = report.rows[9 + i];
    CHECK(a.corrected == b.corrected);
    CHECK(a.failed == b.failed);
    if (!a.failed) {
      CHECK(a.wer->wer_percent == b.wer->wer_percent);
      CHECK(*a.sts == *b.sts);
      CHECK(a.nrs->sensible == b.nrs->sensible);
    }
  }

  // the unparseable verdict fails only the rows whose generated turn got it
  for (const auto& r : report.rows) {
    CHECK(r.failed == (r.sample_id == "g12" && r.method_id != "seq2seq-ext"));
  }
}

TEST_CASE("json report round trip and csv") {
  EvalReport report = RunEvaluation(Golden(), Quiet());
  TempDir dir;
  EmitReport(report, ReportFormat::kJson, dir / "r.json");
  EvalReport back = LoadReport(dir / "r.json");
  CHECK(RenderReport(back, ReportFormat::kJson) ==
        RenderReport(report, ReportFormat::kJson));
  CHECK(RenderReport(back, ReportFormat::kCsv) ==
        RenderReport(report, ReportFormat::kCsv));
  CHECK(RenderReport(back, ReportFormat::kMarkdown) ==
        RenderReport(report, ReportFormat::kMarkdown));

  // csv carries exact values
  std::istringstream csv(RenderReport(report, ReportFormat::kCsv));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "method,wer_percent,sts_mean,nrs_percent,rows,failed");
  std::getline(csv, line);
  auto first = line.find(',');
  auto second = line.find(',', first + 1);
  CHECK(std::stod(line.substr(first + 1, second - first - 1)) ==
        report.aggregates[0].aggregate->wer_percent);

  CHECK(ParseReportFormat("md") == ReportFormat::kMarkdown);
  CHECK(ParseReportFormat("csv") == ReportFormat::kCsv);
  CHECK_FALSE(ParseReportFormat("xml").has_value());
}

TEST_CASE("config errors") {
  EvalConfig config = Golden();
  config.methods.clear();
  CHECK_THROWS_AS(RunEvaluation(config, Quiet()), InvalidArgument);

  auto raw =
      nlohmann::json::parse(ReadTextFile(DataPath("golden/config.json")));
  auto dup = raw;
  dup["methods"].push_back(raw["methods"][0]);
  CHECK_THROWS_AS(EvalConfig::FromJson(dup, DataPath("golden")), DataError);
  auto bad = raw;
  bad["methods"][0]["corrector"] = "magic";
  CHECK_THROWS_AS(EvalConfig::FromJson(bad, DataPath("golden")), DataError);
  auto no_backend = raw;
  no_backend["methods"][1].erase("backend");
  CHECK_THROWS_AS(EvalConfig::FromJson(no_backend, DataPath("golden")),
                  DataError);
  CHECK_THROWS_AS(EvalConfig::FromFile(DataPath("golden/absent.json")),
                  DataError);
}

TEST_CASE("config digest ignores execution settings") {
  auto raw =
      nlohmann::json::parse(ReadTextFile(DataPath("golden/config.json")));
  auto base = EvalConfig::FromJson(raw, DataPath("golden")).Digest();
  auto p = raw;
  p["parallelism"] = 16;
  p["cache_dir"] = "/tmp/elsewhere";
  CHECK(EvalConfig::FromJson(p, DataPath("golden")).Digest() == base);
  auto s = raw;
  s["seed"] = 8;
  CHECK_FALSE(EvalConfig::FromJson(s, DataPath("golden")).Digest() == base);
}

TEST_CASE("total backend outage is an error") {
  auto raw =
      nlohmann::json::parse(ReadTextFile(DataPath("golden/config.json")));
  raw["easy_filter"] = false;
  raw["judge"] = {{"kind", "scripted-stub"},
                  {"script", {{"default", "Maybe"}}}};
  auto config = EvalConfig::FromJson(raw, DataPath("golden"));
  CHECK_THROWS_WITH_AS(RunEvaluation(config, Quiet()),
                       doctest::Contains("every row failed"), Error);
}

TEST_CASE("offline mode with http backends fails every row") {
  auto raw =
      nlohmann::json::parse(ReadTextFile(DataPath("golden/config.json")));
  raw["embedding"] = {{"kind", "http"},
                      {"base_url", "http://127.0.0.1:9/v1"},
                      {"model", "all-MiniLM-L6-v2"}};
  auto config = EvalConfig::FromJson(raw, DataPath("golden"));
  RunOptions o = Quiet();
  o.offline = true;
  CHECK_THROWS_WITH_AS(RunEvaluation(config, o), doctest::Contains("offline"),
                       Error);
}

TEST_CASE("missing external correction fails only that row") {
  TempDir dir;
  std::ofstream out(dir / "partial.jsonl");
  out << R"({"sample_id":"g01","corrected":"my color eyes is blues"})" << "\n";
  out.close();
  auto raw =
      nlohmann::json::parse(ReadTextFile(DataPath("golden/config.json")));
  raw["methods"] =
      nlohmann::json::array({{{"id", "partial"},
                              {"corrector", "external"},
                              {"path", (dir / "partial.jsonl").string()}}});
  auto config = EvalConfig::FromJson(raw, DataPath("golden"));
  EvalReport report = RunEvaluation(config, Quiet());
  CHECK_FALSE(report.rows[0].failed);
  CHECK(report.rows[1].failed);
  CHECK(report.rows[1].failure.find("no external correction") !=
        std::string::npos);
  CHECK(report.aggregates[0].aggregate->rows == 1);
}

TEST_CASE("easy filter") {
  EvalConfig config = Golden();
  auto manifest = LoadManifest(config.manifest_path);
  auto judge = MakeChatService(*config.judge, {});
  auto easy = FilterEasy(manifest, "whisper", *judge, 4);
  CHECK(easy.easy_ids == std::vector<std::string>{"g06", "g07", "g09"});
  CHECK(easy.non_easy.samples.size() == 9);

  // unparseable verdicts keep the sample
  ChatService unsure(
      std::make_shared<ScriptedChatStub>(std::vector<ScriptedChatStub::Rule>{},
                                         std::string("hmm")),
      "j");
  auto kept = FilterEasy(manifest, "whisper", unsure);
  CHECK(kept.easy_count == 0);
  CHECK(kept.unparseable_ids.size() == 12);
}

TEST_CASE("llm method prompts carry the correction instruction") {
  TempDir dir;
  EvalConfig config = Golden();
  config.audit_log = dir / "audit.jsonl";
  RunEvaluation(config, Quiet());
  size_t corrections = 0;
  ForEachJsonLine(config.audit_log, [&](const nlohmann::json& j, size_t) {
    std::string tag = j.at("request_tag");
    std::string prompt = j.at("prompt").dump();
    auto contains = [&](std::string_view s) {
      return prompt.find(std::string(s)) != std::string::npos;
    };
    if (tag == kTagCorrection) {
      ++corrections;
      CHECK(contains(kCorrectionInstruction));
    } else if (tag == kTagSensibility) {
      CHECK(contains(kSensibilityInstruction));
    } else if (tag == kTagGeneration) {
      CHECK(contains(kResponseGenerationInstruction));
    } else if (tag == kTagEasy) {
      CHECK(contains(kEasySampleInstruction));
    }
  });
  CHECK(corrections == 9);
}

TEST_CASE("human evaluation joined onto a report") {
  EvalReport report = RunEvaluation(Golden(), Quiet());
  std::vector<AnnotationRecord> ann = {{"g01", "none", true, false},
                                       {"g02", "none", false, false},
                                       {"g12", "none", true, true},
                                       {"g01", "seq2seq-ext", true, true}};
  auto rows = HumanEvaluationForReport(report, ann);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method_id == "none");
  CHECK(rows[0].count == 2);  // g12 failed for "none"
  CHECK(rows[0].se_percent == 50.0);

  auto verdicts = NrsVerdicts(report, "seq2seq-ext");
  CHECK(verdicts.size() == 9);
}

}  // namespace convasr
