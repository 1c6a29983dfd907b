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

// convasr command line: corpus preparation, easy-sample filtering, correction,
// evaluation, report rendering and annotation agreement.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "convasr/corpus.h"
#include "convasr/correction.h"
#include "convasr/error.h"
#include "convasr/jsonl.h"
#include "convasr/metrics.h"
#include "convasr/parallel.h"
#include "convasr/pipeline.h"

namespace convasr {
namespace {

struct GlobalFlags {
  std::string config;
  std::string cache_dir;
  size_t parallelism = 0;  // 0: from config
  std::optional<uint64_t> seed;
  bool offline = false;
};

EvalConfig LoadConfig(const GlobalFlags& g, bool required) {
  EvalConfig config;
  if (!g.config.empty()) {
    config = EvalConfig::FromFile(g.config);
  } else if (required) {
    throw InvalidArgument("--config is required for this command");
  }
  if (!g.cache_dir.empty()) config.cache_dir = g.cache_dir;
  if (g.parallelism > 0) config.parallelism = g.parallelism;
  if (g.seed) config.seed = *g.seed;
  return config;
}

RunOptions Options(const GlobalFlags& g) {
  RunOptions o;
  o.offline = g.offline;
  return o;
}

std::filesystem::path ManifestPath(const std::string& flag,
                                   const EvalConfig& config) {
  if (!flag.empty()) return flag;
  if (config.manifest_path.empty()) {
    throw InvalidArgument("no manifest: pass --manifest or set manifest_path");
  }
  return config.manifest_path;
}

nlohmann::json StatsJson(const CorpusStats& s) {
  return {{"questions", s.num_questions},
          {"answers", s.num_answers},
          {"speakers", s.num_speakers}};
}

void PrintRunStats(const RunStats& s) {
  std::fprintf(stderr, "backend calls: %llu, cache hits: %llu\n",
               static_cast<unsigned long long>(s.backend_calls),
               static_cast<unsigned long long>(s.cache_hits));
}

// --- prepare -----------------------------------------------------------------

struct PrepareArgs {
  std::string manifest, out, log;
  bool no_dedup = false, no_relevance = false;
};

int Prepare(const GlobalFlags& g, const PrepareArgs& a) {
  EvalConfig config = LoadConfig(g, false);
  CorpusManifest manifest = LoadManifest(ManifestPath(a.manifest, config));
  const CorpusStats before = ComputeStats(manifest);
  ServiceSet services(config, Options(g));

  FilterLog log;
  auto step = [&](FilterResult r) {
    log.Append(r.log);
    manifest = std::move(r.kept);
  };
  int status = 0;
  try {
    if (!config.corpus.exclude_questions.empty()) {
      step(ExcludeQuestions(manifest, config.corpus.exclude_questions));
    }
    step(FilterLength(manifest, config.corpus.length));
    if (!a.no_dedup) {
      step(Deduplicate(manifest, services.embedding(),
                       config.corpus.dedup_threshold, config.parallelism));
    }
    if (!a.no_relevance) {
      step(FilterRelevance(manifest, services.relevance(), config.parallelism));
    }
  } catch (const FilterAborted& e) {
    log.Append(e.partial());
    std::cerr << "error: " << e.what() << " (partial filter log written)\n";
    status = 1;
  }
  if (!a.log.empty()) WriteFilterLog(log, a.log);
  if (status != 0) return status;

  SaveManifest(manifest, a.out);
  nlohmann::json summary = {{"before", StatsJson(before)},
                            {"after", StatsJson(ComputeStats(manifest))},
                            {"removed", log.removed.size()},
                            {"flagged", log.flagged.size()}};
  std::cout << summary.dump(2) << "\n";
  PrintRunStats(services.Stats());
  return 0;
}

// --- split -------------------------------------------------------------------

struct SplitArgs {
  std::string manifest, train, test;
  std::optional<size_t> test_size;
};

int SplitCommand(const GlobalFlags& g, const SplitArgs& a) {
  EvalConfig config = LoadConfig(g, false);
  CorpusManifest manifest = LoadManifest(ManifestPath(a.manifest, config));
  std::optional<size_t> test_size =
      a.test_size ? a.test_size : config.corpus.test_size;
  if (!test_size) {
    throw InvalidArgument(
        "no test size: pass --test-size or set corpus.test_size");
  }
  SplitResult r = SplitCorpus(manifest, *test_size, config.seed);
  SaveManifest(r.train, a.train);
  SaveManifest(r.test, a.test);
  std::cout << nlohmann::json{{"train", r.train.samples.size()},
                              {"test", r.test.samples.size()},
                              {"seed", config.seed}}
                   .dump()
            << "\n";
  return 0;
}

// --- filter-easy -------------------------------------------------------------

struct EasyArgs {
  std::string manifest, out;
};

int FilterEasyCommand(const GlobalFlags& g, const EasyArgs& a) {
  EvalConfig config = LoadConfig(g, true);
  CorpusManifest manifest = LoadManifest(ManifestPath(a.manifest, config));
  ServiceSet services(config, Options(g));
  EasyFilterResult r = FilterEasy(manifest, config.asr_system, services.judge(),
                                  config.parallelism);
  SaveManifest(r.non_easy, a.out);
  std::cout << nlohmann::json{{"input", manifest.samples.size()},
                              {"easy", r.easy_count},
                              {"kept", r.non_easy.samples.size()},
                              {"unparseable", r.unparseable_ids}}
                   .dump()
            << "\n";
  PrintRunStats(services.Stats());
  return 0;
}

// --- correct -----------------------------------------------------------------

struct CorrectArgs {
  std::string manifest, method, out;
};

int Correct(const GlobalFlags& g, const CorrectArgs& a) {
  EvalConfig config = LoadConfig(g, true);
  CorpusManifest manifest = LoadManifest(ManifestPath(a.manifest, config));
  const MethodSpec* method = nullptr;
  for (const auto& m : config.methods) {
    if (m.id == a.method) method = &m;
  }
  if (method == nullptr) {
    throw InvalidArgument("no method \"" + a.method + "\" in the config");
  }
  ServiceSet services(config, Options(g));
  auto corrector = MakeCorrector(*method, services, manifest);

  std::vector<CorrectionResult> results(manifest.samples.size());
  std::vector<std::string> errors(manifest.samples.size());
  ParallelFor(results.size(), config.parallelism, [&](size_t i) {
    try {
      results[i] = corrector->Correct(manifest.samples[i], config.asr_system);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::vector<CorrectionResult> ok;
  size_t failed = 0;
  for (size_t i = 0; i < results.size(); ++i) {
    if (errors[i].empty()) {
      ok.push_back(std::move(results[i]));
    } else {
      ++failed;
      std::cerr << "warning: " << manifest.samples[i].id << ": " << errors[i]
                << "\n";
    }
  }
  SaveCorrections(ok, a.out);
  std::cerr << ok.size() << " corrected, " << failed << " failed\n";
  PrintRunStats(services.Stats());
  return ok.empty() && !results.empty() ? 1 : 0;
}

// --- evaluate / report -------------------------------------------------------

ReportFormat FormatFlag(const std::string& name) {
  auto f = ParseReportFormat(name);
  if (!f) throw InvalidArgument("unknown format \"" + name + "\"");
  return *f;
}

void Emit(const EvalReport& report, ReportFormat format,
          const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << RenderReport(report, format);
  } else {
    EmitReport(report, format, out);
  }
}

struct EvaluateArgs {
  std::string out, format = "json", markdown, manifest;
};

int Evaluate(const GlobalFlags& g, const EvaluateArgs& a) {
  EvalConfig config = LoadConfig(g, true);
  if (!a.manifest.empty()) config.manifest_path = a.manifest;
  RunStats stats;
  EvalReport report = RunEvaluation(config, Options(g), &stats);
  Emit(report, FormatFlag(a.format), a.out);
  if (!a.markdown.empty()) {
    EmitReport(report, ReportFormat::kMarkdown, a.markdown);
  }
  if (report.counts.failed > 0) {
    for (const auto& r : report.rows) {
      if (r.failed) {
        std::cerr << "failed row " << r.method_id << "/" << r.sample_id << ": "
                  << r.failure << "\n";
      }
    }
  }
  PrintRunStats(stats);
  return 0;
}

struct ReportArgs {
  std::string input, format = "md", out, annotations;
};

int Report(const ReportArgs& a) {
  EvalReport report = LoadReport(a.input);
  if (!a.annotations.empty()) {
    auto rows =
        HumanEvaluationForReport(report, LoadAnnotations(a.annotations));
    std::string md = HumanEvaluationMarkdown(rows);
    if (a.out.empty() || a.out == "-") {
      std::cout << md;
    } else {
      WriteTextFile(a.out, md);
    }
    return 0;
  }
  Emit(report, FormatFlag(a.format), a.out);
  return 0;
}

// --- agreement ---------------------------------------------------------------

struct AgreementArgs {
  std::string report, verdicts, annotations, method, field = "nrs";
};

int AgreementCommand(const AgreementArgs& a) {
  std::vector<std::pair<std::string, bool>> verdicts;
  if (!a.report.empty()) {
    if (a.method.empty()) {
      throw InvalidArgument("--method is required with --report");
    }
    verdicts = NrsVerdicts(LoadReport(a.report), a.method);
  } else if (!a.verdicts.empty()) {
    ForEachJsonLine(a.verdicts, [&](const nlohmann::json& j, size_t) {
      verdicts.emplace_back(j.at("sample_id").get<std::string>(),
                            j.at("verdict").get<bool>());
    });
  } else {
    throw InvalidArgument("pass --report or --verdicts");
  }
  AnnotationField field;
  if (a.field == "se") {
    field = AnnotationField::kSe;
  } else if (a.field == "nrs") {
    field = AnnotationField::kNrs;
  } else {
    throw InvalidArgument("--field must be se or nrs");
  }
  std::optional<std::string> method;
  if (!a.method.empty()) method = a.method;
  double pct =
      AgreementPercent(verdicts, LoadAnnotations(a.annotations), field, method);
  std::cout << nlohmann::json{{"field", a.field},
                              {"pairs", verdicts.size()},
                              {"agreement_percent", pct},
                              {"agreement", FormatOneDecimal(pct)}}
                   .dump()
            << "\n";
  return 0;
}

}  // namespace
}  // namespace convasr

int main(int argc, char** argv) {
  using namespace convasr;
  CLI::App app{
      "Evaluate ASR transcriptions and ASR error correction in "
      "conversation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config, "Evaluation config (JSON)");
  app.add_option("--cache-dir", g.cache_dir, "Response cache directory");
  app.add_option("--parallelism", g.parallelism, "Concurrent requests")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Seed for the train/test split");
  app.add_flag("--offline", g.offline,
               "Refuse any network call; only stub backends work");

  PrepareArgs prepare;
  auto* p = app.add_subcommand(
      "prepare", "Length, duplicate and relevance filtering with stats");
  p->add_option("--manifest", prepare.manifest, "Input manifest");
  p->add_option("--out", prepare.out, "Filtered manifest")->required();
  p->add_option("--log", prepare.log, "Filter log (JSON lines)");
  p->add_flag("--no-dedup", prepare.no_dedup, "Skip duplicate removal");
  p->add_flag("--no-relevance", prepare.no_relevance,
              "Skip the relevance judge");

  SplitArgs split;
  auto* s = app.add_subcommand("split", "Seeded stratified train/test split");
  s->add_option("--manifest", split.manifest, "Input manifest");
  s->add_option("--test-size", split.test_size, "Number of test samples");
  s->add_option("--train", split.train, "Train manifest")->required();
  s->add_option("--test", split.test, "Test manifest")->required();

  EasyArgs easy;
  auto* e = app.add_subcommand("filter-easy",
                               "Drop samples whose ASR output is already fine");
  e->add_option("--manifest", easy.manifest, "Input manifest");
  e->add_option("--out", easy.out, "Manifest of non-easy samples")->required();

  CorrectArgs correct;
  auto* c = app.add_subcommand("correct", "Write corrections for one method");
  c->add_option("--manifest", correct.manifest, "Input manifest");
  c->add_option("--method", correct.method, "Method id from the config")
      ->required();
  c->add_option("--out", correct.out, "Corrections (JSON lines)")->required();

  EvaluateArgs evaluate;
  auto* v = app.add_subcommand("evaluate", "Correct and score every method");
  v->add_option("--manifest", evaluate.manifest, "Override the manifest");
  v->add_option("--out", evaluate.out, "Report path (default stdout)");
  v->add_option("--format", evaluate.format, "json, csv or md");
  v->add_option("--markdown", evaluate.markdown, "Also write a markdown table");

  ReportArgs report;
  auto* r = app.add_subcommand("report", "Render a saved JSON report");
  r->add_option("--input", report.input, "Report JSON")->required();
  r->add_option("--format", report.format, "json, csv or md");
  r->add_option("--out", report.out, "Output path (default stdout)");
  r->add_option("--annotations", report.annotations,
                "Human annotations; renders the SE/NRS table instead");

  AgreementArgs agreement;
  auto* a = app.add_subcommand(
      "agreement", "Agreement of automatic verdicts with human annotations");
  a->add_option("--report", agreement.report, "Report JSON (NRS verdicts)");
  a->add_option("--verdicts", agreement.verdicts,
                "JSON lines {sample_id, verdict} instead of a report");
  a->add_option("--annotations", agreement.annotations, "Human annotations")
      ->required();
  a->add_option("--method", agreement.method, "Method id");
  a->add_option("--field", agreement.field, "se or nrs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*p) return Prepare(g, prepare);
    if (*s) return SplitCommand(g, split);
    if (*e) return FilterEasyCommand(g, easy);
    if (*c) return Correct(g, correct);
    if (*v) return Evaluate(g, evaluate);
    if (*r) return Report(report);
    if (*a) return AgreementCommand(agreement);
  } catch (const InvalidArgument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
