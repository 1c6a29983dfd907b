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

// End-to-end evaluation: easy-sample filtering, correction by every configured
// method, WER/STS/NRS scoring, aggregation and report emission.

#ifndef CONVASR_PIPELINE_H_
#define CONVASR_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "convasr/backend_config.h"
#include "convasr/backends.h"
#include "convasr/corpus.h"
#include "convasr/correction.h"
#include "convasr/metrics.h"
#include "json.hpp"

namespace convasr {

enum class CorrectorKind { kNone, kLlm, kExternal };

struct MethodSpec {
  std::string id;
  CorrectorKind kind = CorrectorKind::kNone;
  std::optional<BackendSpec> backend;              // kLlm
  std::optional<std::filesystem::path> exemplars;  // kLlm, optional
  std::optional<std::filesystem::path> path;       // kExternal
};

// Corpus preparation settings used by `prepare` and `split`.
struct CorpusConfig {
  LengthLimits length;
  double dedup_threshold = 0.95;
  std::set<std::string> exclude_questions;
  std::optional<size_t> test_size;
};

struct EvalConfig {
  std::filesystem::path manifest_path;
  std::vector<MethodSpec> methods;
  std::string asr_system;
  std::optional<BackendSpec> embedding;
  std::optional<BackendSpec> generator;
  std::optional<BackendSpec> judge;
  std::optional<BackendSpec> relevance;  // defaults to `judge`
  size_t parallelism = 1;
  std::filesystem::path cache_dir;  // empty: no cache
  std::filesystem::path audit_log;  // empty: in-memory only
  uint64_t seed = 0;
  bool easy_filter = false;
  CorpusConfig corpus;

  // The config as written, used for the digest.
  nlohmann::json raw;

  // Relative paths are resolved against `base_dir`. Throws DataError on bad
  // or inconsistent settings.
  static EvalConfig FromJson(const nlohmann::json& j,
                             const std::filesystem::path& base_dir);
  static EvalConfig FromFile(const std::filesystem::path& path);

  // SHA-256 over the canonical config, excluding settings that cannot change
  // results (parallelism, cache_dir, audit_log).
  CacheKey Digest() const;
};

struct EasyFilterResult {
  CorpusManifest non_easy;
  size_t easy_count = 0;
  std::vector<std::string> easy_ids;
  std::vector<std::string> unparseable_ids;  // kept under evaluation
};

// A sample is easy when the judge says its uncorrected `asr_system` hypothesis
// is already clear, sensible and relevant. Easy samples are dropped; an
// unparseable verdict keeps the sample.
EasyFilterResult FilterEasy(const CorpusManifest& manifest,
                            const std::string& asr_system, ChatService& judge,
                            size_t parallelism = 1);

struct EvalRow {
  std::string sample_id;
  std::string method_id;
  std::string corrected;
  std::optional<WerBreakdown> wer;
  std::optional<double> sts;
  std::optional<NrsOutcome> nrs;
  bool failed = false;
  std::string failure;
};

struct MethodSummary {
  std::string method_id;
  std::optional<MethodAggregate> aggregate;  // absent when every row failed
  size_t failed = 0;
};

struct EvalCounts {
  size_t input = 0;
  size_t easy_removed = 0;
  size_t evaluated = 0;
  size_t failed = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<MethodSummary> aggregates;  // in config method order
  EvalCounts counts;
  CacheKey config_digest;
};

struct RunOptions {
  bool offline = false;
  // Backoff sleeper passed to every service (tests use a no-op).
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct RunStats {
  uint64_t backend_calls = 0;
  uint64_t cache_hits = 0;
};

// Every backend built for one run, sharing one cache and audit trail.
class ServiceSet {
 public:
  ServiceSet(const EvalConfig& config, const RunOptions& options);

  ChatService& judge();
  ChatService& generator();
  ChatService& relevance();
  EmbeddingService& embedding();
  // Chat service for an llm method, built on first use.
  std::shared_ptr<ChatService> method_chat(const MethodSpec& method);

  const std::shared_ptr<AuditLog>& audit() const { return env_.audit; }
  RunStats Stats() const;

 private:
  const EvalConfig& config_;
  ServiceEnv env_;
  std::unique_ptr<ChatService> judge_, generator_, relevance_;
  std::unique_ptr<EmbeddingService> embedding_;
  std::vector<std::pair<std::string, std::shared_ptr<ChatService>>> methods_;
};

std::unique_ptr<Corrector> MakeCorrector(const MethodSpec& method,
                                         ServiceSet& services,
                                         const CorpusManifest& manifest);

// Rows come out ordered by (config method order, manifest order) whatever the
// parallelism. A row whose correction or scoring fails is marked failed and
// left out of the aggregates. Throws when there are no methods or every row
// failed.
EvalReport RunEvaluation(const EvalConfig& config,
                         const RunOptions& options = {},
                         RunStats* stats = nullptr);

// Recomputes per-method aggregates from the rows.
std::vector<MethodSummary> Summarize(const std::vector<EvalRow>& rows,
                                     const std::vector<std::string>& methods);

enum class ReportFormat { kJson, kCsv, kMarkdown };

std::optional<ReportFormat> ParseReportFormat(std::string_view name);

nlohmann::json ReportToJson(const EvalReport& report);
EvalReport ReportFromJson(const nlohmann::json& j);
EvalReport LoadReport(const std::filesystem::path& path);

std::string RenderReport(const EvalReport& report, ReportFormat format);
void EmitReport(const EvalReport& report, ReportFormat format,
                const std::filesystem::path& path);

// Human-evaluation table restricted to rows that are in `report` and did not
// fail, one entry per report method that has annotations.
std::vector<HumanEvalRow> HumanEvaluationForReport(
    const EvalReport& report, const std::vector<AnnotationRecord>& annotations);

// Per-sample sensibility verdicts of one method, for agreement checks.
std::vector<std::pair<std::string, bool>> NrsVerdicts(
    const EvalReport& report, const std::string& method_id);

}  // namespace convasr

#endif  // CONVASR_PIPELINE_H_
