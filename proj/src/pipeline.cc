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

#include "convasr/pipeline.h"

#include <charconv>
#include <fstream>
#include <map>
#include <mutex>

#include "convasr/error.h"
#include "convasr/jsonl.h"
#include "convasr/parallel.h"
#include "convasr/prompts.h"

namespace convasr {

using nlohmann::json;

// --- config ------------------------------------------------------------------

namespace {

std::optional<BackendSpec> OptionalBackend(const json& j, const char* key,
                                           const std::filesystem::path& base) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  try {
    return BackendSpec::FromJson(j.at(key), base);
  } catch (const DataError& e) {
    throw DataError(std::string("backend \"") + key + "\": " + e.what());
  }
}

}  // namespace

EvalConfig EvalConfig::FromJson(const json& j,
                                const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw DataError("config must be a JSON object");
  EvalConfig c;
  c.raw = j;
  try {
    if (j.contains("manifest_path")) {
      c.manifest_path = base_dir / j.at("manifest_path").get<std::string>();
    }
    c.asr_system = j.value("asr_system", std::string());
    c.embedding = OptionalBackend(j, "embedding", base_dir);
    c.generator = OptionalBackend(j, "generator", base_dir);
    c.judge = OptionalBackend(j, "judge", base_dir);
    c.relevance = OptionalBackend(j, "relevance", base_dir);
    const auto parallelism = j.value("parallelism", int64_t{1});
    if (parallelism < 1) throw DataError("parallelism must be >= 1");
    c.parallelism = static_cast<size_t>(parallelism);
    if (j.contains("cache_dir") && !j.at("cache_dir").is_null()) {
      c.cache_dir = base_dir / j.at("cache_dir").get<std::string>();
    }
    if (j.contains("audit_log") && !j.at("audit_log").is_null()) {
      c.audit_log = base_dir / j.at("audit_log").get<std::string>();
    }
    c.seed = j.value("seed", uint64_t{0});
    c.easy_filter = j.value("easy_filter", false);

    std::set<std::string> ids;
    for (const auto& m : j.value("methods", json::array())) {
      MethodSpec spec;
      spec.id = m.at("id").get<std::string>();
      if (spec.id.empty()) throw DataError("method with an empty id");
      if (!ids.insert(spec.id).second) {
        throw DataError("duplicate method id \"" + spec.id + "\"");
      }
      const std::string kind = m.value("corrector", std::string("none"));
      if (kind == "none") {
        spec.kind = CorrectorKind::kNone;
      } else if (kind == "llm") {
        spec.kind = CorrectorKind::kLlm;
        if (!m.contains("backend")) {
          throw DataError("llm method \"" + spec.id + "\" needs a backend");
        }
        spec.backend = BackendSpec::FromJson(m.at("backend"), base_dir);
        if (m.contains("exemplars") && !m.at("exemplars").is_null()) {
          spec.exemplars = base_dir / m.at("exemplars").get<std::string>();
        }
      } else if (kind == "external") {
        spec.kind = CorrectorKind::kExternal;
        if (!m.contains("path")) {
          throw DataError("external method \"" + spec.id + "\" needs a path");
        }
        spec.path = base_dir / m.at("path").get<std::string>();
      } else {
        throw DataError("unknown corrector \"" + kind + "\"");
      }
      c.methods.push_back(std::move(spec));
    }

    if (j.contains("corpus")) {
      const json& cj = j.at("corpus");
      c.corpus.length.min_words =
          cj.value("min_words", c.corpus.length.min_words);
      c.corpus.length.max_words =
          cj.value("max_words", c.corpus.length.max_words);
      c.corpus.length.max_duration_s =
          cj.value("max_duration_s", c.corpus.length.max_duration_s);
      c.corpus.dedup_threshold =
          cj.value("dedup_threshold", c.corpus.dedup_threshold);
      for (const auto& q : cj.value("exclude_questions", json::array())) {
        c.corpus.exclude_questions.insert(q.get<std::string>());
      }
      if (cj.contains("test_size") && !cj.at("test_size").is_null()) {
        c.corpus.test_size = cj.at("test_size").get<size_t>();
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("bad config: ") + e.what());
  }
  return c;
}

EvalConfig EvalConfig::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config", path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("invalid JSON", path.string());
  try {
    return FromJson(j, path.parent_path());
  } catch (const DataError& e) {
    throw DataError(e.what(), path.string());
  }
}

CacheKey EvalConfig::Digest() const {
  json canonical = raw.is_object() ? raw : json::object();
  canonical.erase("parallelism");
  canonical.erase("cache_dir");
  canonical.erase("audit_log");
  return CacheKey{Sha256Hex("config\n" + canonical.dump())};
}

// --- services ----------------------------------------------------------------

ServiceSet::ServiceSet(const EvalConfig& config, const RunOptions& options)
    : config_(config) {
  if (!config.cache_dir.empty()) {
    env_.cache = std::make_shared<ResponseCache>(config.cache_dir);
  }
  env_.audit = config.audit_log.empty()
                   ? std::make_shared<AuditLog>()
                   : std::make_shared<AuditLog>(config.audit_log);
  env_.offline = options.offline;
  env_.sleep = options.sleep;
}

namespace {

const BackendSpec& Require(const std::optional<BackendSpec>& spec,
                           const char* role) {
  if (!spec) {
    throw DataError(std::string("config has no \"") + role + "\" backend");
  }
  return *spec;
}

}  // namespace

ChatService& ServiceSet::judge() {
  if (!judge_) judge_ = MakeChatService(Require(config_.judge, "judge"), env_);
  return *judge_;
}

ChatService& ServiceSet::generator() {
  if (!generator_) {
    generator_ = MakeChatService(Require(config_.generator, "generator"), env_);
  }
  return *generator_;
}

ChatService& ServiceSet::relevance() {
  if (!relevance_) {
    relevance_ =
        MakeChatService(config_.relevance ? *config_.relevance
                                          : Require(config_.judge, "judge"),
                        env_);
  }
  return *relevance_;
}

EmbeddingService& ServiceSet::embedding() {
  if (!embedding_) {
    embedding_ =
        MakeEmbeddingService(Require(config_.embedding, "embedding"), env_);
  }
  return *embedding_;
}

std::shared_ptr<ChatService> ServiceSet::method_chat(const MethodSpec& method) {
  for (const auto& [id, chat] : methods_) {
    if (id == method.id) return chat;
  }
  if (!method.backend) {
    throw DataError("method \"" + method.id + "\" has no backend");
  }
  std::shared_ptr<ChatService> chat = MakeChatService(*method.backend, env_);
  methods_.emplace_back(method.id, chat);
  return chat;
}

RunStats ServiceSet::Stats() const {
  RunStats s;
  auto add = [&](const auto* service) {
    if (!service) return;
    s.backend_calls += service->backend_calls();
    s.cache_hits += service->cache_hits();
  };
  add(judge_.get());
  add(generator_.get());
  add(relevance_.get());
  add(embedding_.get());
  for (const auto& m : methods_) add(m.second.get());
  return s;
}

std::unique_ptr<Corrector> MakeCorrector(const MethodSpec& method,
                                         ServiceSet& services,
                                         const CorpusManifest& manifest) {
  switch (method.kind) {
    case CorrectorKind::kNone:
      return std::make_unique<IdentityCorrector>();
    case CorrectorKind::kLlm: {
      std::vector<FewShotExemplar> exemplars;
      if (method.exemplars) exemplars = LoadExemplars(*method.exemplars);
      return std::make_unique<LlmCorrector>(services.method_chat(method),
                                            std::move(exemplars));
    }
    case CorrectorKind::kExternal:
      return std::make_unique<ExternalCorrector>(
          method.id,
          LoadExternalCorrections(*method.path, method.id, &manifest));
  }
  throw InvalidArgument("unknown corrector kind");
}

// --- easy filter -------------------------------------------------------------

EasyFilterResult FilterEasy(const CorpusManifest& manifest,
                            const std::string& asr_system, ChatService& judge,
                            size_t parallelism) {
  const auto& samples = manifest.samples;
  enum class Verdict { kEasy, kHard, kUnparseable };
  std::vector<Verdict> verdicts(samples.size(), Verdict::kHard);
  ParallelFor(samples.size(), parallelism, [&](size_t i) {
    const auto& s = samples[i];
    ChatRequest req = judge.MakeRequest(
        std::string(kTagEasy),
        EasySamplePrompt(s.context, s.Hypothesis(asr_system)));
    try {
      verdicts[i] =
          AskYesNo(judge, req).value ? Verdict::kEasy : Verdict::kHard;
    } catch (const UnparseableVerdict&) {
      verdicts[i] = Verdict::kUnparseable;
    }
  });

  EasyFilterResult out;
  out.non_easy.provenance = manifest.provenance;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (verdicts[i] == Verdict::kEasy) {
      ++out.easy_count;
      out.easy_ids.push_back(samples[i].id);
      continue;
    }
    if (verdicts[i] == Verdict::kUnparseable) {
      out.unparseable_ids.push_back(samples[i].id);
    }
    out.non_easy.samples.push_back(samples[i]);
  }
  return out;
}

// --- evaluation --------------------------------------------------------------

std::vector<MethodSummary> Summarize(const std::vector<EvalRow>& rows,
                                     const std::vector<std::string>& methods) {
  std::vector<MethodSummary> out;
  for (const auto& method : methods) {
    MethodSummary summary;
    summary.method_id = method;
    std::vector<SampleMetrics> ok;
    for (const auto& r : rows) {
      if (r.method_id != method) continue;
      if (r.failed) {
        ++summary.failed;
        continue;
      }
      ok.push_back({*r.wer, *r.sts, r.nrs->sensible});
    }
    if (!ok.empty()) summary.aggregate = AggregateReport(ok);
    out.push_back(std::move(summary));
  }
  return out;
}

EvalReport RunEvaluation(const EvalConfig& config, const RunOptions& options,
                         RunStats* stats) {
  if (config.methods.empty()) {
    throw InvalidArgument("evaluation needs at least one method");
  }
  if (config.asr_system.empty()) throw DataError("config has no asr_system");
  const CorpusManifest manifest = LoadManifest(config.manifest_path);
  ServiceSet services(config, options);

  EvalReport report;
  report.config_digest = config.Digest();
  report.counts.input = manifest.samples.size();

  CorpusManifest eval_set = manifest;
  if (config.easy_filter) {
    EasyFilterResult easy = FilterEasy(manifest, config.asr_system,
                                       services.judge(), config.parallelism);
    report.counts.easy_removed = easy.easy_count;
    eval_set = std::move(easy.non_easy);
  }
  report.counts.evaluated = eval_set.samples.size();

  EmbeddingService& embed = services.embedding();
  ChatService& generator = services.generator();
  ChatService& judge = services.judge();
  std::vector<std::unique_ptr<Corrector>> correctors;
  std::vector<std::string> method_ids;
  for (const auto& m : config.methods) {
    correctors.push_back(MakeCorrector(m, services, manifest));
    method_ids.push_back(m.id);
  }

  const size_t n = eval_set.samples.size();
  report.rows.resize(config.methods.size() * n);
  ParallelFor(report.rows.size(), config.parallelism, [&](size_t idx) {
    const size_t m = idx / n;
    const ConversationSample& sample = eval_set.samples[idx % n];
    EvalRow& row = report.rows[idx];
    row.sample_id = sample.id;
    row.method_id = method_ids[m];
    try {
      CorrectionResult c = correctors[m]->Correct(sample, config.asr_system);
      row.corrected = c.corrected;
      row.wer = WordErrorRate(sample.reference, c.corrected);
      row.sts = StsScore(sample.context, c.corrected, sample.reference, embed);
      row.nrs = NextResponseSensibility(sample.context, c.corrected,
                                        sample.reference, generator, judge);
    } catch (const std::exception& e) {
      row.wer.reset();
      row.sts.reset();
      row.nrs.reset();
      row.failed = true;
      row.failure = e.what();
    }
  });

  for (const auto& r : report.rows) {
    if (r.failed) ++report.counts.failed;
  }
  report.aggregates = Summarize(report.rows, method_ids);
  if (stats) *stats = services.Stats();

  if (!report.rows.empty() && report.counts.failed == report.rows.size()) {
    throw Error("every row failed (" + std::to_string(report.rows.size()) +
                "); first failure: " + report.rows.front().failure);
  }
  return report;
}

// --- report I/O --------------------------------------------------------------

std::optional<ReportFormat> ParseReportFormat(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  return std::nullopt;
}

namespace {

json RowToJson(const EvalRow& r) {
  json j = {{"sample_id", r.sample_id},
            {"method_id", r.method_id},
            {"corrected", r.corrected},
            {"failed", r.failed}};
  if (r.failed) j["failure"] = r.failure;
  if (r.wer) {
    j["wer"] = {{"substitutions", r.wer->substitutions},
                {"insertions", r.wer->insertions},
                {"deletions", r.wer->deletions},
                {"ref_len", r.wer->ref_len},
                {"wer_percent", r.wer->wer_percent}};
  }
  if (r.sts) j["sts"] = *r.sts;
  if (r.nrs) {
    j["nrs"] = {{"generated_response", r.nrs->generated_response},
                {"sensible", r.nrs->sensible},
                {"judge_raw", r.nrs->judge_raw},
                {"generator_id", r.nrs->generator_id},
                {"judge_id", r.nrs->judge_id}};
  }
  return j;
}

EvalRow RowFromJson(const json& j) {
  EvalRow r;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.method_id = j.at("method_id").get<std::string>();
  r.corrected = j.value("corrected", std::string());
  r.failed = j.value("failed", false);
  r.failure = j.value("failure", std::string());
  if (j.contains("wer")) {
    const json& w = j.at("wer");
    WerBreakdown wer;
    wer.substitutions = w.at("substitutions").get<size_t>();
    wer.insertions = w.at("insertions").get<size_t>();
    wer.deletions = w.at("deletions").get<size_t>();
    wer.ref_len = w.at("ref_len").get<size_t>();
    wer.wer_percent = w.at("wer_percent").get<double>();
    r.wer = wer;
  }
  if (j.contains("sts")) r.sts = j.at("sts").get<double>();
  if (j.contains("nrs")) {
    const json& n = j.at("nrs");
    r.nrs = NrsOutcome{n.at("generated_response").get<std::string>(),
                       n.at("sensible").get<bool>(),
                       n.at("judge_raw").get<std::string>(),
                       n.at("generator_id").get<std::string>(),
                       n.at("judge_id").get<std::string>()};
  }
  if (!r.failed && !(r.wer && r.sts && r.nrs)) {
    throw DataError("row " + r.sample_id + "/" + r.method_id +
                    " is neither failed nor complete");
  }
  return r;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json ReportToJson(const EvalReport& report) {
  json aggregates = json::array();
  for (const auto& s : report.aggregates) {
    json a = {{"method", s.method_id}, {"failed", s.failed}};
    if (s.aggregate) {
      a["rows"] = s.aggregate->rows;
      a["wer_percent"] = s.aggregate->wer_percent;
      a["sts_mean"] = s.aggregate->sts_mean;
      a["nrs_percent"] = s.aggregate->nrs_percent;
    } else {
      a["rows"] = 0;
    }
    aggregates.push_back(std::move(a));
  }
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back(RowToJson(r));
  return {{"config_digest", report.config_digest.digest},
          {"counts",
           {{"input", report.counts.input},
            {"easy_removed", report.counts.easy_removed},
            {"evaluated", report.counts.evaluated},
            {"failed", report.counts.failed}}},
          {"aggregates", std::move(aggregates)},
          {"rows", std::move(rows)}};
}

EvalReport ReportFromJson(const json& j) {
  EvalReport report;
  try {
    report.config_digest.digest = j.at("config_digest").get<std::string>();
    const json& c = j.at("counts");
    report.counts = {
        c.at("input").get<size_t>(), c.at("easy_removed").get<size_t>(),
        c.at("evaluated").get<size_t>(), c.at("failed").get<size_t>()};
    for (const auto& a : j.at("aggregates")) {
      MethodSummary s;
      s.method_id = a.at("method").get<std::string>();
      s.failed = a.value("failed", size_t{0});
      if (a.contains("wer_percent")) {
        s.aggregate = MethodAggregate{
            a.at("wer_percent").get<double>(), a.at("sts_mean").get<double>(),
            a.at("nrs_percent").get<double>(), a.at("rows").get<size_t>()};
      }
      report.aggregates.push_back(std::move(s));
    }
    for (const auto& r : j.at("rows")) report.rows.push_back(RowFromJson(r));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
  return report;
}

EvalReport LoadReport(const std::filesystem::path& path) {
  json j = json::parse(ReadTextFile(path), nullptr, false);
  if (j.is_discarded()) throw DataError("invalid JSON", path.string());
  return ReportFromJson(j);
}

std::string RenderReport(const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson:
      return ReportToJson(report).dump(2) + "\n";
    case ReportFormat::kCsv: {
      std::string out = "method,wer_percent,sts_mean,nrs_percent,rows,failed\n";
      for (const auto& s : report.aggregates) {
        out += CsvField(s.method_id) + ",";
        if (s.aggregate) {
          out += FormatFull(s.aggregate->wer_percent) + "," +
                 FormatFull(s.aggregate->sts_mean) + "," +
                 FormatFull(s.aggregate->nrs_percent) + "," +
                 std::to_string(s.aggregate->rows);
        } else {
          out += ",,,0";
        }
        out += "," + std::to_string(s.failed) + "\n";
      }
      return out;
    }
    case ReportFormat::kMarkdown: {
      std::string out = "| Methods | WER | STS | NRS |\n|---|---|---|---|\n";
      for (const auto& s : report.aggregates) {
        out += "| " + s.method_id + " | ";
        if (s.aggregate) {
          out += FormatOneDecimal(s.aggregate->wer_percent) + " | " +
                 FormatOneDecimal(s.aggregate->sts_mean) + " | " +
                 FormatOneDecimal(s.aggregate->nrs_percent) + " |\n";
        } else {
          out += "n/a | n/a | n/a |\n";
        }
      }
      const auto& c = report.counts;
      out += "\nSamples: " + std::to_string(c.input) + " input, " +
             std::to_string(c.easy_removed) + " easy removed, " +
             std::to_string(c.evaluated) + " evaluated; " +
             std::to_string(c.failed) +
             " failed rows excluded from aggregates.\n";
      return out;
    }
  }
  throw InvalidArgument("unknown report format");
}

void EmitReport(const EvalReport& report, ReportFormat format,
                const std::filesystem::path& path) {
  if (report.aggregates.empty()) throw InvalidArgument("report is empty");
  WriteTextFile(path, RenderReport(report, format));
}

std::vector<HumanEvalRow> HumanEvaluationForReport(
    const EvalReport& report,
    const std::vector<AnnotationRecord>& annotations) {
  std::set<std::pair<std::string, std::string>> ok;
  for (const auto& r : report.rows) {
    if (!r.failed) ok.insert({r.sample_id, r.method_id});
  }
  std::vector<AnnotationRecord> joined;
  for (const auto& s : report.aggregates) {
    for (const auto& a : annotations) {
      if (a.method_id == s.method_id && ok.count({a.sample_id, a.method_id})) {
        joined.push_back(a);
      }
    }
  }
  return HumanEvaluation(joined);
}

std::vector<std::pair<std::string, bool>> NrsVerdicts(
    const EvalReport& report, const std::string& method_id) {
  std::vector<std::pair<std::string, bool>> out;
  for (const auto& r : report.rows) {
    if (r.method_id == method_id && !r.failed) {
      out.emplace_back(r.sample_id, r.nrs->sensible);
    }
  }
  return out;
}

}  // namespace convasr
