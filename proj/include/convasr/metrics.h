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

// Transcript quality metrics: word error rate, semantic textual similarity
// (STS) over context-prefixed embeddings, next response sensibility (NRS), and
// agreement of automatic verdicts with human annotations.

#ifndef CONVASR_METRICS_H_
#define CONVASR_METRICS_H_

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "convasr/backends.h"
#include "convasr/corpus.h"

namespace convasr {

struct EditCounts {
  size_t substitutions = 0;
  size_t insertions = 0;
  size_t deletions = 0;

  size_t total() const { return substitutions + insertions + deletions; }
  friend bool operator==(const EditCounts&, const EditCounts&) = default;
};

// Minimal unit-cost alignment of two word sequences. Among minimal
// alignments the one with the most substitutions (fewest deletion plus
// insertion pairs) is reported.
EditCounts AlignWords(const std::vector<std::string>& ref,
                      const std::vector<std::string>& hyp);

struct WerBreakdown {
  size_t substitutions = 0;
  size_t insertions = 0;
  size_t deletions = 0;
  size_t ref_len = 0;
  double wer_percent = 0.0;

  size_t errors() const { return substitutions + insertions + deletions; }
};

// Both sides are passed through NormalizeText first. Throws InvalidArgument
// when the normalized reference is empty.
WerBreakdown WordErrorRate(std::string_view reference,
                           std::string_view hypothesis);

inline constexpr std::string_view kContextSeparator = " [SEP] ";

// "<turn 1> [SEP] ... [SEP] <turn n> [SEP] <transcription>"
std::string ContextPrefixed(const DialogueContext& context,
                            std::string_view transcription);

// 100 * cosine(embed(C + t), embed(C + r)), in [-100, 100].
double StsScore(const DialogueContext& context, std::string_view t,
                std::string_view r, EmbeddingService& embed);

struct NrsOutcome {
  std::string generated_response;
  bool sensible = false;
  std::string judge_raw;
  std::string generator_id;
  std::string judge_id;
};

// Generates the bot's next turn from context + `hypothesis`, then asks the
// judge whether that turn is sensible after context + `reference`.
NrsOutcome NextResponseSensibility(const DialogueContext& context,
                                   std::string_view hypothesis,
                                   std::string_view reference,
                                   ChatService& generator, ChatService& judge);

NrsOutcome NrsSample(const ConversationSample& sample,
                     const std::string& hyp_system, ChatService& generator,
                     ChatService& judge);

// Cleans a generated bot turn: strips a leading "Person A:" label and
// collapses whitespace onto one line.
std::string CleanGeneratedResponse(std::string_view raw);

struct SampleMetrics {
  WerBreakdown wer;
  double sts = 0.0;
  bool sensible = false;
};

struct MethodAggregate {
  double wer_percent = 0.0;  // 100 * sum(edits) / sum(ref_len)
  double sts_mean = 0.0;
  double nrs_percent = 0.0;
  size_t rows = 0;
};

// Throws InvalidArgument on an empty row list.
MethodAggregate AggregateReport(const std::vector<SampleMetrics>& rows);

// Rounds half away from zero at `decimals` places, operating on the shortest
// decimal representation of `value` so that e.g. 0.15 rounds to 0.2.
double RoundHalfUp(double value, int decimals = 1);
// RoundHalfUp(value, 1) printed with exactly one decimal.
std::string FormatOneDecimal(double value);
// Shortest representation that parses back to exactly `value`.
std::string FormatFull(double value);

struct AnnotationRecord {
  std::string sample_id;
  std::string method_id;
  bool human_se = false;
  bool human_nrs = false;
};

enum class AnnotationField { kSe, kNrs };

// Line-delimited {sample_id, method_id, human_se, human_nrs}. Rejects
// duplicate (sample_id, method_id) pairs.
std::vector<AnnotationRecord> LoadAnnotations(
    const std::filesystem::path& path);

// Percentage of automatic verdicts that agree with the annotated field. When
// `method_id` is given only that method's annotations are considered. Throws
// DataError for an unmatched or ambiguous sample id and InvalidArgument for an
// empty pairing.
double AgreementPercent(
    const std::vector<std::pair<std::string, bool>>& auto_verdicts,
    const std::vector<AnnotationRecord>& annotations, AnnotationField field,
    const std::optional<std::string>& method_id = std::nullopt);

struct HumanEvalRow {
  std::string method_id;
  double se_percent = 0.0;
  double nrs_percent = 0.0;
  size_t count = 0;
};

// Per-method SE% and human NRS%, methods in first-appearance order.
std::vector<HumanEvalRow> HumanEvaluation(
    const std::vector<AnnotationRecord>& annotations);

std::string HumanEvaluationMarkdown(const std::vector<HumanEvalRow>& rows);

}  // namespace convasr

#endif  // CONVASR_METRICS_H_
