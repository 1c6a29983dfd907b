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

#include "convasr/metrics.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "convasr/error.h"
#include "convasr/jsonl.h"
#include "convasr/prompts.h"
#include "convasr/text.h"

namespace convasr {

EditCounts AlignWords(const std::vector<std::string>& ref,
                      const std::vector<std::string>& hyp) {
  const size_t n = ref.size(), m = hyp.size();
  // cost[i][j]: (edits, deletions) between ref[0, i) and hyp[0, j), compared
  // lexicographically. With I - D fixed by the lengths, fewest deletions
  // among minimal alignments means most substitutions.
  using Cost = std::pair<size_t, size_t>;
  std::vector<std::vector<Cost>> cost(n + 1, std::vector<Cost>(m + 1));
  for (size_t i = 0; i <= n; ++i) cost[i][0] = {i, i};
  for (size_t j = 0; j <= m; ++j) cost[0][j] = {j, 0};
  auto diag = [&](size_t i, size_t j) {
    Cost c = cost[i - 1][j - 1];
    if (ref[i - 1] != hyp[j - 1]) ++c.first;
    return c;
  };
  auto del = [&](size_t i, size_t j) {
    return Cost{cost[i - 1][j].first + 1, cost[i - 1][j].second + 1};
  };
  auto ins = [&](size_t i, size_t j) {
    return Cost{cost[i][j - 1].first + 1, cost[i][j - 1].second};
  };
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      cost[i][j] = std::min({diag(i, j), del(i, j), ins(i, j)});
    }
  }

  EditCounts counts;
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && cost[i][j] == diag(i, j)) {
      if (ref[i - 1] != hyp[j - 1]) ++counts.substitutions;
      --i;
      --j;
    } else if (i > 0 && (j == 0 || cost[i][j] == del(i, j))) {
      ++counts.deletions;
      --i;
    } else {
      ++counts.insertions;
      --j;
    }
  }
  return counts;
}

WerBreakdown WordErrorRate(std::string_view reference,
                           std::string_view hypothesis) {
  const auto ref = SplitWords(NormalizeText(reference));
  if (ref.empty()) {
    throw InvalidArgument("reference is empty after normalization");
  }
  const auto hyp = SplitWords(NormalizeText(hypothesis));
  const EditCounts e = AlignWords(ref, hyp);
  WerBreakdown out;
  out.substitutions = e.substitutions;
  out.insertions = e.insertions;
  out.deletions = e.deletions;
  out.ref_len = ref.size();
  out.wer_percent =
      100.0 * static_cast<double>(e.total()) / static_cast<double>(ref.size());
  return out;
}

std::string ContextPrefixed(const DialogueContext& context,
                            std::string_view transcription) {
  std::string out;
  for (const auto& turn : context.turns) {
    out += turn.text;
    out += kContextSeparator;
  }
  out += transcription;
  return out;
}

double StsScore(const DialogueContext& context, std::string_view t,
                std::string_view r, EmbeddingService& embed) {
  if (Trim(t).empty() || Trim(r).empty()) {
    throw InvalidArgument("STS needs non-empty transcriptions");
  }
  auto a = embed.Embed(ContextPrefixed(context, t), "sts");
  auto b = embed.Embed(ContextPrefixed(context, r), "sts");
  return 100.0 * Cosine(a.values, b.values);
}

std::string CleanGeneratedResponse(std::string_view raw) {
  std::string_view s = Trim(raw);
  if (StartsWithIgnoreCase(s, "Person A:")) s = Trim(s.substr(9));
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = Trim(s.substr(1, s.size() - 2));
  }
  return CollapseWhitespace(s);
}

NrsOutcome NextResponseSensibility(const DialogueContext& context,
                                   std::string_view hypothesis,
                                   std::string_view reference,
                                   ChatService& generator, ChatService& judge) {
  if (Trim(hypothesis).empty()) {
    throw InvalidArgument("NRS needs a non-empty hypothesis");
  }
  if (Trim(reference).empty()) {
    throw InvalidArgument("NRS needs a non-empty reference");
  }
  NrsOutcome out;
  out.generator_id = generator.model_id();
  out.judge_id = judge.model_id();

  std::string raw = generator.Complete(
      generator.MakeRequest(std::string(kTagGeneration),
                            ResponseGenerationPrompt(context, hypothesis)));
  out.generated_response = CleanGeneratedResponse(raw);
  if (out.generated_response.empty()) {
    throw BackendError(BackendError::Kind::kMalformed,
                       "response generator returned an empty turn");
  }

  JudgeVerdict verdict = AskYesNo(
      judge, judge.MakeRequest(std::string(kTagSensibility),
                               SensibilityPrompt(context, reference,
                                                 out.generated_response)));
  out.sensible = verdict.value;
  out.judge_raw = std::move(verdict.raw);
  return out;
}

NrsOutcome NrsSample(const ConversationSample& sample,
                     const std::string& hyp_system, ChatService& generator,
                     ChatService& judge) {
  return NextResponseSensibility(sample.context, sample.Hypothesis(hyp_system),
                                 sample.reference, generator, judge);
}

MethodAggregate AggregateReport(const std::vector<SampleMetrics>& rows) {
  if (rows.empty()) throw InvalidArgument("cannot aggregate zero rows");
  size_t edits = 0, ref_words = 0, sensible = 0;
  double sts_sum = 0.0;
  for (const auto& r : rows) {
    edits += r.wer.errors();
    ref_words += r.wer.ref_len;
    sts_sum += r.sts;
    if (r.sensible) ++sensible;
  }
  MethodAggregate agg;
  agg.rows = rows.size();
  agg.wer_percent = ref_words == 0 ? 0.0
                                   : 100.0 * static_cast<double>(edits) /
                                         static_cast<double>(ref_words);
  agg.sts_mean = sts_sum / static_cast<double>(rows.size());
  agg.nrs_percent =
      100.0 * static_cast<double>(sensible) / static_cast<double>(rows.size());
  return agg;
}

double RoundHalfUp(double value, int decimals) {
  if (!std::isfinite(value)) return value;
  char buf[512];
  auto res =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (res.ec != std::errc()) return value;
  std::string s(buf, res.ptr);

  bool negative = !s.empty() && s[0] == '-';
  if (negative) s.erase(0, 1);
  size_t dot = s.find('.');
  std::string whole = dot == std::string::npos ? s : s.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);
  if (static_cast<int>(frac.size()) <= decimals) return value;

  bool up = frac[decimals] >= '5';
  std::string digits = whole + frac.substr(0, decimals);
  if (up) {
    int k = static_cast<int>(digits.size()) - 1;
    while (k >= 0 && digits[k] == '9') digits[k--] = '0';
    if (k < 0) {
      digits.insert(digits.begin(), '1');
    } else {
      ++digits[k];
    }
  }
  std::string out = negative ? "-" : "";
  out += digits.substr(0, digits.size() - decimals);
  if (decimals > 0) out += "." + digits.substr(digits.size() - decimals);
  double rounded = 0.0;
  std::from_chars(out.data(), out.data() + out.size(), rounded);
  return rounded + 0.0;
}

std::string FormatOneDecimal(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", RoundHalfUp(value, 1) + 0.0);
  std::string s = buf;
  if (s == "-0.0") s = "0.0";
  return s;
}

std::string FormatFull(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::vector<AnnotationRecord> LoadAnnotations(
    const std::filesystem::path& path) {
  std::vector<AnnotationRecord> out;
  std::set<std::pair<std::string, std::string>> seen;
  ForEachJsonLine(path, [&](const nlohmann::json& j, size_t) {
    AnnotationRecord rec;
    rec.sample_id = j.at("sample_id").get<std::string>();
    rec.method_id = j.at("method_id").get<std::string>();
    rec.human_se = j.at("human_se").get<bool>();
    rec.human_nrs = j.at("human_nrs").get<bool>();
    if (!seen.insert({rec.sample_id, rec.method_id}).second) {
      throw DataError("duplicate annotation for sample \"" + rec.sample_id +
                      "\" and method \"" + rec.method_id + "\"");
    }
    out.push_back(std::move(rec));
  });
  return out;
}

double AgreementPercent(
    const std::vector<std::pair<std::string, bool>>& auto_verdicts,
    const std::vector<AnnotationRecord>& annotations, AnnotationField field,
    const std::optional<std::string>& method_id) {
  if (auto_verdicts.empty() || annotations.empty()) {
    throw InvalidArgument("agreement needs verdicts and annotations");
  }
  std::map<std::string, std::vector<const AnnotationRecord*>> by_sample;
  for (const auto& a : annotations) {
    if (method_id && a.method_id != *method_id) continue;
    by_sample[a.sample_id].push_back(&a);
  }
  size_t agree = 0;
  for (const auto& [id, verdict] : auto_verdicts) {
    auto it = by_sample.find(id);
    if (it == by_sample.end()) {
      throw DataError("no annotation for sample \"" + id + "\"");
    }
    if (it->second.size() > 1) {
      throw DataError("sample \"" + id +
                      "\" is annotated for several methods; pick one");
    }
    const AnnotationRecord& a = *it->second.front();
    bool human = field == AnnotationField::kSe ? a.human_se : a.human_nrs;
    if (human == verdict) ++agree;
  }
  return 100.0 * static_cast<double>(agree) /
         static_cast<double>(auto_verdicts.size());
}

std::vector<HumanEvalRow> HumanEvaluation(
    const std::vector<AnnotationRecord>& annotations) {
  std::vector<HumanEvalRow> rows;
  std::map<std::string, size_t> index;
  std::vector<std::pair<size_t, size_t>> positives;  // (se, nrs)
  for (const auto& a : annotations) {
    auto [it, inserted] = index.emplace(a.method_id, rows.size());
    if (inserted) {
      rows.push_back({a.method_id, 0.0, 0.0, 0});
      positives.emplace_back(0, 0);
    }
    auto& row = rows[it->second];
    ++row.count;
    if (a.human_se) ++positives[it->second].first;
    if (a.human_nrs) ++positives[it->second].second;
  }
  for (size_t i = 0; i < rows.size(); ++i) {
    double n = static_cast<double>(rows[i].count);
    rows[i].se_percent = 100.0 * static_cast<double>(positives[i].first) / n;
    rows[i].nrs_percent = 100.0 * static_cast<double>(positives[i].second) / n;
  }
  return rows;
}

std::string HumanEvaluationMarkdown(const std::vector<HumanEvalRow>& rows) {
  std::string out = "| Methods | SE | NRS |\n|---|---|---|\n";
  for (const auto& r : rows) {
    out += "| " + r.method_id + " | " + FormatOneDecimal(r.se_percent) + " | " +
           FormatOneDecimal(r.nrs_percent) + " |\n";
  }
  return out;
}

}  // namespace convasr
