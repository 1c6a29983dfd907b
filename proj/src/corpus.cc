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

#include "convasr/corpus.h"

#include <algorithm>
#include <map>
#include <random>
#include <unordered_set>

#include "convasr/backends.h"
#include "convasr/error.h"
#include "convasr/jsonl.h"
#include "convasr/metrics.h"
#include "convasr/parallel.h"
#include "convasr/prompts.h"
#include "convasr/text.h"

namespace convasr {

using nlohmann::json;

const char* RoleName(Role role) {
  return role == Role::kBot ? "bot" : "learner";
}

const char* SplitName(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

const char* FilterReasonName(FilterReason reason) {
  switch (reason) {
    case FilterReason::kTooShort:
      return "too_short";
    case FilterReason::kTooLongWords:
      return "too_long_words";
    case FilterReason::kTooLongDuration:
      return "too_long_duration";
    case FilterReason::kDuplicate:
      return "duplicate";
    case FilterReason::kIrrelevant:
      return "irrelevant";
    case FilterReason::kExcludedQuestion:
      return "excluded_question";
  }
  return "unknown";
}

void DialogueContext::Validate() const {
  if (turns.empty()) throw DataError("dialogue context has no turns");
  for (const auto& t : turns) {
    if (Trim(t.text).empty()) throw DataError("dialogue turn with empty text");
  }
  if (turns.back().role != Role::kBot) {
    throw DataError("last context turn must be spoken by the bot");
  }
}

DialogueContext DialogueContext::Question(std::string text) {
  return DialogueContext{{Utterance{Role::kBot, std::move(text)}}};
}

const std::string& ConversationSample::Hypothesis(
    const std::string& system) const {
  auto it = hypotheses.find(system);
  if (it == hypotheses.end()) {
    throw DataError("sample \"" + id + "\" has no hypothesis for system \"" +
                    system + "\"");
  }
  return it->second;
}

void FilterLog::Append(const FilterLog& other) {
  removed.insert(removed.end(), other.removed.begin(), other.removed.end());
  flagged.insert(flagged.end(), other.flagged.begin(), other.flagged.end());
}

// --- JSON --------------------------------------------------------------------

json ContextToJson(const DialogueContext& context) {
  json turns = json::array();
  for (const auto& t : context.turns) {
    turns.push_back({{"role", RoleName(t.role)}, {"text", t.text}});
  }
  return turns;
}

DialogueContext ContextFromJson(const json& j) {
  DialogueContext ctx;
  if (j.is_string()) {
    ctx = DialogueContext::Question(j.get<std::string>());
  } else if (j.is_array()) {
    for (const auto& t : j) {
      const std::string role = t.at("role").get<std::string>();
      Utterance u;
      if (role == "bot") {
        u.role = Role::kBot;
      } else if (role == "learner") {
        u.role = Role::kLearner;
      } else {
        throw DataError("unknown turn role \"" + role + "\"");
      }
      u.text = t.at("text").get<std::string>();
      ctx.turns.push_back(std::move(u));
    }
  } else {
    throw DataError("context must be a list of turns");
  }
  ctx.Validate();
  return ctx;
}

json SampleToJson(const ConversationSample& s) {
  json j = {{"id", s.id},
            {"question_id", s.question_id},
            {"speaker_id", s.speaker_id},
            {"context", ContextToJson(s.context)},
            {"reference", s.reference},
            {"hypotheses", s.hypotheses}};
  if (s.duration_s) j["duration_s"] = *s.duration_s;
  if (s.split) j["split"] = SplitName(*s.split);
  return j;
}

ConversationSample SampleFromJson(const json& j) {
  ConversationSample s;
  s.id = j.at("id").get<std::string>();
  if (s.id.empty()) throw DataError("sample id is empty");
  s.question_id = j.at("question_id").get<std::string>();
  s.speaker_id = j.at("speaker_id").get<std::string>();
  s.context = ContextFromJson(j.at("context"));
  s.reference = j.at("reference").get<std::string>();
  if (Trim(s.reference).empty()) {
    throw DataError("sample \"" + s.id + "\" has an empty reference");
  }
  if (j.contains("hypotheses")) {
    s.hypotheses = j.at("hypotheses").get<std::map<std::string, std::string>>();
  }
  if (j.contains("duration_s") && !j.at("duration_s").is_null()) {
    double d = j.at("duration_s").get<double>();
    if (!(d >= 0.0)) {
      throw DataError("sample \"" + s.id + "\" has a negative duration");
    }
    s.duration_s = d;
  }
  if (j.contains("split") && !j.at("split").is_null()) {
    const std::string split = j.at("split").get<std::string>();
    if (split == "train") {
      s.split = Split::kTrain;
    } else if (split == "test") {
      s.split = Split::kTest;
    } else {
      throw DataError("unknown split \"" + split + "\"");
    }
  }
  return s;
}

CorpusManifest LoadManifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw DataError("manifest does not exist", path.string());
  }
  CorpusManifest manifest;
  manifest.provenance = path.string();
  std::unordered_set<std::string> ids;
  ForEachJsonLine(path, [&](const json& record, size_t) {
    ConversationSample s = SampleFromJson(record);
    if (!ids.insert(s.id).second) {
      throw DataError("duplicate sample id \"" + s.id + "\"");
    }
    manifest.samples.push_back(std::move(s));
  });
  return manifest;
}

void SaveManifest(const CorpusManifest& manifest,
                  const std::filesystem::path& path) {
  std::vector<json> records;
  records.reserve(manifest.samples.size());
  for (const auto& s : manifest.samples) records.push_back(SampleToJson(s));
  WriteJsonLines(path, records);
}

void WriteFilterLog(const FilterLog& log, const std::filesystem::path& path) {
  std::vector<json> records;
  for (const auto& r : log.removed) {
    records.push_back({{"id", r.id},
                       {"reason", FilterReasonName(r.reason)},
                       {"detail", r.detail}});
  }
  for (const auto& f : log.flagged) {
    records.push_back({{"id", f.id},
                       {"reason", nullptr},
                       {"flag", true},
                       {"detail", f.detail}});
  }
  WriteJsonLines(path, records);
}

CorpusStats ComputeStats(const CorpusManifest& manifest) {
  std::unordered_set<std::string> questions, speakers;
  for (const auto& s : manifest.samples) {
    questions.insert(s.question_id);
    speakers.insert(s.speaker_id);
  }
  return {questions.size(), manifest.samples.size(), speakers.size()};
}

// --- filters -----------------------------------------------------------------

FilterResult FilterLength(const CorpusManifest& manifest,
                          const LengthLimits& limits) {
  FilterResult out;
  out.kept.provenance = manifest.provenance;
  for (const auto& s : manifest.samples) {
    const size_t words = SplitWords(NormalizeText(s.reference)).size();
    const std::string count =
        std::to_string(words) + (words == 1 ? " word" : " words");
    if (words < limits.min_words) {
      out.log.removed.push_back({s.id, FilterReason::kTooShort, count});
    } else if (words > limits.max_words) {
      out.log.removed.push_back({s.id, FilterReason::kTooLongWords, count});
    } else if (s.duration_s && *s.duration_s > limits.max_duration_s) {
      out.log.removed.push_back({s.id, FilterReason::kTooLongDuration,
                                 FormatFull(*s.duration_s) + " s"});
    } else {
      out.kept.samples.push_back(s);
    }
  }
  return out;
}

FilterResult ExcludeQuestions(const CorpusManifest& manifest,
                              const std::set<std::string>& question_ids) {
  FilterResult out;
  out.kept.provenance = manifest.provenance;
  for (const auto& s : manifest.samples) {
    if (question_ids.count(s.question_id)) {
      out.log.removed.push_back(
          {s.id, FilterReason::kExcludedQuestion, "question " + s.question_id});
    } else {
      out.kept.samples.push_back(s);
    }
  }
  return out;
}

FilterResult Deduplicate(const CorpusManifest& manifest,
                         EmbeddingService& embed, double threshold,
                         size_t parallelism) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw InvalidArgument("dedup threshold must be in (0, 1]");
  }
  const auto& samples = manifest.samples;
  std::vector<EmbeddingVector> vectors(samples.size());
  try {
    ParallelFor(samples.size(), parallelism, [&](size_t i) {
      vectors[i] = embed.Embed(samples[i].reference, "dedup");
    });
  } catch (const std::exception& e) {
    throw FilterAborted(std::string("deduplication aborted: ") + e.what(), {});
  }

  FilterResult out;
  out.kept.provenance = manifest.provenance;
  // question id -> indices of kept samples
  std::map<std::string, std::vector<size_t>> kept_by_question;
  for (size_t i = 0; i < samples.size(); ++i) {
    auto& kept = kept_by_question[samples[i].question_id];
    std::optional<std::pair<size_t, double>> dup;
    for (size_t k : kept) {
      double sim = Cosine(vectors[i].values, vectors[k].values);
      if (sim > threshold) {
        dup = {k, sim};
        break;
      }
    }
    if (dup) {
      out.log.removed.push_back({samples[i].id, FilterReason::kDuplicate,
                                 "similar to " + samples[dup->first].id +
                                     " (cosine " + std::to_string(dup->second) +
                                     ")"});
    } else {
      kept.push_back(i);
      out.kept.samples.push_back(samples[i]);
    }
  }
  return out;
}

FilterResult FilterRelevance(const CorpusManifest& manifest, ChatService& chat,
                             size_t parallelism) {
  const auto& samples = manifest.samples;
  enum class Outcome { kKeep, kRemove, kFlag, kFailed };
  struct Decision {
    Outcome outcome = Outcome::kFailed;
    std::string detail;
  };
  std::vector<Decision> decisions(samples.size());
  ParallelFor(samples.size(), parallelism, [&](size_t i) {
    const auto& s = samples[i];
    ChatRequest req = chat.MakeRequest(std::string(kTagRelevance),
                                       RelevancePrompt(s.context, s.reference));
    try {
      JudgeVerdict v = AskYesNo(chat, req);
      decisions[i] = {v.value ? Outcome::kKeep : Outcome::kRemove, v.raw};
    } catch (const UnparseableVerdict& e) {
      decisions[i] = {Outcome::kFlag,
                      "unparseable relevance verdict, kept: " + e.raw()};
    } catch (const std::exception& e) {
      decisions[i] = {Outcome::kFailed, e.what()};
    }
  });

  FilterResult out;
  out.kept.provenance = manifest.provenance;
  for (size_t i = 0; i < samples.size(); ++i) {
    const auto& d = decisions[i];
    switch (d.outcome) {
      case Outcome::kKeep:
        out.kept.samples.push_back(samples[i]);
        break;
      case Outcome::kRemove:
        out.log.removed.push_back(
            {samples[i].id, FilterReason::kIrrelevant, d.detail});
        break;
      case Outcome::kFlag:
        out.kept.samples.push_back(samples[i]);
        out.log.flagged.push_back({samples[i].id, d.detail});
        break;
      case Outcome::kFailed:
        throw FilterAborted("relevance filter aborted at sample \"" +
                                samples[i].id + "\": " + d.detail,
                            out.log);
    }
  }
  return out;
}

// --- split -------------------------------------------------------------------

namespace {

// Uniform integer in [0, bound) from raw engine output, by rejection, so the
// sequence only depends on the mt19937_64 definition.
uint64_t UniformBelow(std::mt19937_64& rng, uint64_t bound) {
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

void Shuffle(std::vector<size_t>& v, std::mt19937_64& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[UniformBelow(rng, i)]);
  }
}

}  // namespace

SplitResult SplitCorpus(const CorpusManifest& manifest, size_t test_size,
                        uint64_t seed) {
  const size_t total = manifest.samples.size();
  if (test_size == 0) throw InvalidArgument("test_size must be positive");
  if (test_size > total) {
    throw InvalidArgument("test_size " + std::to_string(test_size) +
                          " exceeds corpus size " + std::to_string(total));
  }

  // Groups in first-appearance order.
  std::vector<std::vector<size_t>> groups;
  std::map<std::string, size_t> group_of;
  for (size_t i = 0; i < total; ++i) {
    auto [it, inserted] =
        group_of.emplace(manifest.samples[i].question_id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }

  // Largest-remainder allocation of test slots proportional to group size.
  std::vector<size_t> quota(groups.size());
  std::vector<std::pair<uint64_t, size_t>> remainders;  // (remainder, group)
  size_t assigned = 0;
  for (size_t g = 0; g < groups.size(); ++g) {
    const uint64_t scaled = static_cast<uint64_t>(test_size) * groups[g].size();
    quota[g] = scaled / total;
    assigned += quota[g];
    remainders.emplace_back(scaled % total, g);
  }
  std::stable_sort(
      remainders.begin(), remainders.end(),
      [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t k = 0; assigned < test_size; ++k, ++assigned) {
    ++quota[remainders[k].second];
  }

  std::mt19937_64 rng(seed);
  std::vector<bool> is_test(total, false);
  for (size_t g = 0; g < groups.size(); ++g) {
    std::vector<size_t> order = groups[g];
    Shuffle(order, rng);
    for (size_t k = 0; k < quota[g]; ++k) is_test[order[k]] = true;
  }

  SplitResult out;
  out.train.provenance = manifest.provenance;
  out.test.provenance = manifest.provenance;
  for (size_t i = 0; i < total; ++i) {
    ConversationSample s = manifest.samples[i];
    s.split = is_test[i] ? Split::kTest : Split::kTrain;
    (is_test[i] ? out.test : out.train).samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace convasr
