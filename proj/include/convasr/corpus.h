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

// Conversation manifests and the corpus preparation filters: length limits,
// near-duplicate removal, LLM relevance screening, question exclusion, and a
// seeded stratified train/test split.

#ifndef CONVASR_CORPUS_H_
#define CONVASR_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace convasr {

class ChatService;
class EmbeddingService;

enum class Role { kBot, kLearner };

struct Utterance {
  Role role = Role::kBot;
  std::string text;
};

// The turns preceding the learner's answer. The last turn is always the bot
// question being answered.
struct DialogueContext {
  std::vector<Utterance> turns;

  // Throws DataError unless non-empty, every text is non-blank and the final
  // turn belongs to the bot.
  void Validate() const;

  // Convenience for the common single-question case.
  static DialogueContext Question(std::string text);
};

enum class Split { kTrain, kTest };

struct ConversationSample {
  std::string id;
  std::string question_id;
  std::string speaker_id;
  DialogueContext context;
  std::string reference;
  std::map<std::string, std::string> hypotheses;  // system id -> transcript
  std::optional<double> duration_s;
  std::optional<Split> split;

  // Returns the hypothesis for `system` or throws DataError.
  const std::string& Hypothesis(const std::string& system) const;
};

struct CorpusManifest {
  std::vector<ConversationSample> samples;
  std::string provenance;
};

struct CorpusStats {
  size_t num_questions = 0;
  size_t num_answers = 0;
  size_t num_speakers = 0;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

enum class FilterReason {
  kTooShort,
  kTooLongWords,
  kTooLongDuration,
  kDuplicate,
  kIrrelevant,
  kExcludedQuestion,
};

struct FilterLog {
  struct Removal {
    std::string id;
    FilterReason reason;
    std::string detail;
  };
  // Samples kept despite a problem (e.g. an unparseable relevance verdict).
  struct Flag {
    std::string id;
    std::string detail;
  };

  std::vector<Removal> removed;
  std::vector<Flag> flagged;

  void Append(const FilterLog& other);
};

// Output of every filter: the surviving samples (in input order) and why the
// rest were dropped.
struct FilterResult {
  CorpusManifest kept;
  FilterLog log;
};

// Raised when a backend-driven filter cannot finish. Carries what was decided
// before the failure.
class FilterAborted : public std::runtime_error {
 public:
  FilterAborted(const std::string& what, FilterLog partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const FilterLog& partial() const { return partial_; }

 private:
  FilterLog partial_;
};

const char* RoleName(Role role);
const char* SplitName(Split split);
const char* FilterReasonName(FilterReason reason);

nlohmann::json ContextToJson(const DialogueContext& context);
DialogueContext ContextFromJson(const nlohmann::json& j);
nlohmann::json SampleToJson(const ConversationSample& sample);
ConversationSample SampleFromJson(const nlohmann::json& j);

// Reads a line-delimited manifest. Blank lines are skipped. Errors name the
// offending line.
CorpusManifest LoadManifest(const std::filesystem::path& path);
void SaveManifest(const CorpusManifest& manifest,
                  const std::filesystem::path& path);
void WriteFilterLog(const FilterLog& log, const std::filesystem::path& path);

CorpusStats ComputeStats(const CorpusManifest& manifest);

struct LengthLimits {
  size_t min_words = 2;
  size_t max_words = 150;
  double max_duration_s = 30.0;

  static LengthLimits Unbounded() {
    return {0, std::numeric_limits<size_t>::max(),
            std::numeric_limits<double>::infinity()};
  }
};

// Drops samples whose normalized reference has fewer than min_words or more
// than max_words words, or whose duration exceeds max_duration_s. Samples
// without a duration skip the duration check.
FilterResult FilterLength(const CorpusManifest& manifest,
                          const LengthLimits& limits = {});

FilterResult ExcludeQuestions(const CorpusManifest& manifest,
                              const std::set<std::string>& question_ids);

// Within each question, scanning in manifest order, drops a sample whose
// reference embedding has cosine similarity strictly above `threshold` with
// any earlier kept sample of the same question.
FilterResult Deduplicate(const CorpusManifest& manifest,
                         EmbeddingService& embed, double threshold = 0.95,
                         size_t parallelism = 1);

// Asks the judge whether each reference answer makes at least one point.
// "No" removes the sample; an unparseable verdict keeps it and flags it.
FilterResult FilterRelevance(const CorpusManifest& manifest, ChatService& chat,
                             size_t parallelism = 1);

struct SplitResult {
  CorpusManifest train;
  CorpusManifest test;
};

// Seeded, stratified by question_id with largest-remainder allocation. Both
// outputs keep manifest order and have their `split` field set.
SplitResult SplitCorpus(const CorpusManifest& manifest, size_t test_size,
                        uint64_t seed);

}  // namespace convasr

#endif  // CONVASR_CORPUS_H_
