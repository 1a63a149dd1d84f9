// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The editloop Authors

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace editloop {

inline constexpr double kScoreMin = 0.0;
inline constexpr double kScoreMax = 10.0;

// Defect codes for the tagged thinker output format. A judgment enumerates
// every defect found; a parse reports the first one.
enum class FormatViolation {
  kMissingThink,
  kMissingScore,
  kMissingAnswer,
  kDuplicateThink,
  kDuplicateScore,
  kDuplicateAnswer,
  kTagOrder,
  kMalformedScoreBlock,
  kScoreOutOfRange,
  kEmptyAnswer,
};

std::string_view violation_name(FormatViolation v);
std::optional<FormatViolation> violation_from_name(std::string_view name);

// One critique-and-refine verdict: reasoning, the two 0-10 sub-scores, and
// the rewritten instruction for the next edit.
struct ThinkerVerdict {
  std::string reasoning;
  double semantic_score = 0.0;
  double quality_score = 0.0;
  std::string refined_instruction;

  friend bool operator==(const ThinkerVerdict&, const ThinkerVerdict&) = default;
};

// Validating constructor. Trims both text fields, then rejects:
//   - scores outside [0, 10] or non-finite,
//   - a blank refined instruction,
//   - text fields embedding one of the wire tags (such a verdict could not
//     survive a serialize/parse round trip).
std::optional<ThinkerVerdict> make_thinker_verdict(std::string reasoning,
                                                   double semantic_score,
                                                   double quality_score,
                                                   std::string refined_instruction);

struct ThinkerParse {
  std::optional<ThinkerVerdict> verdict;   // set iff violations is empty
  std::vector<FormatViolation> violations; // detection order

  bool ok() const { return verdict.has_value(); }
  FormatViolation first_violation() const { return violations.front(); }
};

// Parses the tagged wire format:
//
//   <think>R</think>
//   <score>{"semantic": S, "quality": Q}</score>
//   <answer>T</answer>
//
// Exactly one of each tag pair, in think -> score -> answer order. Scores are
// numeric literals in [0, 10]; out-of-range values are rejected, never
// clamped. Text outside the tags is ignored; extracted fields are trimmed.
// Total: never throws on malformed input, single scan over the text.
ThinkerParse parse_thinker_output(std::string_view raw);

// Canonical form; parse_thinker_output(serialize_thinker_output(v)) == v.
std::string serialize_thinker_output(const ThinkerVerdict& v);

// valid == true exactly when parse_thinker_output succeeds; violations list
// every detected defect, not just the first.
struct FormatJudgment {
  bool valid = false;
  std::vector<FormatViolation> violations;
};

FormatJudgment judge_format(std::string_view raw);

// The expert's stop/refine decision. rewritten_prompt is present exactly when
// the expert is not satisfied.
struct ExpertVerdict {
  bool is_satisfied = false;
  std::string reason;
  std::optional<std::string> rewritten_prompt;

  friend bool operator==(const ExpertVerdict&, const ExpertVerdict&) = default;
};

enum class ExpertParseError {
  kNoJsonObject,       // no well-formed object with a boolean `is_satisfied`
  kInvariantViolated,  // satisfied/prompt mismatch or unusable prompt field
};

std::string_view expert_parse_error_name(ExpertParseError e);

struct ExpertParse {
  std::optional<ExpertVerdict> verdict;
  std::optional<ExpertParseError> error;

  bool ok() const { return verdict.has_value(); }
};

// Extracts the first well-formed JSON object carrying a boolean
// `is_satisfied` key, tolerating code fences and surrounding prose. Only that
// first candidate is considered; if it violates the satisfied <=> no-prompt
// rule the parse fails rather than scanning further.
ExpertParse parse_expert_output(std::string_view raw);

std::string serialize_expert_output(const ExpertVerdict& v);

// Score literal formatting for the canonical wire form: integral values print
// without a decimal point, everything else prints shortest round-trip.
std::string format_score_number(double v);

}  // namespace editloop
