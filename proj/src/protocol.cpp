// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The editloop Authors

#include "editloop/protocol.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "editloop/util.hpp"

namespace editloop {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kScoreOpen = "<score>";
constexpr std::string_view kScoreClose = "</score>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

constexpr std::string_view kAllTags[] = {kThinkOpen, kThinkClose, kScoreOpen,
                                         kScoreClose, kAnswerOpen, kAnswerClose};

std::vector<std::size_t> find_all(std::string_view haystack, std::string_view needle) {
  std::vector<std::size_t> out;
  std::size_t pos = haystack.find(needle);
  while (pos != std::string_view::npos) {
    out.push_back(pos);
    pos = haystack.find(needle, pos + 1);
  }
  return out;
}

struct TagPairScan {
  std::vector<std::size_t> opens;
  std::vector<std::size_t> closes;

  bool complete() const { return opens.size() == 1 && closes.size() == 1; }
  bool missing() const { return opens.empty() || closes.empty(); }
  bool duplicated() const { return opens.size() > 1 || closes.size() > 1; }
};

struct Scan {
  std::vector<FormatViolation> violations;
  std::optional<ThinkerVerdict> verdict;
};

// Single pass over the wire format. Collects every defect so the same scan
// backs both the strict parse and the format judgment.
Scan scan_thinker_output(std::string_view raw) {
  Scan result;
  auto& v = result.violations;

  const TagPairScan think{find_all(raw, kThinkOpen), find_all(raw, kThinkClose)};
  const TagPairScan score{find_all(raw, kScoreOpen), find_all(raw, kScoreClose)};
  const TagPairScan answer{find_all(raw, kAnswerOpen), find_all(raw, kAnswerClose)};

  if (think.missing()) v.push_back(FormatViolation::kMissingThink);
  if (score.missing()) v.push_back(FormatViolation::kMissingScore);
  if (answer.missing()) v.push_back(FormatViolation::kMissingAnswer);
  if (think.duplicated()) v.push_back(FormatViolation::kDuplicateThink);
  if (score.duplicated()) v.push_back(FormatViolation::kDuplicateScore);
  if (answer.duplicated()) v.push_back(FormatViolation::kDuplicateAnswer);

  const bool all_complete = think.complete() && score.complete() && answer.complete();
  if (all_complete) {
    const bool ordered = think.opens[0] < think.closes[0] &&
                         think.closes[0] < score.opens[0] &&
                         score.opens[0] < score.closes[0] &&
                         score.closes[0] < answer.opens[0] &&
                         answer.opens[0] < answer.closes[0];
    if (!ordered) v.push_back(FormatViolation::kTagOrder);
  }

  // Score and answer contents are judged whenever their own pair is intact,
  // so a tag-order defect does not mask a bad score block.
  double semantic = 0.0;
  double quality = 0.0;
  bool scores_ok = false;
  if (score.complete() && score.opens[0] < score.closes[0]) {
    const std::size_t begin = score.opens[0] + kScoreOpen.size();
    const std::string_view body = raw.substr(begin, score.closes[0] - begin);
    const auto parsed = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (!parsed.is_object() || !parsed.contains("semantic") ||
        !parsed.contains("quality") || !parsed["semantic"].is_number() ||
        !parsed["quality"].is_number()) {
      v.push_back(FormatViolation::kMalformedScoreBlock);
    } else {
      semantic = parsed["semantic"].get<double>();
      quality = parsed["quality"].get<double>();
      scores_ok = true;
      if (semantic < kScoreMin || semantic > kScoreMax)
        v.push_back(FormatViolation::kScoreOutOfRange);
      if (quality < kScoreMin || quality > kScoreMax)
        v.push_back(FormatViolation::kScoreOutOfRange);
    }
  }

  std::string answer_text;
  if (answer.complete() && answer.opens[0] < answer.closes[0]) {
    const std::size_t begin = answer.opens[0] + kAnswerOpen.size();
    answer_text = trim(raw.substr(begin, answer.closes[0] - begin));
    if (answer_text.empty()) v.push_back(FormatViolation::kEmptyAnswer);
  }

  if (!v.empty()) return result;

  const std::size_t think_begin = think.opens[0] + kThinkOpen.size();
  std::string reasoning = trim(raw.substr(think_begin, think.closes[0] - think_begin));
  result.verdict = ThinkerVerdict{std::move(reasoning), scores_ok ? semantic : 0.0,
                                  scores_ok ? quality : 0.0, std::move(answer_text)};
  return result;
}

}  // namespace

std::string_view violation_name(FormatViolation v) {
  switch (v) {
    case FormatViolation::kMissingThink: return "missing-think";
    case FormatViolation::kMissingScore: return "missing-score";
    case FormatViolation::kMissingAnswer: return "missing-answer";
    case FormatViolation::kDuplicateThink: return "duplicate-think";
    case FormatViolation::kDuplicateScore: return "duplicate-score";
    case FormatViolation::kDuplicateAnswer: return "duplicate-answer";
    case FormatViolation::kTagOrder: return "tag-order";
    case FormatViolation::kMalformedScoreBlock: return "malformed-score";
    case FormatViolation::kScoreOutOfRange: return "score-out-of-range";
    case FormatViolation::kEmptyAnswer: return "empty-answer";
  }
  return "unknown";
}

std::optional<FormatViolation> violation_from_name(std::string_view name) {
  static constexpr FormatViolation kAll[] = {
      FormatViolation::kMissingThink,    FormatViolation::kMissingScore,
      FormatViolation::kMissingAnswer,   FormatViolation::kDuplicateThink,
      FormatViolation::kDuplicateScore,  FormatViolation::kDuplicateAnswer,
      FormatViolation::kTagOrder,        FormatViolation::kMalformedScoreBlock,
      FormatViolation::kScoreOutOfRange, FormatViolation::kEmptyAnswer,
  };
  for (FormatViolation v : kAll) {
    if (violation_name(v) == name) return v;
  }
  return std::nullopt;
}

std::optional<ThinkerVerdict> make_thinker_verdict(std::string reasoning,
                                                   double semantic_score,
                                                   double quality_score,
                                                   std::string refined_instruction) {
  if (!std::isfinite(semantic_score) || !std::isfinite(quality_score)) return std::nullopt;
  if (semantic_score < kScoreMin || semantic_score > kScoreMax) return std::nullopt;
  if (quality_score < kScoreMin || quality_score > kScoreMax) return std::nullopt;

  std::string r = trim(reasoning);
  std::string t = trim(refined_instruction);
  if (t.empty()) return std::nullopt;
  for (std::string_view tag : kAllTags) {
    if (r.find(tag) != std::string::npos || t.find(tag) != std::string::npos)
      return std::nullopt;
  }
  return ThinkerVerdict{std::move(r), semantic_score, quality_score, std::move(t)};
}

ThinkerParse parse_thinker_output(std::string_view raw) {
  Scan scan = scan_thinker_output(raw);
  return ThinkerParse{std::move(scan.verdict), std::move(scan.violations)};
}

FormatJudgment judge_format(std::string_view raw) {
  Scan scan = scan_thinker_output(raw);
  return FormatJudgment{scan.violations.empty(), std::move(scan.violations)};
}

std::string format_score_number(double v) {
  if (std::isfinite(v) && v == std::floor(v)) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    return buf;
  }
  return nlohmann::json(v).dump();
}

std::string serialize_thinker_output(const ThinkerVerdict& v) {
  std::string out;
  out.reserve(v.reasoning.size() + v.refined_instruction.size() + 96);
  out.append(kThinkOpen).append(v.reasoning).append(kThinkClose);
  out.append("\n").append(kScoreOpen);
  out.append("{\"semantic\": ").append(format_score_number(v.semantic_score));
  out.append(", \"quality\": ").append(format_score_number(v.quality_score));
  out.append("}").append(kScoreClose);
  out.append("\n").append(kAnswerOpen).append(v.refined_instruction).append(kAnswerClose);
  return out;
}

namespace {

// At most this many candidate '{' positions are tried before giving up, which
// bounds total work on adversarial brace floods.
constexpr int kMaxExpertCandidates = 256;

// Returns the end position (one past '}') of the balanced JSON object starting
// at `start`, honoring string literals and escapes, or npos.
std::size_t balanced_object_end(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
      if (depth == 0) return i + 1;
      if (depth < 0) return std::string_view::npos;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::string_view expert_parse_error_name(ExpertParseError e) {
  switch (e) {
    case ExpertParseError::kNoJsonObject: return "no-json-object";
    case ExpertParseError::kInvariantViolated: return "invariant-violated";
  }
  return "unknown";
}

ExpertParse parse_expert_output(std::string_view raw) {
  int attempts = 0;
  std::size_t pos = raw.find('{');
  while (pos != std::string_view::npos && attempts < kMaxExpertCandidates) {
    ++attempts;
    const std::size_t end = balanced_object_end(raw, pos);
    if (end != std::string_view::npos) {
      const auto parsed = nlohmann::json::parse(raw.substr(pos, end - pos), nullptr,
                                                /*allow_exceptions=*/false);
      if (parsed.is_object() && parsed.contains("is_satisfied") &&
          parsed["is_satisfied"].is_boolean()) {
        // First candidate found; the decision is made here, good or bad.
        ExpertVerdict verdict;
        verdict.is_satisfied = parsed["is_satisfied"].get<bool>();
        if (parsed.contains("reason") && parsed["reason"].is_string())
          verdict.reason = parsed["reason"].get<std::string>();

        const auto it = parsed.find("new_rewritten_prompt");
        const bool has_prompt = it != parsed.end() && !it->is_null();
        if (has_prompt && !it->is_string())
          return {std::nullopt, ExpertParseError::kInvariantViolated};
        if (verdict.is_satisfied == has_prompt)
          return {std::nullopt, ExpertParseError::kInvariantViolated};
        if (has_prompt) {
          std::string prompt = trim(it->get<std::string>());
          if (prompt.empty())
            return {std::nullopt, ExpertParseError::kInvariantViolated};
          verdict.rewritten_prompt = std::move(prompt);
        }
        return {std::move(verdict), std::nullopt};
      }
    }
    pos = raw.find('{', pos + 1);
  }
  return {std::nullopt, ExpertParseError::kNoJsonObject};
}

std::string serialize_expert_output(const ExpertVerdict& v) {
  nlohmann::json j;
  j["is_satisfied"] = v.is_satisfied;
  j["reason"] = v.reason;
  if (v.rewritten_prompt)
    j["new_rewritten_prompt"] = *v.rewritten_prompt;
  else
    j["new_rewritten_prompt"] = nullptr;
  return j.dump();
}

}  // namespace editloop
