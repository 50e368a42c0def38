#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppc/trajectory.hpp"

namespace ppc {

enum class SpoilerSignal : std::size_t {
  DerivationPhrasing = 0,
  EquationDensity,
  LongMathSpans,
  MultidigitConstant,
  AnswerPhrasing,
  MathSpanCount,
};

inline constexpr std::size_t kSpoilerSignalCount = 6;

std::string_view to_string(SpoilerSignal s);

struct SpoilerConfig {
  std::vector<std::string> derivation_phrases = {
      "simplifies to", "reduces to",   "leads to",      "results in",
      "yields",        "gives us",     "implies that",  "becomes",
      "transforms to", "evaluates to", "rewrites as"};
  std::vector<std::string> answer_phrases = {"the answer", "the result is", "we get",
                                             "we obtain"};
  int equality_threshold = 3;
  int long_span_min_chars = 30;
  int long_span_min_count = 2;
  int digit_min = 3;
  int span_count_threshold = 4;
  int tau_s = 2;

  // Throws std::invalid_argument on a threshold < 1 or an empty phrase list.
  void validate() const;
};

struct SpoilerReport {
  int score = 0;
  std::array<bool, kSpoilerSignalCount> signals{};
  std::array<std::vector<std::string>, kSpoilerSignalCount> evidence;

  bool fired(SpoilerSignal s) const { return signals[static_cast<std::size_t>(s)]; }
};

// A $...$ or $$...$$ span; `content` excludes the delimiters.
struct MathSpan {
  std::size_t offset = 0;
  std::string content;
  bool display = false;
};

// Non-greedy inline math spans. "$$" always opens display math; \$ is a
// literal dollar; an unterminated opener leaves the remainder as prose.
std::vector<MathSpan> find_math_spans(std::string_view text);

SpoilerReport spoiler_score(std::string_view preplan, const SpoilerConfig& cfg = {});

// R_sty before weighting: max(0, score - tau_s).
double style_penalty(int score, int tau_s);

struct LengthBounds {
  std::size_t min_tokens = 150;
  std::size_t max_tokens = 1500;
};

enum class DropReason {
  Spoiler,
  NoAnswer,
  WrongAnswer,
  TooShort,
  TooLong,
  BadFormat,
  GenFail,
};

std::string_view to_string(DropReason r);
std::optional<DropReason> drop_reason_from_string(std::string_view s);

struct FilterDecision {
  bool keep = false;
  std::optional<DropReason> reason;
  SpoilerReport spoiler;
};

using AnswerEquivalence = std::function<bool(const std::string& pred, const std::string& gold)>;

// Purity first, then answer, then preplan length. A missing boxed answer is
// reported as NO_ANSWER at the answer step.
FilterDecision filter_decision(const Trajectory& t, const std::string& gold,
                               const SpoilerConfig& cfg, const LengthBounds& bounds,
                               const AnswerEquivalence& equivalence);

nlohmann::json to_json(const SpoilerReport& r);
nlohmann::json to_json(const SpoilerConfig& c);
SpoilerConfig spoiler_config_from_json(const nlohmann::json& j);

}  // namespace ppc
