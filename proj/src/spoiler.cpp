#include "ppc/spoiler.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace ppc {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Number of UTF-8 code points.
std::size_t char_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Whole-word occurrence: "results in" does not fire inside "results into".
bool contains_word(std::string_view text, std::string_view needle) {
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + 1)) {
    const std::size_t end = pos + needle.size();
    const bool left = pos == 0 || !word_char(needle.front()) || !word_char(text[pos - 1]);
    const bool right = end == text.size() || !word_char(needle.back()) || !word_char(text[end]);
    if (left && right) return true;
  }
  return false;
}

std::vector<std::string> phrase_hits(const std::string& lowered,
                                     const std::vector<std::string>& phrases) {
  std::vector<std::string> hits;
  for (const auto& phrase : phrases) {
    if (phrase.empty()) continue;
    if (contains_word(lowered, lowercase(phrase))) hits.push_back(phrase);
  }
  return hits;
}

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

std::string_view to_string(SpoilerSignal s) {
  switch (s) {
    case SpoilerSignal::DerivationPhrasing: return "derivation_phrasing";
    case SpoilerSignal::EquationDensity: return "equation_density";
    case SpoilerSignal::LongMathSpans: return "long_math_spans";
    case SpoilerSignal::MultidigitConstant: return "multidigit_constant";
    case SpoilerSignal::AnswerPhrasing: return "answer_phrasing";
    case SpoilerSignal::MathSpanCount: return "math_span_count";
  }
  return "unknown";
}

void SpoilerConfig::validate() const {
  if (derivation_phrases.empty() || answer_phrases.empty()) {
    throw std::invalid_argument("spoiler phrase lists must be non-empty");
  }
  for (int v : {equality_threshold, long_span_min_chars, long_span_min_count, digit_min,
                span_count_threshold, tau_s}) {
    if (v < 1) throw std::invalid_argument("spoiler thresholds must be >= 1");
  }
}

std::vector<MathSpan> find_math_spans(std::string_view text) {
  std::vector<MathSpan> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\\' && i + 1 < text.size() && text[i + 1] == '$') {
      i += 2;
      continue;
    }
    if (c != '$') {
      ++i;
      continue;
    }
    const bool display = i + 1 < text.size() && text[i + 1] == '$';
    const std::size_t open_len = display ? 2 : 1;
    const std::size_t body = i + open_len;
    // Find the matching closer, skipping escaped dollars.
    std::size_t j = body;
    std::size_t close = std::string_view::npos;
    while (j < text.size()) {
      if (text[j] == '\\' && j + 1 < text.size() && text[j + 1] == '$') {
        j += 2;
        continue;
      }
      if (text[j] == '$' && (!display || (j + 1 < text.size() && text[j + 1] == '$'))) {
        close = j;
        break;
      }
      ++j;
    }
    if (close == std::string_view::npos) break;
    spans.push_back({i, std::string(text.substr(body, close - body)), display});
    i = close + open_len;
  }
  return spans;
}

SpoilerReport spoiler_score(std::string_view preplan, const SpoilerConfig& cfg) {
  SpoilerReport r;
  auto set = [&r](SpoilerSignal s, std::vector<std::string> evidence) {
    const auto idx = static_cast<std::size_t>(s);
    r.signals[idx] = !evidence.empty();
    r.evidence[idx] = std::move(evidence);
  };
  const std::string lowered = lowercase(preplan);

  set(SpoilerSignal::DerivationPhrasing, phrase_hits(lowered, cfg.derivation_phrases));
  set(SpoilerSignal::AnswerPhrasing, phrase_hits(lowered, cfg.answer_phrases));

  // \equiv is counted (and masked) first so it is never double counted.
  {
    std::string masked(preplan);
    const std::size_t equivs = count_occurrences(masked, "\\equiv");
    for (auto pos = masked.find("\\equiv"); pos != std::string::npos;
         pos = masked.find("\\equiv", pos)) {
      masked.replace(pos, 6, 6, ' ');
    }
    const std::size_t equals = count_occurrences(masked, "=");
    std::vector<std::string> ev;
    if (equals + equivs >= static_cast<std::size_t>(cfg.equality_threshold)) {
      ev.push_back(std::to_string(equals) + " '=' + " + std::to_string(equivs) + " '\\equiv'");
    }
    set(SpoilerSignal::EquationDensity, std::move(ev));
  }

  {
    const auto spans = find_math_spans(preplan);
    std::vector<std::string> long_spans;
    for (const auto& s : spans) {
      if (char_length(s.content) >= static_cast<std::size_t>(cfg.long_span_min_chars)) {
        long_spans.push_back(s.content);
      }
    }
    if (long_spans.size() < static_cast<std::size_t>(cfg.long_span_min_count)) long_spans.clear();
    set(SpoilerSignal::LongMathSpans, std::move(long_spans));

    std::vector<std::string> all;
    if (spans.size() >= static_cast<std::size_t>(cfg.span_count_threshold)) {
      for (const auto& s : spans) all.push_back(s.content);
    }
    set(SpoilerSignal::MathSpanCount, std::move(all));
  }

  {
    std::vector<std::string> constants;
    std::size_t i = 0;
    while (i < preplan.size()) {
      if (!is_digit(preplan[i])) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < preplan.size() && is_digit(preplan[j])) ++j;
      const bool left_ok = i == 0 || !is_alnum(preplan[i - 1]);
      const bool right_ok = j == preplan.size() || !is_alnum(preplan[j]);
      if (left_ok && right_ok && j - i >= static_cast<std::size_t>(cfg.digit_min)) {
        constants.emplace_back(preplan.substr(i, j - i));
      }
      i = j;
    }
    set(SpoilerSignal::MultidigitConstant, std::move(constants));
  }

  r.score = static_cast<int>(std::count(r.signals.begin(), r.signals.end(), true));
  return r;
}

double style_penalty(int score, int tau_s) {
  if (score < 0 || score > static_cast<int>(kSpoilerSignalCount)) {
    throw std::invalid_argument("spoiler score out of range: " + std::to_string(score));
  }
  return static_cast<double>(std::max(0, score - tau_s));
}

std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::Spoiler: return "SPOILER";
    case DropReason::NoAnswer: return "NO_ANSWER";
    case DropReason::WrongAnswer: return "WRONG_ANSWER";
    case DropReason::TooShort: return "TOO_SHORT";
    case DropReason::TooLong: return "TOO_LONG";
    case DropReason::BadFormat: return "BAD_FORMAT";
    case DropReason::GenFail: return "GEN_FAIL";
  }
  return "UNKNOWN";
}

std::optional<DropReason> drop_reason_from_string(std::string_view s) {
  for (auto r : {DropReason::Spoiler, DropReason::NoAnswer, DropReason::WrongAnswer,
                 DropReason::TooShort, DropReason::TooLong, DropReason::BadFormat,
                 DropReason::GenFail}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

FilterDecision filter_decision(const Trajectory& t, const std::string& gold,
                               const SpoilerConfig& cfg, const LengthBounds& bounds,
                               const AnswerEquivalence& equivalence) {
  FilterDecision d;
  d.spoiler = spoiler_score(t.preplan, cfg);
  auto drop = [&d](DropReason r) {
    d.keep = false;
    d.reason = r;
    return d;
  };
  if (d.spoiler.score > cfg.tau_s) return drop(DropReason::Spoiler);
  if (!t.boxed_answer) return drop(DropReason::NoAnswer);
  if (!equivalence(*t.boxed_answer, gold)) return drop(DropReason::WrongAnswer);
  const std::size_t len = count_tokens(t.preplan);
  if (len < bounds.min_tokens) return drop(DropReason::TooShort);
  if (len > bounds.max_tokens) return drop(DropReason::TooLong);
  d.keep = true;
  return d;
}

nlohmann::json to_json(const SpoilerReport& r) {
  nlohmann::json signals = nlohmann::json::object();
  nlohmann::json evidence = nlohmann::json::object();
  for (std::size_t i = 0; i < kSpoilerSignalCount; ++i) {
    const std::string name(to_string(static_cast<SpoilerSignal>(i)));
    signals[name] = r.signals[i];
    if (r.signals[i]) evidence[name] = r.evidence[i];
  }
  return {{"score", r.score}, {"signals", signals}, {"evidence", evidence}};
}

nlohmann::json to_json(const SpoilerConfig& c) {
  return {{"derivation_phrases", c.derivation_phrases},
          {"answer_phrases", c.answer_phrases},
          {"equality_threshold", c.equality_threshold},
          {"long_span_min_chars", c.long_span_min_chars},
          {"long_span_min_count", c.long_span_min_count},
          {"digit_min", c.digit_min},
          {"span_count_threshold", c.span_count_threshold},
          {"tau_s", c.tau_s}};
}

SpoilerConfig spoiler_config_from_json(const nlohmann::json& j) {
  SpoilerConfig c;
  c.derivation_phrases = j.value("derivation_phrases", c.derivation_phrases);
  c.answer_phrases = j.value("answer_phrases", c.answer_phrases);
  c.equality_threshold = j.value("equality_threshold", c.equality_threshold);
  c.long_span_min_chars = j.value("long_span_min_chars", c.long_span_min_chars);
  c.long_span_min_count = j.value("long_span_min_count", c.long_span_min_count);
  c.digit_min = j.value("digit_min", c.digit_min);
  c.span_count_threshold = j.value("span_count_threshold", c.span_count_threshold);
  c.tau_s = j.value("tau_s", c.tau_s);
  c.validate();
  return c;
}

}  // namespace ppc
