#include "ppc/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace ppc {

namespace {

constexpr std::string_view kBoxed = "\\boxed{";
constexpr std::string_view kWhitespace = " \t\n\r\f\v";
constexpr std::array<std::string_view, 3> kTagNames = {"preplan", "plan", "execute"};

struct TagToken {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past '>'
  std::string_view name;
  bool closing = false;
};

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

// Every <name> or </name> token in the text.
std::vector<TagToken> scan_tags(std::string_view text) {
  std::vector<TagToken> tags;
  std::size_t pos = 0;
  while ((pos = text.find('<', pos)) != std::string_view::npos) {
    std::size_t i = pos + 1;
    bool closing = false;
    if (i < text.size() && text[i] == '/') {
      closing = true;
      ++i;
    }
    if (i >= text.size() || !is_name_start(text[i])) {
      ++pos;
      continue;
    }
    const std::size_t name_begin = i;
    while (i < text.size() && is_name_char(text[i])) ++i;
    if (i >= text.size() || text[i] != '>') {
      ++pos;
      continue;
    }
    tags.push_back({pos, i + 1, text.substr(name_begin, i - name_begin), closing});
    pos = i + 1;
  }
  return tags;
}

int tag_index(std::string_view name) {
  for (std::size_t i = 0; i < kTagNames.size(); ++i) {
    if (kTagNames[i] == name) return static_cast<int>(i);
  }
  return -1;
}

bool all_whitespace(std::string_view s) {
  return s.find_first_not_of(kWhitespace) == std::string_view::npos;
}

struct Located {
  std::vector<std::pair<std::size_t, Violation>> found;
  // Inner [begin, end) of each segment, valid only when the layout is clean.
  std::array<std::pair<std::size_t, std::size_t>, 3> inner{};
};

// Core of the guard; also yields segment offsets for the parser.
Located locate(std::string_view text) {
  Located out;
  auto flag = [&](std::size_t at, Violation v) { out.found.emplace_back(at, v); };

  const auto tags = scan_tags(text);

  // Events for the allowed tags: index*2 for open, index*2+1 for close.
  std::array<std::vector<std::size_t>, 6> seen;
  std::vector<std::pair<std::size_t, int>> events;
  for (const auto& tag : tags) {
    const int idx = tag_index(tag.name);
    if (idx < 0) {
      flag(tag.begin, Violation::ForeignTag);
      continue;
    }
    const int ev = idx * 2 + (tag.closing ? 1 : 0);
    seen[static_cast<std::size_t>(ev)].push_back(tag.begin);
    events.emplace_back(tag.begin, ev);
  }

  bool complete = true;
  for (std::size_t idx = 0; idx < 3; ++idx) {
    const auto& opens = seen[idx * 2];
    const auto& closes = seen[idx * 2 + 1];
    if (opens.empty() || closes.empty()) {
      flag(text.size(), Violation::MissingTag);
      complete = false;
    }
    if (opens.size() > 1 || closes.size() > 1) {
      const std::size_t second = std::min(opens.size() > 1 ? opens[1] : text.size(),
                                          closes.size() > 1 ? closes[1] : text.size());
      flag(second, Violation::DuplicateTag);
      complete = false;
    }
  }

  // Order is checked among the events that occur exactly once.
  std::vector<std::pair<std::size_t, int>> singles;
  for (const auto& e : events) {
    if (seen[static_cast<std::size_t>(e.second)].size() == 1) singles.push_back(e);
  }
  bool ordered = true;
  for (std::size_t i = 1; i < singles.size(); ++i) {
    if (singles[i].second < singles[i - 1].second) {
      flag(singles[i].first, Violation::OutOfOrder);
      ordered = false;
      break;
    }
  }

  if (!complete || !ordered) return out;

  std::array<std::size_t, 6> at{};
  for (std::size_t ev = 0; ev < 6; ++ev) at[ev] = seen[ev].front();
  for (std::size_t idx = 0; idx < 3; ++idx) {
    const std::size_t open_end = at[idx * 2] + kTagNames[idx].size() + 2;
    out.inner[idx] = {open_end, at[idx * 2 + 1]};
  }

  // Stray text outside the blocks. Foreign tags are already reported, so only
  // the bytes between allowed tags are inspected here.
  const std::size_t close_len[3] = {kTagNames[0].size() + 3, kTagNames[1].size() + 3,
                                    kTagNames[2].size() + 3};
  std::array<std::pair<std::size_t, std::size_t>, 4> gaps = {{
      {0, at[0]},
      {at[1] + close_len[0], at[2]},
      {at[3] + close_len[1], at[4]},
      {at[5] + close_len[2], text.size()},
  }};
  for (const auto& [b, e] : gaps) {
    std::string_view gap = text.substr(b, e - b);
    // Strip foreign tags from the gap before the whitespace check.
    std::string rest;
    std::size_t cursor = 0;
    for (const auto& tag : tags) {
      if (tag.begin < b || tag.end > e) continue;
      rest.append(gap.substr(cursor, tag.begin - b - cursor));
      cursor = tag.end - b;
    }
    rest.append(gap.substr(std::min(cursor, gap.size())));
    if (!all_whitespace(rest)) {
      const std::size_t off = b + gap.find_first_not_of(kWhitespace);
      flag(off, Violation::TrailingText);
    }
  }

  const auto [eb, ee] = out.inner[2];
  if (!extract_boxed_lenient(text.substr(eb, ee - eb))) flag(at[5], Violation::NoBoxed);
  return out;
}

std::vector<Violation> ordered_codes(std::vector<std::pair<std::size_t, Violation>> found) {
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Violation> codes;
  codes.reserve(found.size());
  for (const auto& f : found) codes.push_back(f.second);
  return codes;
}

}  // namespace

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::MissingTag: return "MISSING_TAG";
    case Violation::DuplicateTag: return "DUPLICATE_TAG";
    case Violation::OutOfOrder: return "OUT_OF_ORDER";
    case Violation::NoBoxed: return "NO_BOXED";
    case Violation::TrailingText: return "TRAILING_TEXT";
    case Violation::ForeignTag: return "FOREIGN_TAG";
  }
  return "UNKNOWN";
}

MalformedTrajectory::MalformedTrajectory(std::vector<Violation> violations)
    : std::runtime_error("malformed trajectory: " +
                         std::string(violations.empty() ? "?" : to_string(violations.front()))),
      violations_(std::move(violations)) {}

UnbalancedBraces::UnbalancedBraces(std::size_t offset)
    : std::runtime_error("unbalanced braces in boxed marker at offset " + std::to_string(offset)),
      offset_(offset) {}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(kWhitespace);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kWhitespace);
  return std::string(s.substr(b, e - b + 1));
}

std::size_t count_tokens(std::string_view text) {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    const bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!ws && !in_token) ++n;
    in_token = !ws;
  }
  return n;
}

std::optional<std::string> extract_boxed(std::string_view text) {
  const std::size_t marker = text.rfind(kBoxed);
  if (marker == std::string_view::npos) return std::nullopt;
  const std::size_t start = marker + kBoxed.size();
  int depth = 1;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\\' && i + 1 < text.size() && (text[i + 1] == '{' || text[i + 1] == '}')) {
      ++i;
      continue;
    }
    if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return std::string(text.substr(start, i - start));
    }
  }
  throw UnbalancedBraces(marker);
}

std::optional<std::string> extract_boxed_lenient(std::string_view text) noexcept {
  try {
    return extract_boxed(text);
  } catch (...) {
    return std::nullopt;
  }
}

FormatVerdict check_format(std::string_view text) {
  FormatVerdict v;
  v.violations = ordered_codes(locate(text).found);
  v.well_formed = v.violations.empty();
  return v;
}

Trajectory parse_trajectory(std::string_view text) {
  auto located = locate(text);
  if (!located.found.empty()) throw MalformedTrajectory(ordered_codes(std::move(located.found)));
  auto segment = [&](std::size_t idx) {
    const auto [b, e] = located.inner[idx];
    return trim(text.substr(b, e - b));
  };
  Trajectory t;
  t.preplan = segment(0);
  t.plan = segment(1);
  t.execute = segment(2);
  t.boxed_answer = extract_boxed(t.execute);
  t.raw = std::string(text);
  return t;
}

std::string render_trajectory(const Trajectory& t) {
  std::string out;
  out.reserve(t.preplan.size() + t.plan.size() + t.execute.size() + 64);
  out += "<preplan>\n";
  out += trim(t.preplan);
  out += "\n</preplan>\n<plan>\n";
  out += trim(t.plan);
  out += "\n</plan>\n<execute>\n";
  out += trim(t.execute);
  out += "\n</execute>";
  const auto verdict = check_format(out);
  if (!verdict.well_formed) {
    throw std::invalid_argument("trajectory does not render to a well-formed completion: " +
                                std::string(to_string(verdict.violations.front())));
  }
  return out;
}

void to_json(nlohmann::json& j, const Trajectory& t) {
  j = nlohmann::json{{"preplan", t.preplan},
                     {"plan", t.plan},
                     {"execute", t.execute},
                     {"boxed_answer", t.boxed_answer ? nlohmann::json(*t.boxed_answer) : nlohmann::json(nullptr)},
                     {"raw", t.raw}};
}

void from_json(const nlohmann::json& j, Trajectory& t) {
  t.preplan = j.at("preplan").get<std::string>();
  t.plan = j.at("plan").get<std::string>();
  t.execute = j.at("execute").get<std::string>();
  const auto it = j.find("boxed_answer");
  if (it != j.end() && !it->is_null()) {
    t.boxed_answer = it->get<std::string>();
  } else {
    t.boxed_answer.reset();
  }
  t.raw = j.value("raw", std::string{});
}

}  // namespace ppc
