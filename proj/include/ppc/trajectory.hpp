#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ppc {

// A completion split into its three tagged segments. `raw` is provenance only
// and does not take part in equality.
struct Trajectory {
  std::string preplan;
  std::string plan;
  std::string execute;
  std::optional<std::string> boxed_answer;
  std::string raw;

  bool operator==(const Trajectory& other) const {
    return preplan == other.preplan && plan == other.plan && execute == other.execute &&
           boxed_answer == other.boxed_answer;
  }
};

enum class Violation {
  MissingTag,
  DuplicateTag,
  OutOfOrder,
  NoBoxed,
  TrailingText,
  ForeignTag,
};

std::string_view to_string(Violation v);

struct FormatVerdict {
  bool well_formed = true;
  std::vector<Violation> violations;  // document order
};

class MalformedTrajectory : public std::runtime_error {
 public:
  explicit MalformedTrajectory(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class UnbalancedBraces : public std::runtime_error {
 public:
  explicit UnbalancedBraces(std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Structural guard: each tag exactly once, preplan < plan < execute, a boxed
// answer inside execute, nothing but whitespace outside the blocks and no tags
// other than the three allowed ones.
FormatVerdict check_format(std::string_view text);

// Throws MalformedTrajectory whenever check_format(text) is not well formed.
Trajectory parse_trajectory(std::string_view text);

// Brace-balanced content of the last \boxed{...}. Escaped braces (\{ \}) are
// literal. Throws UnbalancedBraces if the last marker never closes.
std::optional<std::string> extract_boxed(std::string_view text);

// Like extract_boxed but maps an unbalanced marker to "no answer".
std::optional<std::string> extract_boxed_lenient(std::string_view text) noexcept;

// Canonical form:
//   <preplan>\n...\n</preplan>\n<plan>\n...\n</plan>\n<execute>\n...\n</execute>
// Throws std::invalid_argument when the result would not pass check_format
// (a segment carrying a tag, or an execute without a boxed answer).
std::string render_trajectory(const Trajectory& t);

std::string trim(std::string_view s);

// Whitespace-delimited token count, used for length bounds and token stats.
std::size_t count_tokens(std::string_view text);

void to_json(nlohmann::json& j, const Trajectory& t);
void from_json(const nlohmann::json& j, Trajectory& t);

}  // namespace ppc
