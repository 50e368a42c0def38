#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppc/client.hpp"
#include "ppc/trajectory.hpp"

namespace ppc {

enum class JudgeKind { Proximity, Adherence, Equivalence, Attribution };
enum class Facet { ProblemType, Tools, Constraints, Pitfalls };

std::string_view to_string(JudgeKind k);
std::string_view to_string(Facet f);

struct Attribution {
  bool is_what_to_solve = false;
  std::optional<Facet> facet;  // set iff is_what_to_solve

  bool operator==(const Attribution&) const = default;
};

struct JudgeVerdict {
  JudgeKind kind = JudgeKind::Proximity;
  std::optional<int> grade;             // proximity, adherence
  std::optional<bool> boolean_verdict;  // equivalence
  std::optional<Attribution> attribution;
  std::string raw_response;
};

class UnparseableVerdict : public std::runtime_error {
 public:
  UnparseableVerdict(JudgeKind kind, std::string raw)
      : std::runtime_error("unparseable " + std::string(to_string(kind)) + " verdict"),
        raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Last standalone integer in 1..5.
std::optional<int> parse_grade(std::string_view response);
// Last standalone YES or NO, case-insensitive.
std::optional<bool> parse_yes_no(std::string_view response);
// First {...} object in the response: {"what_to_solve": bool, "facet": ...}.
std::optional<Attribution> parse_attribution(std::string_view response);
std::optional<Facet> parse_facet(std::string_view name);

// Judges run at temperature 0 unless the role says otherwise.
Role judge_role(std::shared_ptr<LlmClient> client, RetryPolicy retry = {});

JudgeVerdict judge_proximity(const Role& judge, const std::string& question,
                             const Trajectory& trajectory, const std::string& gold);
JudgeVerdict judge_adherence(const Role& judge, const std::string& question,
                             const std::string& preplan, const std::string& plan);
// Never throws on an unparseable reply: that is a pessimistic "false".
JudgeVerdict judge_equivalence(const Role& judge, const std::string& pred, const std::string& gold,
                               const std::string& question);
JudgeVerdict attribute_error(const Role& judge, const std::string& question,
                             const std::string& wrong_solution, const std::string& gold);

nlohmann::json to_json(const JudgeVerdict& v);

struct AttributionCounts {
  int what_to_solve_total = 0;
  int how_to_solve_total = 0;
  int problem_type = 0;
  int tools = 0;
  int constraints = 0;
  int pitfalls = 0;
  int unparseable = 0;

  bool operator==(const AttributionCounts&) const = default;
};

// nullopt entries are unparseable verdicts; they are tallied, not classified.
AttributionCounts aggregate_attribution(const std::vector<std::optional<Attribution>>& verdicts);

nlohmann::json to_json(const AttributionCounts& c);

}  // namespace ppc
