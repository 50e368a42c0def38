#pragma once

#include <optional>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ppc/spoiler.hpp"
#include "ppc/trajectory.hpp"

namespace ppc {

struct RewardWeights {
  double lambda_a = 0.1;
  double lambda_f = 0.3;
  double lambda_s = 0.1;
  int tau_s = 2;

  void validate() const;
};

// Unweighted raw terms are kept so weights can be swept without re-judging.
struct RewardBreakdown {
  double r_out = 0.0;
  double r_adh_raw = 0.0;
  double r_fmt = 0.0;
  double r_sty_raw = 0.0;
  double total = 0.0;
  bool correct = false;
};

class MissingProximity : public std::invalid_argument {
 public:
  MissingProximity() : std::invalid_argument("incorrect answer requires a proximity grade") {}
};

class OutOfRangeGrade : public std::invalid_argument {
 public:
  explicit OutOfRangeGrade(int grade)
      : std::invalid_argument("judge grade out of range 1..5: " + std::to_string(grade)) {}
};

// Partial-credit map for incorrect answers: (j - 1) / 8, in [0, 0.5].
double proximity_credit(int grade);

double outcome_reward(bool correct, std::optional<int> proximity);

// (grade - 1) / 4, in [0, 1].
double adherence_reward(int grade);

// Guard terms are summed first, then added to r_out. Evaluating in this order
// keeps every default-weight total inside [-0.4, 1.4] in binary64.
double combine_terms(double r_out, double r_adh_raw, double r_fmt, double r_sty_raw,
                     const RewardWeights& w);

RewardBreakdown composite_reward(bool correct, std::optional<int> proximity, int adherence_grade,
                                 const FormatVerdict& fmt, const SpoilerReport& spoiler,
                                 const RewardWeights& w = {});

// Judge failures (network, unparseable grade) resolve to the minimum grade.
inline int grade_or_minimum(std::optional<int> grade) { return grade.value_or(1); }

nlohmann::json to_json(const RewardBreakdown& b);
nlohmann::json to_json(const RewardWeights& w);
RewardWeights reward_weights_from_json(const nlohmann::json& j);

}  // namespace ppc
