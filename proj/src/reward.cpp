#include "ppc/reward.hpp"

namespace ppc {

namespace {

void check_grade(int grade) {
  if (grade < 1 || grade > 5) throw OutOfRangeGrade(grade);
}

}  // namespace

void RewardWeights::validate() const {
  if (!(lambda_a > 0.0) || !(lambda_f > 0.0) || !(lambda_s > 0.0)) {
    throw std::invalid_argument("reward weights must be positive");
  }
  if (tau_s < 1) throw std::invalid_argument("tau_s must be >= 1");
}

double proximity_credit(int grade) {
  check_grade(grade);
  return static_cast<double>(grade - 1) / 8.0;
}

double outcome_reward(bool correct, std::optional<int> proximity) {
  if (correct) return 1.0;
  if (!proximity) throw MissingProximity();
  return proximity_credit(*proximity);
}

double adherence_reward(int grade) {
  check_grade(grade);
  return static_cast<double>(grade - 1) / 4.0;
}

double combine_terms(double r_out, double r_adh_raw, double r_fmt, double r_sty_raw,
                     const RewardWeights& w) {
  const double shaping = w.lambda_a * r_adh_raw + w.lambda_f * r_fmt - w.lambda_s * r_sty_raw;
  return r_out + shaping;
}

RewardBreakdown composite_reward(bool correct, std::optional<int> proximity, int adherence_grade,
                                 const FormatVerdict& fmt, const SpoilerReport& spoiler,
                                 const RewardWeights& w) {
  RewardBreakdown b;
  b.correct = correct;
  b.r_out = outcome_reward(correct, proximity);
  b.r_adh_raw = adherence_reward(adherence_grade);
  b.r_fmt = fmt.well_formed ? 1.0 : 0.0;
  b.r_sty_raw = style_penalty(spoiler.score, w.tau_s);
  b.total = combine_terms(b.r_out, b.r_adh_raw, b.r_fmt, b.r_sty_raw, w);
  return b;
}

nlohmann::json to_json(const RewardBreakdown& b) {
  return {{"r_out", b.r_out},     {"r_adh_raw", b.r_adh_raw}, {"r_fmt", b.r_fmt},
          {"r_sty_raw", b.r_sty_raw}, {"total", b.total},     {"correct", b.correct}};
}

nlohmann::json to_json(const RewardWeights& w) {
  return {{"lambda_a", w.lambda_a}, {"lambda_f", w.lambda_f}, {"lambda_s", w.lambda_s},
          {"tau_s", w.tau_s}};
}

RewardWeights reward_weights_from_json(const nlohmann::json& j) {
  RewardWeights w;
  w.lambda_a = j.value("lambda_a", w.lambda_a);
  w.lambda_f = j.value("lambda_f", w.lambda_f);
  w.lambda_s = j.value("lambda_s", w.lambda_s);
  w.tau_s = j.value("tau_s", w.tau_s);
  w.validate();
  return w;
}

}  // namespace ppc
