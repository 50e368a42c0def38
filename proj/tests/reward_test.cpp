#include <doctest.h>

#include "ppc/reward.hpp"

using namespace ppc;

namespace {

FormatVerdict fmt(bool ok) {
  FormatVerdict v;
  v.well_formed = ok;
  if (!ok) v.violations = {Violation::NoBoxed};
  return v;
}

SpoilerReport spoiler(int s) {
  SpoilerReport r;
  r.score = s;
  return r;
}

}  // namespace

TEST_CASE("outcome reward") {
  CHECK(outcome_reward(true, std::nullopt) == 1.0);
  CHECK(outcome_reward(true, 2) == 1.0);
  CHECK(outcome_reward(false, 5) == 0.5);
  CHECK(outcome_reward(false, 3) == 0.25);
  CHECK(outcome_reward(false, 1) == 0.0);
  CHECK_THROWS_AS(outcome_reward(false, std::nullopt), MissingProximity);
  CHECK_THROWS_AS(outcome_reward(false, 6), OutOfRangeGrade);
  for (int j = 1; j <= 5; ++j) CHECK(proximity_credit(j) == (j - 1) / 8.0);
}

TEST_CASE("adherence reward") {
  CHECK(adherence_reward(5) == 1.0);
  CHECK(adherence_reward(1) == 0.0);
  CHECK(adherence_reward(3) == 0.5);
  CHECK_THROWS_AS(adherence_reward(0), OutOfRangeGrade);
  CHECK_THROWS_AS(adherence_reward(6), OutOfRangeGrade);
}

TEST_CASE("composite examples") {
  const auto best = composite_reward(true, std::nullopt, 5, fmt(true), spoiler(0));
  CHECK(best.total == 1.4);
  CHECK(best.correct);

  const auto mid = composite_reward(false, 3, 3, fmt(true), spoiler(4));
  CHECK(mid.r_out == 0.25);
  CHECK(mid.r_adh_raw == 0.5);
  CHECK(mid.r_sty_raw == 2.0);
  CHECK(mid.total == doctest::Approx(0.40).epsilon(1e-15));

  const auto worst = composite_reward(false, 1, 1, fmt(false), spoiler(6));
  CHECK(worst.total == -0.4);
}

TEST_CASE("judge failure maps to the minimum grade") {
  CHECK(grade_or_minimum(std::nullopt) == 1);
  CHECK(grade_or_minimum(4) == 4);
}

TEST_CASE("weights validation and json") {
  RewardWeights w;
  CHECK(w.lambda_a == 0.1);
  CHECK(w.lambda_f == 0.3);
  CHECK(w.lambda_s == 0.1);
  CHECK(w.tau_s == 2);
  w.lambda_a = 0.0;
  CHECK_THROWS(w.validate());
  const auto back = reward_weights_from_json(to_json(RewardWeights{}));
  CHECK(to_json(back) == to_json(RewardWeights{}));
  CHECK_THROWS(reward_weights_from_json({{"lambda_s", -1.0}}));
}

TEST_CASE("exhaustive sweep of 700 component combinations") {
  const RewardWeights w;
  int combos = 0;
  for (bool correct : {true, false}) {
    for (int prox = 1; prox <= 5; ++prox) {
      for (int adh = 1; adh <= 5; ++adh) {
        for (bool ok : {true, false}) {
          for (int s = 0; s <= 6; ++s) {
            ++combos;
            const auto b = composite_reward(correct, prox, adh, fmt(ok), spoiler(s), w);
            CHECK(b.total >= -0.4);
            CHECK(b.total <= 1.4);
            CHECK(b.r_adh_raw >= 0.0);
            CHECK(b.r_adh_raw <= 1.0);
            CHECK((b.r_fmt == 0.0 || b.r_fmt == 1.0));
            CHECK(b.r_sty_raw >= 0.0);
            CHECK(b.r_sty_raw <= 4.0);
            if (correct) {
              CHECK(b.r_out == 1.0);
            } else {
              CHECK(b.r_out >= 0.0);
              CHECK(b.r_out <= 0.5);
            }
            // Guards never move the outcome or adherence terms.
            const auto other = composite_reward(correct, prox, adh, fmt(!ok), spoiler(6 - s), w);
            CHECK(other.r_out == b.r_out);
            CHECK(other.r_adh_raw == b.r_adh_raw);
            // The identity holds up to one rounding step.
            const double expected =
                b.r_out + w.lambda_a * b.r_adh_raw + w.lambda_f * b.r_fmt - w.lambda_s * b.r_sty_raw;
            CHECK(b.total == doctest::Approx(expected).epsilon(1e-15));
          }
        }
      }
    }
  }
  CHECK(combos == 700);
}
