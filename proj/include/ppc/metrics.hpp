#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppc/spoiler.hpp"

namespace ppc {

using MaybeAnswer = std::optional<std::string>;

// Equivalence classes by first-match linkage against each class's first
// member, in input order. Absent answers join no class. Returns the index of
// each answer's class (-1 for absent) and the class representatives.
struct AnswerClasses {
  std::vector<int> class_of;
  std::vector<std::size_t> representative;  // index into answers
  std::vector<int> size;
};

AnswerClasses group_answers(const std::vector<MaybeAnswer>& answers, const AnswerEquivalence& eq);

// Largest class wins; ties go to the class that appeared first.
bool maj_at_k(const std::vector<MaybeAnswer>& answers, const std::string& gold,
              const AnswerEquivalence& eq);
bool pass_at_k(const std::vector<MaybeAnswer>& answers, const std::string& gold,
               const AnswerEquivalence& eq);

struct TokenStats {
  std::vector<std::size_t> counts;
  std::optional<double> mean;  // n/a for an empty list
};

TokenStats token_stats(const std::vector<std::string>& completions);

// "3.47" style thousands with two decimals, or "n/a".
std::string format_thousands(std::optional<double> mean);
std::string format_percent(double pct);

}  // namespace ppc
