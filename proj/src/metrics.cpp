#include "ppc/metrics.hpp"

#include <cstdio>

#include "ppc/trajectory.hpp"

namespace ppc {

AnswerClasses group_answers(const std::vector<MaybeAnswer>& answers, const AnswerEquivalence& eq) {
  AnswerClasses c;
  c.class_of.assign(answers.size(), -1);
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (!answers[i]) continue;
    for (std::size_t k = 0; k < c.representative.size(); ++k) {
      if (eq(*answers[i], *answers[c.representative[k]])) {
        c.class_of[i] = static_cast<int>(k);
        ++c.size[k];
        break;
      }
    }
    if (c.class_of[i] < 0) {
      c.class_of[i] = static_cast<int>(c.representative.size());
      c.representative.push_back(i);
      c.size.push_back(1);
    }
  }
  return c;
}

bool maj_at_k(const std::vector<MaybeAnswer>& answers, const std::string& gold,
              const AnswerEquivalence& eq) {
  const auto classes = group_answers(answers, eq);
  if (classes.representative.empty()) return false;
  std::size_t best = 0;
  for (std::size_t k = 1; k < classes.size.size(); ++k) {
    if (classes.size[k] > classes.size[best]) best = k;
  }
  return eq(*answers[classes.representative[best]], gold);
}

bool pass_at_k(const std::vector<MaybeAnswer>& answers, const std::string& gold,
               const AnswerEquivalence& eq) {
  for (const auto& a : answers) {
    if (a && eq(*a, gold)) return true;
  }
  return false;
}

TokenStats token_stats(const std::vector<std::string>& completions) {
  TokenStats s;
  std::size_t total = 0;
  for (const auto& c : completions) {
    s.counts.push_back(count_tokens(c));
    total += s.counts.back();
  }
  if (!completions.empty()) {
    s.mean = static_cast<double>(total) / static_cast<double>(completions.size());
  }
  return s;
}

std::string format_thousands(std::optional<double> mean) {
  if (!mean) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", *mean / 1000.0);
  return buf;
}

std::string format_percent(double pct) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", pct);
  return buf;
}

}  // namespace ppc
