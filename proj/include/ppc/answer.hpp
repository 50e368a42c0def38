#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace ppc {

using Rational = boost::multiprecision::cpp_rational;

// Rule pipeline: trim, collapse whitespace, strip surrounding $, drop
// \left/\right, \dfrac|\tfrac -> \frac, strip one redundant outer brace pair,
// integers lose leading zeros.
std::string normalize_answer(std::string_view text);

// Exact value of an integer, decimal, a/b or \frac{a}{b} (optionally signed).
std::optional<Rational> parse_rational(std::string_view normalized);

// Judge fallback: (pred, gold) -> equivalent?
using EquivalenceJudge = std::function<bool(const std::string& pred, const std::string& gold)>;

// Rule-based first; the judge is consulted only when the rules say no.
// A throwing judge counts as "not equivalent".
bool answers_equivalent(std::string_view pred, std::string_view gold,
                        const EquivalenceJudge& fallback = {});

}  // namespace ppc
