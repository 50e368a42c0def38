#include "ppc/answer.hpp"

#include <cctype>
#include <regex>

#include "ppc/log.hpp"
#include "ppc/trajectory.hpp"

namespace ppc {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = true;
      continue;
    }
    if (pending && !out.empty()) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

// True when s[0] == '{' and its matching brace is the last character.
bool outer_braces_match(std::string_view s) {
  if (s.size() < 2 || s.front() != '{' || s.back() != '}') return false;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      continue;
    }
    if (s[i] == '{') ++depth;
    if (s[i] == '}' && --depth == 0) return i == s.size() - 1;
  }
  return false;
}

bool is_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::string strip_leading_zeros(std::string_view s) {
  std::string_view sign;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    sign = s.front() == '-' ? "-" : "";
    s.remove_prefix(1);
  }
  if (!is_digits(s)) return {};
  const auto nz = s.find_first_not_of('0');
  std::string digits = nz == std::string_view::npos ? "0" : std::string(s.substr(nz));
  if (digits == "0") return digits;
  return std::string(sign) + digits;
}

std::optional<Rational> parse_decimal(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  const auto dot = s.find('.');
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  if ((!whole.empty() && !is_digits(whole)) || (!frac.empty() && !is_digits(frac))) {
    return std::nullopt;
  }
  if (dot != std::string_view::npos && frac.empty() && whole.empty()) return std::nullopt;
  using boost::multiprecision::cpp_int;
  cpp_int num(whole.empty() ? std::string("0") : std::string(whole));
  cpp_int den = 1;
  for (char c : frac) {
    num = num * 10 + (c - '0');
    den *= 10;
  }
  Rational r(num, den);
  return negative ? Rational(-r) : r;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string s = collapse_whitespace(trim(text));
  while (s.size() >= 2 && s.front() == '$' && s.back() == '$') s = trim(s.substr(1, s.size() - 2));
  replace_all(s, "\\left", "");
  replace_all(s, "\\right", "");
  replace_all(s, "\\dfrac", "\\frac");
  replace_all(s, "\\tfrac", "\\frac");
  if (outer_braces_match(s)) s = trim(s.substr(1, s.size() - 2));
  if (auto canonical = strip_leading_zeros(s); !canonical.empty()) return canonical;
  return s;
}

std::optional<Rational> parse_rational(std::string_view s) {
  static const std::regex frac_re(R"(^([+-]?)\\frac\{([^{}]+)\}\{([^{}]+)\}$)");
  static const std::regex slash_re(R"(^([^/]+)/([^/]+)$)");
  std::string str(s);
  std::smatch m;
  auto ratio = [](std::string_view num, std::string_view den,
                  bool negate) -> std::optional<Rational> {
    const auto n = parse_decimal(trim(num));
    const auto d = parse_decimal(trim(den));
    if (!n || !d || *d == 0) return std::nullopt;
    Rational r = *n / *d;
    return negate ? Rational(-r) : r;
  };
  if (std::regex_match(str, m, frac_re)) return ratio(m[2].str(), m[3].str(), m[1].str() == "-");
  if (std::regex_match(str, m, slash_re)) return ratio(m[1].str(), m[2].str(), false);
  return parse_decimal(str);
}

bool answers_equivalent(std::string_view pred, std::string_view gold,
                        const EquivalenceJudge& fallback) {
  const std::string p = normalize_answer(pred);
  const std::string g = normalize_answer(gold);
  if (p == g) return true;
  const auto pv = parse_rational(p);
  const auto gv = parse_rational(g);
  if (pv && gv) return *pv == *gv;
  if (!fallback) return false;
  try {
    return fallback(p, g);
  } catch (const std::exception& e) {
    log::warn("equivalence judge failed; treating as not equivalent", {{"error", e.what()}});
    return false;
  }
}

}  // namespace ppc
