#include "ppc/judges.hpp"

#include <algorithm>
#include <cctype>

#include "ppc/log.hpp"
#include "ppc/prompts.hpp"

namespace ppc {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string ask(const Role& judge, JudgeKind kind, std::string prompt) {
  GenerationRequest req;
  req.user_prompt = std::move(prompt);
  req.purpose = "judge_" + std::string(to_string(kind));
  return judge.generate(std::move(req));
}

std::string solution_text(const Trajectory& t) {
  if (!t.raw.empty()) return t.raw;
  return t.preplan + "\n\n" + t.plan + "\n\n" + t.execute;
}

}  // namespace

std::string_view to_string(JudgeKind k) {
  switch (k) {
    case JudgeKind::Proximity: return "proximity";
    case JudgeKind::Adherence: return "adherence";
    case JudgeKind::Equivalence: return "equivalence";
    case JudgeKind::Attribution: return "attribution";
  }
  return "?";
}

std::string_view to_string(Facet f) {
  switch (f) {
    case Facet::ProblemType: return "problem_type";
    case Facet::Tools: return "tools";
    case Facet::Constraints: return "constraints";
    case Facet::Pitfalls: return "pitfalls";
  }
  return "?";
}

std::optional<int> parse_grade(std::string_view response) {
  std::optional<int> last;
  std::size_t i = 0;
  while (i < response.size()) {
    if (!std::isdigit(static_cast<unsigned char>(response[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < response.size() && std::isdigit(static_cast<unsigned char>(response[j]))) ++j;
    const bool standalone =
        (i == 0 || !is_alnum(response[i - 1])) && (j == response.size() || !is_alnum(response[j]));
    if (standalone && j - i == 1) {
      const int v = response[i] - '0';
      if (v >= 1 && v <= 5) last = v;
    }
    i = j;
  }
  return last;
}

std::optional<bool> parse_yes_no(std::string_view response) {
  const std::string up = upper(response);
  std::optional<bool> last;
  std::size_t i = 0;
  while (i < up.size()) {
    if (!std::isalpha(static_cast<unsigned char>(up[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < up.size() && std::isalpha(static_cast<unsigned char>(up[j]))) ++j;
    const std::string_view word(up.data() + i, j - i);
    if (word == "YES") last = true;
    if (word == "NO") last = false;
    i = j;
  }
  return last;
}

std::optional<Facet> parse_facet(std::string_view name) {
  std::string key;
  for (char c : upper(name)) {
    if (std::isalpha(static_cast<unsigned char>(c))) key.push_back(c);
  }
  if (key == "PROBLEMTYPE" || key == "TYPE") return Facet::ProblemType;
  if (key == "TOOLSCONCEPTS" || key == "TOOLS" || key == "CONCEPTS") return Facet::Tools;
  if (key == "CONSTRAINTS") return Facet::Constraints;
  if (key == "PITFALLS") return Facet::Pitfalls;
  return std::nullopt;
}

std::optional<Attribution> parse_attribution(std::string_view response) {
  const auto open = response.find('{');
  const auto close = response.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    return std::nullopt;
  }
  const auto j = nlohmann::json::parse(response.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  const auto it = j.find("what_to_solve");
  if (it == j.end() || !it->is_boolean()) return std::nullopt;
  Attribution a;
  a.is_what_to_solve = it->get<bool>();
  if (!a.is_what_to_solve) return a;
  const auto f = j.find("facet");
  if (f == j.end() || !f->is_string()) return std::nullopt;
  a.facet = parse_facet(f->get<std::string>());
  if (!a.facet) return std::nullopt;
  return a;
}

Role judge_role(std::shared_ptr<LlmClient> client, RetryPolicy retry) {
  Role r;
  r.client = std::move(client);
  r.retry = std::move(retry);
  r.sampling = {0.0, 1.0, 512};
  return r;
}

JudgeVerdict judge_proximity(const Role& judge, const std::string& question,
                             const Trajectory& trajectory, const std::string& gold) {
  JudgeVerdict v;
  v.kind = JudgeKind::Proximity;
  v.raw_response = ask(judge, v.kind,
                       prompts::fill(prompts::kProximity.text, {{"question", question},
                                                                {"gold", gold},
                                                                {"solution", solution_text(trajectory)}}));
  v.grade = parse_grade(v.raw_response);
  if (!v.grade) throw UnparseableVerdict(v.kind, v.raw_response);
  return v;
}

JudgeVerdict judge_adherence(const Role& judge, const std::string& question,
                             const std::string& preplan, const std::string& plan) {
  JudgeVerdict v;
  v.kind = JudgeKind::Adherence;
  v.raw_response = ask(
      judge, v.kind,
      prompts::fill(prompts::kAdherence.text,
                    {{"question", question}, {"preplan", preplan}, {"plan", plan}}));
  v.grade = parse_grade(v.raw_response);
  if (!v.grade) throw UnparseableVerdict(v.kind, v.raw_response);
  return v;
}

JudgeVerdict judge_equivalence(const Role& judge, const std::string& pred, const std::string& gold,
                               const std::string& question) {
  JudgeVerdict v;
  v.kind = JudgeKind::Equivalence;
  v.raw_response = ask(judge, v.kind,
                       prompts::fill(prompts::kEquivalence.text,
                                     {{"question", question}, {"pred", pred}, {"gold", gold}}));
  const auto parsed = parse_yes_no(v.raw_response);
  if (!parsed) log::warn("unparseable equivalence verdict; treating as NO", {{"raw", v.raw_response}});
  v.boolean_verdict = parsed.value_or(false);
  return v;
}

JudgeVerdict attribute_error(const Role& judge, const std::string& question,
                             const std::string& wrong_solution, const std::string& gold) {
  JudgeVerdict v;
  v.kind = JudgeKind::Attribution;
  v.raw_response = ask(judge, v.kind,
                       prompts::fill(prompts::kAttribution.text, {{"question", question},
                                                                  {"gold", gold},
                                                                  {"solution", wrong_solution}}));
  v.attribution = parse_attribution(v.raw_response);
  if (!v.attribution) throw UnparseableVerdict(v.kind, v.raw_response);
  return v;
}

nlohmann::json to_json(const JudgeVerdict& v) {
  nlohmann::json j = {{"kind", to_string(v.kind)}, {"raw_response", v.raw_response}};
  if (v.grade) j["grade"] = *v.grade;
  if (v.boolean_verdict) j["verdict"] = *v.boolean_verdict;
  if (v.attribution) {
    j["what_to_solve"] = v.attribution->is_what_to_solve;
    j["facet"] = v.attribution->facet ? nlohmann::json(to_string(*v.attribution->facet)) : nlohmann::json(nullptr);
  }
  return j;
}

AttributionCounts aggregate_attribution(const std::vector<std::optional<Attribution>>& verdicts) {
  AttributionCounts c;
  for (const auto& v : verdicts) {
    if (!v || (v->is_what_to_solve && !v->facet)) {
      ++c.unparseable;
      continue;
    }
    if (!v->is_what_to_solve) {
      ++c.how_to_solve_total;
      continue;
    }
    ++c.what_to_solve_total;
    switch (*v->facet) {
      case Facet::ProblemType: ++c.problem_type; break;
      case Facet::Tools: ++c.tools; break;
      case Facet::Constraints: ++c.constraints; break;
      case Facet::Pitfalls: ++c.pitfalls; break;
    }
  }
  return c;
}

nlohmann::json to_json(const AttributionCounts& c) {
  return {{"what_to_solve_total", c.what_to_solve_total},
          {"how_to_solve_total", c.how_to_solve_total},
          {"facets",
           {{"problem_type", c.problem_type},
            {"tools", c.tools},
            {"constraints", c.constraints},
            {"pitfalls", c.pitfalls}}},
          {"unparseable", c.unparseable}};
}

}  // namespace ppc
