#include "ppc/synthesis.hpp"

#include <array>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "ppc/judges.hpp"
#include "ppc/log.hpp"
#include "ppc/parallel.hpp"
#include "ppc/prompts.hpp"
#include "ppc/trajectory.hpp"

namespace ppc {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::array<DropReason, 7> kAllReasons = {
    DropReason::Spoiler,  DropReason::NoAnswer,  DropReason::WrongAnswer, DropReason::TooShort,
    DropReason::TooLong,  DropReason::BadFormat, DropReason::GenFail};

// The boxed answer must be the last thing in execute, up to trailing "." or "$".
bool ends_with_boxed(std::string_view execute) {
  const std::string t = trim(execute);
  const auto marker = t.rfind("\\boxed{");
  if (marker == std::string::npos) return false;
  const auto content = extract_boxed_lenient(std::string_view(t).substr(marker));
  if (!content) return false;
  const std::size_t end = marker + 7 + content->size() + 1;
  return t.find_first_not_of(" .$", end) == std::string::npos;
}

std::string timed(std::chrono::milliseconds& slot, const Role& role, GenerationRequest req) {
  const auto start = Clock::now();
  std::string out = trim(role.generate(std::move(req)));
  slot = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return out;
}

}  // namespace

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Preplan: return "preplan";
    case Stage::Plan: return "plan";
    case Stage::Executor: return "executor";
    case Stage::Cleanup: return "cleanup";
  }
  return "?";
}

ProblemRecord problem_from_json(const nlohmann::json& j) {
  ProblemRecord p;
  p.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
  p.question = j.at("question").get<std::string>();
  p.gold_answer = j.contains("answer") ? j.at("answer").get<std::string>()
                                       : j.value("gold_answer", std::string{});
  if (j.contains("difficulty") && !j.at("difficulty").is_null()) {
    const auto& d = j.at("difficulty");
    p.difficulty = d.is_string() ? d.get<std::string>() : d.dump();
  }
  if (p.question.empty()) throw std::invalid_argument("problem " + p.id + " has an empty question");
  return p;
}

nlohmann::json to_json(const ProblemRecord& p) {
  nlohmann::json j = {{"id", p.id}, {"question", p.question}, {"answer", p.gold_answer}};
  j["difficulty"] = p.difficulty ? nlohmann::json(*p.difficulty) : nlohmann::json(nullptr);
  return j;
}

void require_unique_ids(const std::vector<ProblemRecord>& problems) {
  std::set<std::string> seen;
  for (const auto& p : problems) {
    if (!seen.insert(p.id).second) throw DuplicateId(p.id);
  }
}

std::vector<ProblemRecord> load_problems(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<ProblemRecord> problems;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    problems.push_back(problem_from_json(nlohmann::json::parse(line)));
  }
  require_unique_ids(problems);
  return problems;
}

SynthesisRecord synthesize(const ProblemRecord& problem, const Generators& g, std::uint64_t seed) {
  SynthesisRecord rec;
  rec.problem = problem;
  Stage stage = Stage::Preplan;
  auto request = [&](std::string prompt, Stage s) {
    GenerationRequest req;
    req.user_prompt = std::move(prompt);
    req.seed = seed + static_cast<std::uint64_t>(s);
    req.purpose = std::string(to_string(s));
    stage = s;
    return req;
  };
  try {
    rec.preplan = timed(rec.stage_timings.preplan, g.preplan,
                        request(prompts::fill(prompts::kPreplan.text, {{"question", problem.question}}),
                                Stage::Preplan));
    rec.plan = timed(rec.stage_timings.plan, g.plan,
                     request(prompts::fill(prompts::kPlan.text, {{"question", problem.question},
                                                                 {"preplan", rec.preplan}}),
                             Stage::Plan));
    rec.raw_solution =
        timed(rec.stage_timings.executor, g.executor,
              request(prompts::fill(prompts::kExecutor.text,
                                    {{"question", problem.question}, {"plan", rec.plan}}),
                      Stage::Executor));
    rec.execute = timed(rec.stage_timings.cleanup, g.cleanup,
                        request(prompts::fill(prompts::kCleanup.text,
                                              {{"question", problem.question},
                                               {"plan", rec.plan},
                                               {"raw_solution", rec.raw_solution}}),
                                Stage::Cleanup));
  } catch (const ClientError& e) {
    rec.failure = StageFailure{stage, e.what(), e.kind()};
  } catch (const std::exception& e) {
    rec.failure = StageFailure{stage, e.what(), std::nullopt};
  }
  if (rec.failure) {
    rec.kept = false;
    rec.drop_reason = DropReason::GenFail;
    log::warn("stage failed", {{"id", problem.id},
                               {"stage", to_string(rec.failure->stage)},
                               {"cause", rec.failure->cause}});
    return rec;
  }
  rec.boxed_answer = extract_boxed_lenient(rec.execute);
  return rec;
}

SynthesisRecord apply_filter(SynthesisRecord rec, const SpoilerConfig& cfg,
                             const LengthBounds& bounds, const AnswerEquivalence& equivalence) {
  if (rec.failure) {
    rec.kept = false;
    rec.drop_reason = DropReason::GenFail;
    return rec;
  }
  rec.boxed_answer = extract_boxed_lenient(rec.execute);
  rec.answer_correct = rec.boxed_answer && equivalence(*rec.boxed_answer, rec.problem.gold_answer);

  Trajectory t;
  t.preplan = rec.preplan;
  t.plan = rec.plan;
  t.execute = rec.execute;
  t.boxed_answer = rec.boxed_answer;
  // equivalence already evaluated; reuse the verdict.
  const bool correct = rec.answer_correct;
  auto decision = filter_decision(t, rec.problem.gold_answer, cfg, bounds,
                                  [correct](const std::string&, const std::string&) { return correct; });
  rec.spoiler = decision.spoiler;
  if (!decision.keep) {
    rec.kept = false;
    rec.drop_reason = decision.reason;
    return rec;
  }
  bool renders = ends_with_boxed(rec.execute);
  if (renders) {
    try {
      render_trajectory(t);
    } catch (const std::invalid_argument&) {
      renders = false;
    }
  }
  rec.kept = renders;
  rec.drop_reason = renders ? std::nullopt : std::optional<DropReason>(DropReason::BadFormat);
  return rec;
}

AnswerEquivalence make_equivalence(const std::optional<Role>& judge, const std::string& question) {
  if (!judge) {
    return [](const std::string& pred, const std::string& gold) {
      return answers_equivalent(pred, gold);
    };
  }
  return [judge = *judge, question](const std::string& pred, const std::string& gold) {
    return answers_equivalent(pred, gold, [&](const std::string& p, const std::string& g) {
      return judge_equivalence(judge, p, g, question).boolean_verdict.value_or(false);
    });
  };
}

nlohmann::json sft_line(const SynthesisRecord& rec) {
  Trajectory t;
  t.preplan = rec.preplan;
  t.plan = rec.plan;
  t.execute = rec.execute;
  return {{"id", rec.problem.id},
          {"system", prompts::kEvalSystemPrompt},
          {"prompt", rec.problem.question},
          {"target", render_trajectory(t)}};
}

nlohmann::json reject_line(const SynthesisRecord& rec) {
  nlohmann::json j = {
      {"id", rec.problem.id},
      {"drop_reason", rec.drop_reason ? nlohmann::json(to_string(*rec.drop_reason)) : nlohmann::json(nullptr)},
      {"spoiler", to_json(rec.spoiler)},
      {"answer_correct", rec.answer_correct},
      {"boxed_answer", rec.boxed_answer ? nlohmann::json(*rec.boxed_answer) : nlohmann::json(nullptr)},
      {"attempts", rec.attempts},
      {"preplan", rec.preplan},
      {"plan", rec.plan},
      {"execute", rec.execute}};
  if (rec.failure) {
    j["failure"] = {{"stage", to_string(rec.failure->stage)}, {"cause", rec.failure->cause}};
  }
  return j;
}

nlohmann::json summarize(const std::vector<SynthesisRecord>& records) {
  std::size_t kept = 0;
  std::array<int, kSpoilerSignalCount + 1> histogram{};
  std::map<std::string, int> reasons;
  for (auto r : kAllReasons) reasons[std::string(to_string(r))] = 0;
  for (const auto& rec : records) {
    if (rec.kept) ++kept;
    if (rec.drop_reason) ++reasons[std::string(to_string(*rec.drop_reason))];
    if (!rec.failure) ++histogram[static_cast<std::size_t>(rec.spoiler.score)];
  }
  nlohmann::json j = {{"total", records.size()},
                      {"kept", kept},
                      {"dropped", records.size() - kept},
                      {"score_histogram", histogram},
                      {"drop_reasons", reasons}};
  if (records.empty()) {
    j["retention"] = "n/a";
  } else {
    j["retention"] = static_cast<double>(kept) / static_cast<double>(records.size());
  }
  return j;
}

DatasetResult build_dataset(const std::vector<ProblemRecord>& problems, const Generators& generators,
                            const SynthesisConfig& config) {
  require_unique_ids(problems);
  config.spoiler.validate();

  // Per-problem seeds are drawn in input order before any work is scheduled.
  std::mt19937_64 rng(config.seed);
  std::vector<std::uint64_t> seeds(problems.size());
  for (auto& s : seeds) s = rng();

  DatasetResult result;
  result.records.resize(problems.size());
  parallel_for(problems.size(), config.parallelism, [&](std::size_t i) {
    const auto& problem = problems[i];
    const auto equivalence = make_equivalence(config.equivalence_judge, problem.question);
    SynthesisRecord rec;
    for (int attempt = 0; attempt <= std::max(0, config.retries); ++attempt) {
      const std::uint64_t seed = seeds[i] + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(attempt);
      rec = apply_filter(synthesize(problem, generators, seed), config.spoiler, config.bounds,
                         equivalence);
      rec.attempts = attempt + 1;
      if (rec.kept) break;
    }
    result.records[i] = std::move(rec);
  });

  for (const auto& rec : result.records) {
    if (rec.kept) {
      result.sft_lines.push_back(sft_line(rec).dump());
    } else {
      result.reject_lines.push_back(reject_line(rec).dump());
    }
  }
  result.summary = summarize(result.records);
  return result;
}

void write_dataset(const DatasetResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write_lines = [](const std::filesystem::path& p, const std::vector<std::string>& lines) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    for (const auto& l : lines) out << l << '\n';
  };
  write_lines(dir / "sft.jsonl", result.sft_lines);
  write_lines(dir / "rejects.jsonl", result.reject_lines);
  std::ofstream summary(dir / "summary.json", std::ios::binary);
  if (!summary) throw std::runtime_error("cannot write summary.json");
  summary << result.summary.dump(2) << '\n';
}

ProblemSplit split_sft_rl(const std::vector<ProblemRecord>& problems, double rl_fraction,
                          std::uint64_t seed) {
  if (rl_fraction < 0.0 || rl_fraction > 1.0) {
    throw std::invalid_argument("rl_fraction must be in [0, 1]");
  }
  require_unique_ids(problems);
  std::map<std::string, std::vector<std::size_t>> strata;  // "" = unlabelled
  for (std::size_t i = 0; i < problems.size(); ++i) {
    strata[problems[i].difficulty.value_or("")].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<bool> to_rl(problems.size(), false);
  for (auto& [label, idx] : strata) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto take = static_cast<std::size_t>(std::llround(rl_fraction * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < take; ++k) to_rl[idx[k]] = true;
  }
  ProblemSplit split;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    (to_rl[i] ? split.rl : split.sft).push_back(problems[i]);
  }
  return split;
}

}  // namespace ppc
