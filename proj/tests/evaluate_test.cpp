#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "ppc/evaluate.hpp"
#include "ppc/prompts.hpp"
#include "support/fixtures.hpp"

using namespace ppc;

namespace {

std::string completion(const std::string& answer, const std::string& preplan = "Look at the structure.") {
  return "<preplan>" + preplan + "</preplan><plan>1. solve</plan><execute>so \\boxed{" + answer +
         "}</execute>";
}

// Problem n answers correctly except problem 3, which is right only on its
// first sample.
struct CountingPolicy {
  std::mutex mutex;
  std::map<int, int> calls;

  Role role() {
    return fixtures::role_of(std::make_shared<ScriptedClient>([this](const GenerationRequest& r) {
      const int n = fixtures::problem_number(r.user_prompt);
      int call;
      {
        std::lock_guard lock(mutex);
        call = calls[n]++;
      }
      const bool right = n != 3 || call == 0;
      return completion(std::to_string(right ? n * 7 : 99));
    }));
  }
};

// A pure function of the request, so runs are reproducible.
Role seeded_policy() {
  return fixtures::role_of(std::make_shared<ScriptedClient>([](const GenerationRequest& r) {
    const int n = fixtures::problem_number(r.user_prompt);
    const auto s = r.seed.value_or(0);
    const std::string answer = s % 3 == 0 ? std::to_string(n * 7) : std::to_string(s % 5);
    if (r.forced_prefix) return std::string("continued</plan><execute>\\boxed{" + answer + "}</execute>");
    return completion(answer, "Sentence one for " + std::to_string(n) + ". Sentence two. Sentence three.");
  }));
}

EvalConfig cfg(int k, std::uint64_t seed = 3, int parallelism = 1) {
  EvalConfig c;
  c.k = k;
  c.seed = seed;
  c.parallelism = parallelism;
  c.benchmark = "fixture";
  return c;
}

std::string dump(const EvalReport& r) {
  std::ostringstream out;
  out << r.to_json().dump() << '\n' << r.table();
  for (const auto& rec : r.records) out << to_json(rec).dump() << '\n';
  for (const auto& e : r.transcript) out << transcript_line(e).dump() << '\n';
  return out.str();
}

}  // namespace

TEST_CASE("four problem fixture gives maj 75 and pass 100") {
  CountingPolicy policy;
  const auto report = evaluate(fixtures::problems(4), policy.role(), cfg(4));
  CHECK(report.evaluated == 4);
  CHECK(report.maj_pct == doctest::Approx(75.0));
  CHECK(report.pass_pct == doctest::Approx(100.0));
  CHECK(report.to_json()["maj_at_k"] == 75.0);
  CHECK(report.to_json()["pass_at_k"] == 100.0);
  CHECK(report.table().find("75.00") != std::string::npos);
  CHECK(report.table().find("maj@4") != std::string::npos);
  CHECK(report.transcript.size() == 16);
  for (const auto& e : report.transcript) {
    CHECK(e.request.system_prompt == std::string(prompts::kEvalSystemPrompt));
    CHECK(e.request.temperature == 1.0);
    CHECK(e.request.top_p == 0.95);
  }
  REQUIRE(report.mean_tokens);
  CHECK(*report.mean_tokens == doctest::Approx(static_cast<double>(count_tokens(completion("0")))));
}

TEST_CASE("k = 1 makes maj and pass coincide") {
  const auto report = evaluate(fixtures::problems(12), seeded_policy(), cfg(1));
  for (const auto& rec : report.records) CHECK(rec.maj_correct == rec.pass_correct);
  CHECK(report.maj_pct == report.pass_pct);
}

TEST_CASE("same seed gives identical bytes; parallelism does not matter") {
  const auto a = dump(evaluate(fixtures::problems(10), seeded_policy(), cfg(6, 8, 1)));
  const auto b = dump(evaluate(fixtures::problems(10), seeded_policy(), cfg(6, 8, 4)));
  CHECK(a == b);
  const auto c = dump(evaluate(fixtures::problems(10), seeded_policy(), cfg(6, 9, 1)));
  CHECK(a != c);
}

TEST_CASE("failed generations are excluded from the denominators") {
  Role flaky = fixtures::role_of(std::make_shared<ScriptedClient>([](const GenerationRequest& r) {
    const int n = fixtures::problem_number(r.user_prompt);
    if (n == 1) throw ClientError(ClientErrorKind::Timeout, "down");
    return completion(std::to_string(n * 7));
  }));
  const auto report = evaluate(fixtures::problems(3), flaky, cfg(2));
  CHECK(report.generation_failures == 1);
  CHECK(report.evaluated == 2);
  CHECK(report.pass_pct == 100.0);
  CHECK(report.records[1].generation_failed());
}

TEST_CASE("no samples means n/a tokens") {
  const auto report = summarize_eval({}, cfg(4));
  CHECK_FALSE(report.mean_tokens);
  CHECK(report.to_json()["mean_tokens_k"] == "n/a");
  CHECK(report.maj_pct == 0.0);
}

TEST_CASE("token counts exclude the forced prefix") {
  EvalRecord rec;
  rec.problem = fixtures::problem(2);
  rec.forced_prefix = "<preplan>a b c</preplan>\n<plan>";
  rec.samples = {*rec.forced_prefix + "x y</plan><execute>\\boxed{14}</execute>"};
  score_record(rec, make_equivalence(std::nullopt, ""));
  CHECK(rec.token_counts[0] == 2);
  CHECK(rec.pass_correct);
  CHECK(rec.parsed[0].has_value());
}

TEST_CASE("perturbation runs force the replaced preplan") {
  for (auto mode : {PerturbMode::Shuffled, PerturbMode::Mismatched, PerturbMode::Generic}) {
    auto c = cfg(2);
    c.perturb = mode;
    const auto report = evaluate(fixtures::problems(4), seeded_policy(), c);
    CHECK(report.evaluated == 4);
    std::set<std::string> prefixes;
    for (const auto& rec : report.records) {
      REQUIRE(rec.forced_prefix);
      prefixes.insert(*rec.forced_prefix);
      for (const auto& s : rec.samples) CHECK(s.rfind(*rec.forced_prefix, 0) == 0);
      const std::string own = "Sentence one for " + std::to_string(fixtures::problem_number(rec.problem.question));
      if (mode == PerturbMode::Mismatched) CHECK(rec.forced_prefix->find(own + ".") == std::string::npos);
      if (mode == PerturbMode::Shuffled) CHECK(rec.forced_prefix->find(own + ".") != std::string::npos);
    }
    CHECK(prefixes.size() == (mode == PerturbMode::Generic ? 1u : 4u));
    CHECK(report.to_json()["perturb"] == std::string(to_string(mode)));
  }
}

TEST_CASE("transcripts replay offline to the same report") {
  const auto original = evaluate(fixtures::problems(5), seeded_policy(), cfg(3, 21));
  const auto dir = std::filesystem::temp_directory_path() / "ppc_eval_test";
  std::filesystem::remove_all(dir);
  write_eval(original, dir);
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "report.txt"));
  CHECK(std::filesystem::exists(dir / "records.jsonl"));

  Role replay = fixtures::role_of(ReplayClient::from_jsonl(dir / "transcripts.jsonl"));
  const auto again = evaluate(fixtures::problems(5), replay, cfg(3, 21));
  CHECK(dump(again) == dump(original));

  const auto other_seed = evaluate(fixtures::problems(5), replay, cfg(3, 22));
  CHECK(other_seed.generation_failures == 5);
  std::filesystem::remove_all(dir);
}
