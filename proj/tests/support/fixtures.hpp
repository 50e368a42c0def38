#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "ppc/client.hpp"
#include "ppc/synthesis.hpp"
#include "ppc/trajectory.hpp"

namespace fixtures {

// Figure text of the two exemplar preplans, verbatim, without the caption line.
inline const std::string kContourPreplan =
    R"TXT(This is a complex contour integral problem \dots\ using the residue theorem. \dots\
Since the contour is the circle $|z-1| = \tfrac{3}{2}$, \textbf{it encloses both
$z=0$ and $z=1$}, so we must consider the nature of each singularity and how they
contribute to the residue sum. The problem specifies using Laurent series
expansions for $e^{1/z}$ and $\tfrac{1}{z-1}$, which implies that
\textbf{understanding how to multiply and manipulate these series to extract the
coefficient of $\tfrac{1}{z}$ will be central} to determining the residue at $z=0$.
We should also be careful about distinguishing between removable singularities,
poles, and essential singularities \dots\ A key pitfall is misidentifying the order
of a pole or mishandling the series expansions, especially near the
\textbf{essential singularity at the origin}.)TXT";

inline const std::string kCrtPreplan =
    R"TXT(This is a modular arithmetic problem involving large exponents and simultaneous
congruences. \dots\ The key concepts at play include the Chinese Remainder Theorem
and properties of modular exponentiation. Since $1001$ factors into the primes
$7$, $11$, and $13$, the given congruences suggest that the solution involves
combining these individual modular results into a unified modulus. A natural
approach is to treat each congruence as a piece of a larger puzzle and reconstruct
the final result modulo $1001$. We should also be careful not to assume uniqueness
without verifying compatibility of the congruences. One potential pitfall is
misapplying the theorem or mixing up moduli during calculations \dots)TXT";

inline std::string words(const std::string& stem, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += stem + std::to_string(i % 10);
  }
  return out;
}

inline ppc::Trajectory traj(std::string preplan, std::string plan, std::string execute) {
  ppc::Trajectory t;
  t.preplan = std::move(preplan);
  t.plan = std::move(plan);
  t.execute = std::move(execute);
  t.boxed_answer = ppc::extract_boxed_lenient(t.execute);
  return t;
}

inline ppc::RetryPolicy no_sleep_retry(int attempts = 3) {
  ppc::RetryPolicy r;
  r.max_attempts = attempts;
  r.sleep = [](std::chrono::milliseconds) {};
  return r;
}

inline ppc::Role role_of(std::shared_ptr<ppc::LlmClient> client) {
  ppc::Role r;
  r.client = std::move(client);
  r.retry = no_sleep_retry();
  return r;
}

// Problem n of the synthesis fixture. The question carries the number so the
// scripted roles can recover it from any prompt.
inline ppc::ProblemRecord problem(int n) {
  ppc::ProblemRecord p;
  p.id = "p" + std::to_string(n);
  p.question = "Problem #" + std::to_string(n) + "#: find the value of the expression E" +
               std::to_string(n) + ".";
  p.gold_answer = std::to_string(n * 7);
  p.difficulty = "level" + std::to_string(n % 4 + 1);
  return p;
}

inline std::vector<ppc::ProblemRecord> problems(int count) {
  std::vector<ppc::ProblemRecord> out;
  for (int n = 0; n < count; ++n) out.push_back(problem(n));
  return out;
}

inline int problem_number(const std::string& prompt) {
  const auto a = prompt.find("Problem #");
  const auto b = prompt.find('#', a + 9);
  return std::stoi(prompt.substr(a + 9, b - a - 9));
}

// Behaviour of problem n in the fixture:
//   n % 5 == 1  spoiler preplan
//   n % 7 == 3  preplan too short
//   n % 6 == 4  wrong answer
//   n % 9 == 8  cleanup omits the boxed answer
//   n == 13     plan stage times out
struct Pipeline {
  std::mutex mutex;
  std::vector<std::pair<int, std::string>> calls;  // (problem, purpose) in call order

  void note(int n, const std::string& purpose) {
    std::lock_guard lock(mutex);
    calls.emplace_back(n, purpose);
  }

  std::string preplan(const ppc::GenerationRequest& req) {
    const int n = problem_number(req.user_prompt);
    note(n, req.purpose);
    const std::string tag = "variant" + std::to_string(req.seed.value_or(0) % 1000);
    if (n % 5 == 1) {
      return "The sum simplifies to a telescoping form and the answer is a = 1, b = 2, c = 3 for " + tag +
             ". " + words("step", 160);
    }
    if (n % 7 == 3) return "Preplan for problem " + std::to_string(n) + " " + tag + ". " + words("idea", 80);
    return "Preplan for problem " + std::to_string(n) + " " + tag + ". This is an algebra task. " +
           words("idea", 200);
  }

  std::string plan(const ppc::GenerationRequest& req) {
    const int n = problem_number(req.user_prompt);
    note(n, req.purpose);
    if (n == 13) throw ppc::ClientError(ppc::ClientErrorKind::Timeout, "plan endpoint timed out");
    return "1. Setup: restate problem " + std::to_string(n) + ".\n2. Evaluate: compute E" +
           std::to_string(n) + ".";
  }

  std::string executor(const ppc::GenerationRequest& req) {
    const int n = problem_number(req.user_prompt);
    note(n, req.purpose);
    const int value = n % 6 == 4 ? n * 7 + 1 : n * 7;
    return "Working through the plan for E" + std::to_string(n) + " gives \\boxed{" +
           std::to_string(value) + "}";
  }

  std::string cleanup(const ppc::GenerationRequest& req) {
    const int n = problem_number(req.user_prompt);
    note(n, req.purpose);
    const int value = n % 6 == 4 ? n * 7 + 1 : n * 7;
    if (n % 9 == 8) return "Step 1: evaluate E" + std::to_string(n) + ". The value is " + std::to_string(value) + ".";
    return "Step 1: evaluate E" + std::to_string(n) + ".\nFinal Answer: \\boxed{" +
           std::to_string(value) + "}";
  }

  ppc::Generators generators() {
    auto make = [this](std::string (Pipeline::*fn)(const ppc::GenerationRequest&)) {
      return role_of(std::make_shared<ppc::ScriptedClient>(
          [this, fn](const ppc::GenerationRequest& req) { return (this->*fn)(req); }));
    };
    return {make(&Pipeline::preplan), make(&Pipeline::plan), make(&Pipeline::executor),
            make(&Pipeline::cleanup)};
  }
};

}  // namespace fixtures
