#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppc/client.hpp"
#include "ppc/metrics.hpp"
#include "ppc/perturb.hpp"
#include "ppc/synthesis.hpp"
#include "ppc/trajectory.hpp"

namespace ppc {

struct EvalRecord {
  ProblemRecord problem;
  std::vector<std::string> samples;  // "" for a failed generation
  std::vector<std::optional<Trajectory>> parsed;
  std::vector<MaybeAnswer> answers;  // normalized boxed answers
  std::vector<bool> verdicts;
  bool maj_correct = false;
  bool pass_correct = false;
  std::vector<std::size_t> token_counts;
  std::vector<bool> failed;  // generation errors
  int failed_samples = 0;
  std::optional<std::string> forced_prefix;  // perturbation runs only

  bool generation_failed() const { return !samples.empty() && failed_samples == static_cast<int>(samples.size()); }
};

// Fills answers, verdicts, token counts and both metrics from `samples`.
// Samples listed in `failed` count as absent answers.
void score_record(EvalRecord& rec, const AnswerEquivalence& eq, const std::vector<bool>& failed = {});

struct EvalConfig {
  int k = 16;
  std::uint64_t seed = 0;
  int parallelism = 1;
  SamplingParams sampling{1.0, 0.95, 4096};
  std::optional<PerturbMode> perturb;
  std::string generic_text;
  std::optional<Role> equivalence_judge;
  std::string benchmark = "bench";
};

struct EvalReport {
  std::string benchmark;
  int k = 0;
  std::uint64_t seed = 0;
  std::optional<PerturbMode> perturb;
  std::vector<EvalRecord> records;
  std::size_t evaluated = 0;            // problems in the denominators
  std::size_t generation_failures = 0;  // problems whose every sample failed
  double maj_pct = 0.0;
  double pass_pct = 0.0;
  std::optional<double> mean_tokens;
  std::vector<Exchange> transcript;  // sorted by request key

  nlohmann::json to_json() const;
  std::string table() const;
};

EvalReport summarize_eval(std::vector<EvalRecord> records, const EvalConfig& cfg);

// Samples k completions per problem under the evaluation system prompt. In a
// perturbation run, one unperturbed completion per problem supplies the
// original preplan, which is then replaced and forced as a prefix.
EvalReport evaluate(const std::vector<ProblemRecord>& problems, const Role& model,
                    const EvalConfig& cfg);

nlohmann::json to_json(const EvalRecord& r);

// Writes report.json, report.txt, records.jsonl and transcripts.jsonl.
void write_eval(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace ppc
