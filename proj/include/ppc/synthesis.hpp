#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppc/answer.hpp"
#include "ppc/client.hpp"
#include "ppc/spoiler.hpp"

namespace ppc {

struct ProblemRecord {
  std::string id;
  std::string question;
  std::string gold_answer;
  std::optional<std::string> difficulty;
};

class DuplicateId : public std::invalid_argument {
 public:
  explicit DuplicateId(const std::string& id) : std::invalid_argument("duplicate problem id: " + id) {}
};

// JSONL rows {id, question, answer, difficulty?}. Throws DuplicateId.
std::vector<ProblemRecord> load_problems(const std::filesystem::path& path);
ProblemRecord problem_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProblemRecord& p);
void require_unique_ids(const std::vector<ProblemRecord>& problems);

enum class Stage { Preplan, Plan, Executor, Cleanup };
std::string_view to_string(Stage s);

struct StageFailure {
  Stage stage = Stage::Preplan;
  std::string cause;
  std::optional<ClientErrorKind> error_kind;  // set for endpoint failures
};

struct StageTimings {
  std::chrono::milliseconds preplan{0};
  std::chrono::milliseconds plan{0};
  std::chrono::milliseconds executor{0};
  std::chrono::milliseconds cleanup{0};
};

struct SynthesisRecord {
  ProblemRecord problem;
  std::string preplan;
  std::string plan;
  std::string raw_solution;
  std::string execute;
  std::optional<std::string> boxed_answer;
  SpoilerReport spoiler;
  bool answer_correct = false;
  bool kept = false;
  std::optional<DropReason> drop_reason;
  std::optional<StageFailure> failure;
  StageTimings stage_timings;  // in-memory only, never serialized
  int attempts = 1;
};

// pi_pp, pi_p, the executor that writes the raw solution, and the model that
// reorganizes it.
struct Generators {
  Role preplan;
  Role plan;
  Role executor;
  Role cleanup;
};

// Runs the four calls strictly in order. Each stage sees only its
// predecessors; the executor and the cleanup never see the preplan. A failing
// stage yields a record dropped with GEN_FAIL and `failure` set.
SynthesisRecord synthesize(const ProblemRecord& problem, const Generators& generators,
                           std::uint64_t seed);

// Keep iff spoiler <= tau_s, answer equivalent to gold, preplan length in
// bounds and an execute that ends with its boxed answer.
SynthesisRecord apply_filter(SynthesisRecord rec, const SpoilerConfig& cfg,
                             const LengthBounds& bounds, const AnswerEquivalence& equivalence);

struct SynthesisConfig {
  SpoilerConfig spoiler;
  LengthBounds bounds;
  std::uint64_t seed = 0;
  int parallelism = 1;
  int retries = 0;  // extra full-chain resamples after a filter failure
  std::optional<Role> equivalence_judge;
};

struct DatasetResult {
  std::vector<SynthesisRecord> records;  // input order
  std::vector<std::string> sft_lines;
  std::vector<std::string> reject_lines;
  nlohmann::json summary;
};

AnswerEquivalence make_equivalence(const std::optional<Role>& judge, const std::string& question);

DatasetResult build_dataset(const std::vector<ProblemRecord>& problems,
                            const Generators& generators, const SynthesisConfig& config);

// Writes sft.jsonl, rejects.jsonl and summary.json under `dir`.
void write_dataset(const DatasetResult& result, const std::filesystem::path& dir);

nlohmann::json sft_line(const SynthesisRecord& rec);
nlohmann::json reject_line(const SynthesisRecord& rec);
nlohmann::json summarize(const std::vector<SynthesisRecord>& records);

struct ProblemSplit {
  std::vector<ProblemRecord> sft;
  std::vector<ProblemRecord> rl;
};

// Stratified by difficulty (unlabelled problems form their own stratum);
// each stratum sends round(rl_fraction * n) problems to RL. Input order is
// preserved inside each side.
ProblemSplit split_sft_rl(const std::vector<ProblemRecord>& problems, double rl_fraction,
                          std::uint64_t seed);

}  // namespace ppc
