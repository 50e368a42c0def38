#include "ppc/cli.hpp"

#include <array>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ppc/answer.hpp"
#include "ppc/evaluate.hpp"
#include "ppc/grpo.hpp"
#include "ppc/judges.hpp"
#include "ppc/log.hpp"
#include "ppc/parallel.hpp"
#include "ppc/perturb.hpp"
#include "ppc/reward.hpp"
#include "ppc/spoiler.hpp"
#include "ppc/synthesis.hpp"
#include "ppc/trajectory.hpp"

namespace ppc::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Row {
  std::size_t line = 0;
  nlohmann::json value;
};

std::vector<Row> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Row> rows;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw DataError(path + ":" + std::to_string(line) + ": not a JSON object");
    }
    rows.push_back({line, std::move(j)});
  }
  return rows;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError(path + ": invalid JSON");
  return j;
}

std::string id_of(const Row& r) {
  if (!r.value.contains("id")) throw DataError("line " + std::to_string(r.line) + ": missing id");
  const auto& id = r.value.at("id");
  return id.is_string() ? id.get<std::string>() : id.dump();
}

std::string text_field(const Row& r, const char* key) {
  if (!r.value.contains(key) || !r.value.at(key).is_string()) {
    throw DataError("line " + std::to_string(r.line) + ": missing string field '" + key + "'");
  }
  return r.value.at(key).get<std::string>();
}

// Writes to a file when a path is given, otherwise to the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw DataError("cannot write " + path);
      os_ = &file_;
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

void write_summary(const std::string& path, std::string_view what, const nlohmann::json& summary) {
  if (path.empty()) {
    log::info(what, summary);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << summary.dump(2) << '\n';
}

std::optional<log::Level> parse_level(std::string_view s) {
  if (s == "debug") return log::Level::Debug;
  if (s == "info") return log::Level::Info;
  if (s == "warn") return log::Level::Warn;
  if (s == "error") return log::Level::Error;
  if (s == "off") return log::Level::Off;
  return std::nullopt;
}

struct Globals {
  std::string config_path;
  std::string log_level = "info";
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  int parallelism = 0;
  std::string endpoint;
  std::string model;
  std::string api_key;
};

PipelineConfig resolve_config(const Globals& g, const EnvLookup& env) {
  PipelineConfig cfg = g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
  apply_env(cfg, env);
  // Flags beat both the file and the environment, for every role.
  auto force = [&](std::string EndpointConfig::*field, const std::string& value) {
    if (value.empty()) return;
    cfg.endpoints["default"].*field = value;
    for (auto& [name, e] : cfg.endpoints) {
      if (!(e.*field).empty()) e.*field = value;
    }
  };
  force(&EndpointConfig::url, g.endpoint);
  force(&EndpointConfig::model, g.model);
  force(&EndpointConfig::api_key, g.api_key);
  if (g.seed_opt && g.seed_opt->count() > 0) cfg.seed = g.seed;
  if (g.parallelism > 0) cfg.parallelism = g.parallelism;
  return cfg;
}

std::uint64_t require_seed(const PipelineConfig& cfg, std::string_view command) {
  if (!cfg.seed) {
    throw UsageError(std::string(command) + " is randomized and needs --seed (or \"seed\" in the config)");
  }
  return *cfg.seed;
}

std::optional<Role> optional_judge(const PipelineConfig& cfg) {
  try {
    auto endpoint = cfg.endpoint_for("judge");
    auto client = std::make_shared<BoundedClient>(make_client(endpoint), cfg.max_in_flight);
    return judge_role(client, cfg.retry.policy());
  } catch (const ConfigError&) {
    return std::nullopt;
  }
}

// ---- lint -----------------------------------------------------------------

struct LintArgs {
  std::string in, out, summary;
  int tau_s = -1;
};

int cmd_lint(const LintArgs& a, PipelineConfig cfg, Io& io) {
  if (a.tau_s >= 0) cfg.spoiler.tau_s = a.tau_s;
  try {
    cfg.spoiler.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto rows = read_jsonl(a.in);
  Sink sink(a.out, io.out);
  std::array<int, kSpoilerSignalCount + 1> histogram{};
  int over = 0;
  for (const auto& row : rows) {
    const auto report = spoiler_score(text_field(row, "preplan"), cfg.spoiler);
    auto j = to_json(report);
    j["id"] = id_of(row);
    j["drop"] = report.score > cfg.spoiler.tau_s;
    *sink << j.dump() << '\n';
    ++histogram[static_cast<std::size_t>(report.score)];
    over += report.score > cfg.spoiler.tau_s;
  }
  write_summary(a.summary, "lint summary",
                {{"total", rows.size()},
                 {"score_histogram", histogram},
                 {"over_threshold", over},
                 {"tau_s", cfg.spoiler.tau_s}});
  return kOk;
}

// ---- synthesize -------------------------------------------------------------

struct SynthArgs {
  std::string in, out;
  int retries = -1;
};

int cmd_synthesize(const SynthArgs& a, const PipelineConfig& cfg, Io& io) {
  const auto seed = require_seed(cfg, "synthesize");
  std::vector<ProblemRecord> problems;
  try {
    problems = load_problems(a.in);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  Generators g{cfg.role("preplan_gen", cfg.sampling), cfg.role("plan_gen", cfg.sampling),
               cfg.role("executor", cfg.sampling), cfg.role("cleanup", cfg.sampling)};
  SynthesisConfig sc;
  sc.spoiler = cfg.spoiler;
  sc.bounds = cfg.bounds;
  sc.seed = seed;
  sc.parallelism = cfg.parallelism;
  sc.retries = a.retries >= 0 ? a.retries : cfg.resample_retries;
  sc.equivalence_judge = optional_judge(cfg);

  const auto result = build_dataset(problems, g, sc);
  write_dataset(result, a.out);
  io.out << result.summary.dump() << '\n';

  const auto endpoint_failures =
      std::count_if(result.records.begin(), result.records.end(),
                    [](const SynthesisRecord& r) { return r.failure && r.failure->error_kind; });
  if (endpoint_failures > 0) {
    log::error("endpoint failures during synthesis", {{"records", endpoint_failures}});
    return kEndpointFailure;
  }
  return kOk;
}

// ---- reward -----------------------------------------------------------------

struct RewardArgs {
  std::string in, out;
  double lambda_a = -1, lambda_f = -1, lambda_s = -1;
  int tau_s = -1;
};

std::optional<int> grade_field(const nlohmann::json& verdicts, const char* key) {
  if (!verdicts.is_object() || !verdicts.contains(key) || verdicts.at(key).is_null()) {
    return std::nullopt;
  }
  return verdicts.at(key).get<int>();
}

int cmd_reward(const RewardArgs& a, PipelineConfig cfg, Io& io) {
  auto& w = cfg.reward;
  if (a.lambda_a >= 0) w.lambda_a = a.lambda_a;
  if (a.lambda_f >= 0) w.lambda_f = a.lambda_f;
  if (a.lambda_s >= 0) w.lambda_s = a.lambda_s;
  if (a.tau_s >= 0) w.tau_s = a.tau_s;
  try {
    w.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  cfg.spoiler.tau_s = w.tau_s;

  const auto rows = read_jsonl(a.in);
  Sink sink(a.out, io.out);
  for (const auto& row : rows) {
    const auto& v = row.value;
    std::string text;
    if (v.contains("trajectory") && v.at("trajectory").is_object()) {
      const auto& t = v.at("trajectory");
      text = t.contains("raw") ? t.at("raw").get<std::string>() : render_trajectory(t.get<Trajectory>());
    } else {
      text = text_field(row, "trajectory");
    }
    const auto gold = v.contains("gold") ? text_field(row, "gold") : text_field(row, "answer");
    const auto fmt = check_format(text);
    const auto preplan = extract_preplan(text).value_or("");
    const auto spoiler = spoiler_score(preplan, cfg.spoiler);

    bool correct = false;
    if (v.contains("correct") && v.at("correct").is_boolean()) {
      correct = v.at("correct").get<bool>();
    } else {
      std::optional<std::string> boxed;
      try {
        boxed = parse_trajectory(text).boxed_answer;
      } catch (const std::exception&) {
        boxed = extract_boxed_lenient(text);
      }
      correct = boxed && answers_equivalent(*boxed, gold);
    }
    const auto verdicts = v.value("verdicts", nlohmann::json::object());
    auto prox = grade_field(verdicts, "proximity");
    auto adh = grade_field(verdicts, "adherence");
    if (!correct && !prox) {
      log::warn("missing proximity grade; using minimum", {{"line", row.line}});
      prox = grade_or_minimum(prox);
    }
    if (!adh) log::warn("missing adherence grade; using minimum", {{"line", row.line}});

    auto j = to_json(composite_reward(correct, prox, grade_or_minimum(adh), fmt, spoiler, w));
    if (v.contains("id")) j["id"] = id_of(row);
    j["spoiler_score"] = spoiler.score;
    nlohmann::json violations = nlohmann::json::array();
    for (auto viol : fmt.violations) violations.push_back(to_string(viol));
    j["violations"] = violations;
    *sink << j.dump() << '\n';
  }
  return kOk;
}

// ---- grpo-check ---------------------------------------------------------------

struct GrpoArgs {
  std::string in;
  double epsilon = -1, beta = -1;
  bool token_level = false;
};

int cmd_grpo_check(const GrpoArgs& a, const PipelineConfig& cfg, Io& io) {
  const auto j = read_json(a.in);
  grpo::GrpoConfig gc = cfg.grpo.value_or(grpo::GrpoConfig{});
  if (j.contains("config")) gc = grpo::grpo_config_from_json(j.at("config"));
  if (a.epsilon >= 0) gc.epsilon_clip = a.epsilon;
  if (a.beta >= 0) gc.beta_kl = a.beta;
  if (a.token_level) gc.token_level = true;
  try {
    gc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto group = grpo::rollout_group_from_json(j.contains("group") ? j.at("group") : j);
  auto out = grpo::to_json(grpo::grpo_objective(group, gc));
  out["config"] = grpo::to_json(gc);
  io.out << out.dump(2) << '\n';
  return kOk;
}

// ---- eval ---------------------------------------------------------------------

struct EvalArgs {
  std::string bench, out, replay, perturb, name, generic_text;
  int k = 16;
  bool json = false;
};

int cmd_eval(const EvalArgs& a, const PipelineConfig& cfg, Io& io) {
  EvalConfig ec;
  ec.seed = require_seed(cfg, "eval");
  ec.k = a.k;
  ec.parallelism = cfg.parallelism;
  ec.sampling = SamplingParams{1.0, 0.95, cfg.sampling.max_tokens};
  ec.generic_text = a.generic_text;
  ec.benchmark = a.name.empty() ? std::filesystem::path(a.bench).stem().string() : a.name;
  if (!a.perturb.empty()) {
    ec.perturb = perturb_mode_from_string(a.perturb);
    if (!ec.perturb) throw UsageError("unknown --perturb mode: " + a.perturb);
  }
  std::vector<ProblemRecord> problems;
  try {
    problems = load_problems(a.bench);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }

  Role model;
  if (!a.replay.empty()) {
    try {
      model.client = ReplayClient::from_jsonl(std::filesystem::path(a.replay) / "transcripts.jsonl");
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
    model.retry.max_attempts = 1;
  } else {
    model = cfg.role("policy", ec.sampling);
    ec.equivalence_judge = optional_judge(cfg);
  }

  const auto report = evaluate(problems, model, ec);
  if (!a.out.empty()) write_eval(report, a.out);
  if (a.json) {
    io.out << report.to_json().dump(2) << '\n';
  } else {
    io.out << report.table();
  }
  if (!problems.empty() && report.generation_failures == problems.size() && a.replay.empty()) {
    log::error("every problem failed to generate");
    return kEndpointFailure;
  }
  return kOk;
}

// ---- perturb ------------------------------------------------------------------

struct PerturbArgs {
  std::string in, out, mode, generic_text;
};

int cmd_perturb(const PerturbArgs& a, const PipelineConfig& cfg, Io& io) {
  PerturbationSpec spec;
  spec.seed = require_seed(cfg, "perturb");
  const auto mode = perturb_mode_from_string(a.mode);
  if (!mode) throw UsageError("unknown --mode: " + a.mode);
  spec.mode = *mode;
  spec.generic_text = a.generic_text;

  const auto rows = read_jsonl(a.in);
  std::vector<std::string> ids;
  for (const auto& row : rows) {
    ids.push_back(id_of(row));
    if (row.value.contains("preplan")) {
      spec.pool.push_back(text_field(row, "preplan"));
    } else {
      const auto preplan = extract_preplan(text_field(row, "completion"));
      if (!preplan) throw DataError("line " + std::to_string(row.line) + ": no preplan in completion");
      spec.pool.push_back(*preplan);
    }
  }
  if (spec.mode == PerturbMode::Mismatched && spec.pool.size() < 2) throw PoolTooSmall(spec.pool.size());

  Sink sink(a.out, io.out);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto text = perturbed_preplan_text(spec.pool[i], spec, i);
    *sink << nlohmann::json{{"id", ids[i]},
                            {"mode", to_string(spec.mode)},
                            {"preplan", text},
                            {"prefix", preplan_prefix(text)}}
                 .dump()
          << '\n';
  }
  return kOk;
}

// ---- attribute ----------------------------------------------------------------

struct AttributeArgs {
  std::string in, out, summary;
};

int cmd_attribute(const AttributeArgs& a, const PipelineConfig& cfg, Io& io) {
  const auto rows = read_jsonl(a.in);
  const auto judge = judge_role(
      std::make_shared<BoundedClient>(make_client(cfg.endpoint_for("judge")), cfg.max_in_flight),
      cfg.retry.policy());

  struct Input {
    std::string id, question, gold, solution;
  };
  std::vector<Input> inputs;
  for (const auto& row : rows) {
    if (row.value.value("correct", false)) continue;  // incorrect answers only
    inputs.push_back({id_of(row), text_field(row, "question"),
                      row.value.contains("gold") ? text_field(row, "gold") : text_field(row, "answer"),
                      text_field(row, "solution")});
  }

  std::vector<std::optional<Attribution>> verdicts(inputs.size());
  std::vector<nlohmann::json> lines(inputs.size());
  std::vector<bool> endpoint_failed(inputs.size(), false);
  parallel_for(inputs.size(), cfg.parallelism, [&](std::size_t i) {
    const auto& in = inputs[i];
    nlohmann::json line = {{"id", in.id}};
    try {
      const auto v = attribute_error(judge, in.question, in.solution, in.gold);
      verdicts[i] = v.attribution;
      line.update(to_json(v));
    } catch (const UnparseableVerdict& e) {
      line["unparseable"] = true;
      line["raw_response"] = e.raw();
    } catch (const ClientError& e) {
      endpoint_failed[i] = true;
      line["error"] = e.what();
    }
    lines[i] = std::move(line);
  });

  Sink sink(a.out, io.out);
  for (const auto& l : lines) *sink << l.dump() << '\n';
  write_summary(a.summary, "attribution summary", to_json(aggregate_attribution(verdicts)));
  if (std::any_of(endpoint_failed.begin(), endpoint_failed.end(), [](bool b) { return b; })) {
    return kEndpointFailure;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, Io io) {
  CLI::App app{"Preplan-plan-CoT pipeline toolkit", "ppc"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--log-level", g.log_level, "debug|info|warn|error|off");
  g.seed_opt = app.add_option("--seed", g.seed, "RNG seed (required by randomized commands)");
  app.add_option("--parallelism", g.parallelism, "worker threads");
  app.add_option("--endpoint", g.endpoint, "endpoint URL for every role");
  app.add_option("--model", g.model, "model name for every role");
  app.add_option("--api-key", g.api_key, "API key for every role");
  app.fallthrough();

  LintArgs lint;
  auto* lint_cmd = app.add_subcommand("lint", "Score preplans for spoiler content");
  lint_cmd->add_option("--in", lint.in, "JSONL of {id, preplan}")->required();
  lint_cmd->add_option("--out", lint.out, "output JSONL (default stdout)");
  lint_cmd->add_option("--summary", lint.summary, "write the score histogram here");
  lint_cmd->add_option("--tau-s", lint.tau_s, "spoiler threshold");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synthesize", "Generate and filter SFT trajectories");
  synth_cmd->add_option("--in", synth.in, "JSONL of {id, question, answer, difficulty}")->required();
  synth_cmd->add_option("--out", synth.out, "output directory")->required();
  synth_cmd->add_option("--retries", synth.retries, "full-chain resamples after a filter failure");

  RewardArgs reward;
  auto* reward_cmd = app.add_subcommand("reward", "Compute composite rewards");
  reward_cmd->add_option("--in", reward.in, "JSONL of {trajectory, gold, verdicts}")->required();
  reward_cmd->add_option("--out", reward.out, "output JSONL (default stdout)");
  reward_cmd->add_option("--lambda-a", reward.lambda_a, "accuracy weight");
  reward_cmd->add_option("--lambda-f", reward.lambda_f, "format penalty weight");
  reward_cmd->add_option("--lambda-s", reward.lambda_s, "spoiler penalty weight");
  reward_cmd->add_option("--tau-s", reward.tau_s, "spoiler threshold");

  GrpoArgs grpo_args;
  auto* grpo_cmd = app.add_subcommand("grpo-check", "Evaluate the GRPO objective for one group");
  grpo_cmd->add_option("--in", grpo_args.in, "JSON rollout group")->required();
  grpo_cmd->add_option("--epsilon", grpo_args.epsilon, "clip range");
  grpo_cmd->add_option("--beta", grpo_args.beta, "KL coefficient");
  grpo_cmd->add_flag("--token-level", grpo_args.token_level, "average over all tokens instead of per sequence");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "maj@k / pass@k evaluation");
  eval_cmd->add_option("--bench", ev.bench, "JSONL of {id, question, answer}")->required();
  eval_cmd->add_option("--k", ev.k, "samples per problem");
  eval_cmd->add_option("--perturb", ev.perturb, "shuffled|mismatched|generic");
  eval_cmd->add_option("--out", ev.out, "directory for report and transcripts");
  eval_cmd->add_option("--replay", ev.replay, "directory with transcripts.jsonl; runs offline");
  eval_cmd->add_option("--name", ev.name, "benchmark name in the report");
  eval_cmd->add_option("--generic-text", ev.generic_text, "replacement preplan for generic mode");
  eval_cmd->add_flag("--json", ev.json, "print the JSON report instead of the table");

  PerturbArgs pert;
  auto* perturb_cmd = app.add_subcommand("perturb", "Build perturbed preplan prefixes");
  perturb_cmd->add_option("--in", pert.in, "JSONL of {id, preplan} or {id, completion}")->required();
  perturb_cmd->add_option("--mode", pert.mode, "shuffled|mismatched|generic")->required();
  perturb_cmd->add_option("--out", pert.out, "output JSONL (default stdout)");
  perturb_cmd->add_option("--generic-text", pert.generic_text, "replacement preplan for generic mode");

  AttributeArgs attr;
  auto* attribute_cmd = app.add_subcommand("attribute", "Attribute wrong answers to a root cause");
  attribute_cmd->add_option("--in", attr.in, "JSONL of {id, question, gold, solution}")->required();
  attribute_cmd->add_option("--out", attr.out, "output JSONL (default stdout)");
  attribute_cmd->add_option("--summary", attr.summary, "write facet counts here");

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  if (storage.empty()) storage.push_back("ppc");
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, io.out, io.err);
    if (code == 0) return kOk;
    io.err << app.help();
    return kUsage;
  }

  try {
    const auto level = parse_level(g.log_level);
    if (!level) throw UsageError("unknown --log-level: " + g.log_level);
    log::set_level(*level);
    const auto cfg = resolve_config(g, io.env);
    if (*lint_cmd) return cmd_lint(lint, cfg, io);
    if (*synth_cmd) return cmd_synthesize(synth, cfg, io);
    if (*reward_cmd) return cmd_reward(reward, cfg, io);
    if (*grpo_cmd) return cmd_grpo_check(grpo_args, cfg, io);
    if (*eval_cmd) return cmd_eval(ev, cfg, io);
    if (*perturb_cmd) return cmd_perturb(pert, cfg, io);
    if (*attribute_cmd) return cmd_attribute(attr, cfg, io);
    throw UsageError("no subcommand");
  } catch (const UsageError& e) {
    log::error(e.what());
    return kUsage;
  } catch (const ConfigError& e) {
    log::error(e.what());
    return kUsage;
  } catch (const ClientError& e) {
    log::error("endpoint failure", {{"kind", to_string(e.kind())}, {"cause", e.what()}});
    return kEndpointFailure;
  } catch (const std::exception& e) {
    log::error(e.what());
    return kDataError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, Io{std::cout, std::cerr, process_env()});
}

}  // namespace ppc::cli
