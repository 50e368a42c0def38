#include "ppc/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "ppc/answer.hpp"
#include "ppc/log.hpp"
#include "ppc/parallel.hpp"
#include "ppc/prompts.hpp"

namespace ppc {

namespace {

constexpr std::uint64_t kOriginalStream = 0xFFFFFFFFULL;

double round2(double x) { return std::round(x * 100.0) / 100.0; }

GenerationRequest eval_request(const ProblemRecord& p, const EvalConfig& cfg, std::uint64_t seed) {
  GenerationRequest req;
  req.system_prompt = std::string(prompts::kEvalSystemPrompt);
  req.user_prompt = p.question;
  req.apply(cfg.sampling);
  req.seed = seed;
  req.purpose = "eval_sample";
  return req;
}

}  // namespace

void score_record(EvalRecord& rec, const AnswerEquivalence& eq, const std::vector<bool>& failed) {
  const std::size_t k = rec.samples.size();
  rec.parsed.assign(k, std::nullopt);
  rec.answers.assign(k, std::nullopt);
  rec.verdicts.assign(k, false);
  rec.token_counts.assign(k, 0);
  rec.failed.assign(k, false);
  rec.failed_samples = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (j < failed.size() && failed[j]) {
      rec.failed[j] = true;
      ++rec.failed_samples;
      continue;
    }
    const std::string& text = rec.samples[j];
    try {
      rec.parsed[j] = parse_trajectory(text);
    } catch (const std::exception&) {
    }
    std::string_view generated = text;
    if (rec.forced_prefix && generated.substr(0, rec.forced_prefix->size()) == *rec.forced_prefix) {
      generated.remove_prefix(rec.forced_prefix->size());
    }
    rec.token_counts[j] = count_tokens(generated);
    if (const auto boxed = extract_boxed_lenient(text)) {
      rec.answers[j] = normalize_answer(*boxed);
      rec.verdicts[j] = eq(*rec.answers[j], rec.problem.gold_answer);
    }
  }
  rec.pass_correct = std::any_of(rec.verdicts.begin(), rec.verdicts.end(), [](bool v) { return v; });
  rec.maj_correct = maj_at_k(rec.answers, rec.problem.gold_answer, eq);
}

EvalReport summarize_eval(std::vector<EvalRecord> records, const EvalConfig& cfg) {
  EvalReport r;
  r.benchmark = cfg.benchmark;
  r.k = cfg.k;
  r.seed = cfg.seed;
  r.perturb = cfg.perturb;
  std::size_t maj = 0, pass = 0, samples = 0, tokens = 0;
  for (const auto& rec : records) {
    if (rec.generation_failed()) {
      ++r.generation_failures;
      continue;
    }
    ++r.evaluated;
    maj += rec.maj_correct;
    pass += rec.pass_correct;
    for (std::size_t j = 0; j < rec.samples.size(); ++j) {
      if (rec.failed[j]) continue;
      ++samples;
      tokens += rec.token_counts[j];
    }
  }
  if (r.evaluated > 0) {
    r.maj_pct = 100.0 * static_cast<double>(maj) / static_cast<double>(r.evaluated);
    r.pass_pct = 100.0 * static_cast<double>(pass) / static_cast<double>(r.evaluated);
  }
  if (samples > 0) r.mean_tokens = static_cast<double>(tokens) / static_cast<double>(samples);
  r.records = std::move(records);
  return r;
}

EvalReport evaluate(const std::vector<ProblemRecord>& problems, const Role& model,
                    const EvalConfig& cfg) {
  if (cfg.k < 1) throw std::invalid_argument("k must be at least 1");
  require_unique_ids(problems);

  auto recorder = std::make_shared<RecordingClient>(model.client);
  Role role = model;
  role.client = recorder;

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::uint64_t> seeds(problems.size());
  for (auto& s : seeds) s = rng();

  // Original preplans, needed by every mode except generic.
  std::vector<std::optional<std::string>> originals(problems.size());
  const bool needs_original = cfg.perturb && *cfg.perturb != PerturbMode::Generic;
  if (needs_original) {
    parallel_for(problems.size(), cfg.parallelism, [&](std::size_t i) {
      auto req = eval_request(problems[i], cfg, mix_seed(seeds[i], kOriginalStream));
      req.purpose = "eval_original";
      try {
        originals[i] = extract_preplan(role.generate(std::move(req)));
      } catch (const ClientError& e) {
        log::warn("original generation failed", {{"id", problems[i].id}, {"cause", e.what()}});
      }
      if (!originals[i]) log::warn("no original preplan", {{"id", problems[i].id}});
    });
  }

  PerturbationSpec spec;
  std::vector<std::size_t> pool_index(problems.size(), 0);
  if (cfg.perturb) {
    spec.mode = *cfg.perturb;
    spec.seed = cfg.seed;
    spec.generic_text = cfg.generic_text;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      if (!originals[i]) continue;
      pool_index[i] = spec.pool.size();
      spec.pool.push_back(*originals[i]);
    }
    spec.validate();
  }

  const auto k = static_cast<std::size_t>(cfg.k);
  std::vector<EvalRecord> records(problems.size());
  parallel_for(problems.size(), cfg.parallelism, [&](std::size_t i) {
    EvalRecord& rec = records[i];
    rec.problem = problems[i];
    rec.samples.assign(k, std::string{});
    std::vector<bool> failed(k, false);
    if (needs_original && !originals[i]) {
      failed.assign(k, true);
    } else {
      if (cfg.perturb) {
        rec.forced_prefix =
            preplan_prefix(perturbed_preplan_text(originals[i].value_or(""), spec, pool_index[i]));
      }
      for (std::size_t j = 0; j < k; ++j) {
        auto req = eval_request(problems[i], cfg, mix_seed(seeds[i], j));
        req.forced_prefix = rec.forced_prefix;
        try {
          rec.samples[j] = role.generate(std::move(req));
        } catch (const ClientError& e) {
          failed[j] = true;
          log::warn("sample failed", {{"id", problems[i].id}, {"sample", j}, {"cause", e.what()}});
        }
      }
    }
    score_record(rec, make_equivalence(cfg.equivalence_judge, problems[i].question), failed);
  });

  auto report = summarize_eval(std::move(records), cfg);
  report.transcript = recorder->exchanges();
  std::stable_sort(report.transcript.begin(), report.transcript.end(),
                   [](const Exchange& a, const Exchange& b) {
                     return request_key(a.request) < request_key(b.request);
                   });
  return report;
}

nlohmann::json to_json(const EvalRecord& r) {
  nlohmann::json answers = nlohmann::json::array();
  for (const auto& a : r.answers) answers.push_back(a ? nlohmann::json(*a) : nlohmann::json(nullptr));
  nlohmann::json parsed = nlohmann::json::array();
  for (const auto& t : r.parsed) parsed.push_back(t.has_value());
  return {{"id", r.problem.id},
          {"gold", r.problem.gold_answer},
          {"forced_prefix", r.forced_prefix ? nlohmann::json(*r.forced_prefix) : nlohmann::json(nullptr)},
          {"samples", r.samples},
          {"well_formed", parsed},
          {"answers", answers},
          {"verdicts", r.verdicts},
          {"maj_correct", r.maj_correct},
          {"pass_correct", r.pass_correct},
          {"token_counts", r.token_counts},
          {"failed_samples", r.failed_samples}};
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j = {{"benchmark", benchmark},
                      {"k", k},
                      {"seed", seed},
                      {"perturb", perturb ? nlohmann::json(to_string(*perturb)) : nlohmann::json(nullptr)},
                      {"problems", records.size()},
                      {"evaluated", evaluated},
                      {"generation_failures", generation_failures},
                      {"maj_at_k", round2(maj_pct)},
                      {"pass_at_k", round2(pass_pct)}};
  j["mean_tokens"] = mean_tokens ? nlohmann::json(round2(*mean_tokens)) : nlohmann::json("n/a");
  j["mean_tokens_k"] = format_thousands(mean_tokens);
  return j;
}

std::string EvalReport::table() const {
  const std::string ks = std::to_string(k);
  const std::vector<std::string> head = {"benchmark", "mode",          "problems", "gen_fail",
                                         "maj@" + ks, "pass@" + ks,   "tokens(K)"};
  const std::vector<std::string> row = {benchmark,
                                        perturb ? std::string(to_string(*perturb)) : "original",
                                        std::to_string(evaluated),
                                        std::to_string(generation_failures),
                                        format_percent(maj_pct),
                                        format_percent(pass_pct),
                                        format_thousands(mean_tokens)};
  std::string out;
  for (const auto* line : {&head, &row}) {
    for (std::size_t c = 0; c < head.size(); ++c) {
      const std::size_t width = std::max(head[c].size(), row[c].size());
      const std::string& cell = (*line)[c];
      if (c) out += "  ";
      // text left-aligned, numbers right-aligned
      if (c < 2) {
        out += cell + std::string(width - cell.size(), ' ');
      } else {
        out += std::string(width - cell.size(), ' ') + cell;
      }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

void write_eval(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  open("report.json") << report.to_json().dump(2) << '\n';
  open("report.txt") << report.table();
  auto records = open("records.jsonl");
  for (const auto& r : report.records) records << to_json(r).dump() << '\n';
  auto transcripts = open("transcripts.jsonl");
  for (const auto& e : report.transcript) transcripts << transcript_line(e).dump() << '\n';
}

}  // namespace ppc
