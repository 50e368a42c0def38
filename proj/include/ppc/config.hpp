#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "ppc/client.hpp"
#include "ppc/grpo.hpp"
#include "ppc/reward.hpp"
#include "ppc/spoiler.hpp"

namespace ppc {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Roles that talk to a model. "default" is the fallback entry.
inline constexpr std::array<std::string_view, 6> kRoles = {"preplan_gen", "plan_gen", "executor",
                                                           "cleanup",     "judge",    "policy"};

struct RetrySettings {
  int max_attempts = 3;
  int base_delay_ms = 1000;
  int multiplier = 4;

  RetryPolicy policy() const;
};

struct PipelineConfig {
  std::map<std::string, EndpointConfig> endpoints;  // role name or "default"
  SamplingParams sampling;
  SpoilerConfig spoiler;
  RewardWeights reward;
  std::optional<grpo::GrpoConfig> grpo;
  LengthBounds bounds;
  int parallelism = 1;
  int max_in_flight = 8;
  int resample_retries = 0;
  RetrySettings retry;
  std::optional<std::uint64_t> seed;

  // "default" overlaid with the role's non-empty fields; throws ConfigError
  // when no URL results.
  EndpointConfig endpoint_for(std::string_view role) const;
  // A retrying, bounded client for the role.
  Role role(std::string_view role, const SamplingParams& sampling) const;
};

nlohmann::json to_json(const PipelineConfig& c);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// PPC_ENDPOINT / PPC_MODEL / PPC_API_KEY fill the "default" entry;
// PPC_<ROLE>_ENDPOINT etc. fill the role entry.
void apply_env(PipelineConfig& c, const EnvLookup& env);

}  // namespace ppc
