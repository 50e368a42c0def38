#include "ppc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>

namespace ppc {

namespace {

nlohmann::json endpoint_json(const EndpointConfig& e) {
  return {{"url", e.url}, {"model", e.model}, {"api_key", e.api_key},
          {"timeout_seconds", e.timeout_seconds}};
}

EndpointConfig endpoint_from_json(const nlohmann::json& j) {
  EndpointConfig e;
  e.url = j.value("url", e.url);
  e.model = j.value("model", e.model);
  e.api_key = j.value("api_key", e.api_key);
  e.timeout_seconds = j.value("timeout_seconds", e.timeout_seconds);
  if (e.timeout_seconds <= 0) throw ConfigError("timeout_seconds must be positive");
  return e;
}

bool known_role(std::string_view name) {
  return name == "default" || std::find(kRoles.begin(), kRoles.end(), name) != kRoles.end();
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void overlay(EndpointConfig& e, const EnvLookup& env, const std::string& prefix) {
  if (auto v = env(prefix + "ENDPOINT")) e.url = *v;
  if (auto v = env(prefix + "MODEL")) e.model = *v;
  if (auto v = env(prefix + "API_KEY")) e.api_key = *v;
}

}  // namespace

RetryPolicy RetrySettings::policy() const {
  RetryPolicy p;
  p.max_attempts = max_attempts;
  p.base_delay = std::chrono::milliseconds(base_delay_ms);
  p.multiplier = multiplier;
  return p;
}

EndpointConfig PipelineConfig::endpoint_for(std::string_view role) const {
  EndpointConfig e;
  if (auto it = endpoints.find("default"); it != endpoints.end()) e = it->second;
  if (auto it = endpoints.find(std::string(role)); it != endpoints.end()) {
    const auto& r = it->second;
    if (!r.url.empty()) e.url = r.url;
    if (!r.model.empty()) e.model = r.model;
    if (!r.api_key.empty()) e.api_key = r.api_key;
    e.timeout_seconds = r.timeout_seconds;
  }
  if (e.url.empty()) {
    throw ConfigError("no endpoint configured for role " + std::string(role) +
                      " (set PPC_ENDPOINT, PPC_" + upper(role) + "_ENDPOINT or the config file)");
  }
  return e;
}

Role PipelineConfig::role(std::string_view name, const SamplingParams& params) const {
  Role r;
  r.client = std::make_shared<BoundedClient>(make_client(endpoint_for(name)), max_in_flight);
  r.retry = retry.policy();
  r.sampling = params;
  return r;
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json endpoints = nlohmann::json::object();
  for (const auto& [name, e] : c.endpoints) endpoints[name] = endpoint_json(e);
  nlohmann::json j = {
      {"endpoints", endpoints},
      {"sampling",
       {{"temperature", c.sampling.temperature},
        {"top_p", c.sampling.top_p},
        {"max_tokens", c.sampling.max_tokens}}},
      {"spoiler", to_json(c.spoiler)},
      {"reward", to_json(c.reward)},
      {"bounds", {{"min_tokens", c.bounds.min_tokens}, {"max_tokens", c.bounds.max_tokens}}},
      {"parallelism", c.parallelism},
      {"max_in_flight", c.max_in_flight},
      {"resample_retries", c.resample_retries},
      {"retry",
       {{"max_attempts", c.retry.max_attempts},
        {"base_delay_ms", c.retry.base_delay_ms},
        {"multiplier", c.retry.multiplier}}}};
  j["grpo"] = c.grpo ? grpo::to_json(*c.grpo) : nlohmann::json(nullptr);
  j["seed"] = c.seed ? nlohmann::json(*c.seed) : nlohmann::json(nullptr);
  return j;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  try {
    if (j.contains("endpoints")) {
      for (const auto& [name, e] : j.at("endpoints").items()) {
        if (!known_role(name)) throw ConfigError("unknown role in endpoints: " + name);
        c.endpoints[name] = endpoint_from_json(e);
      }
    }
    if (j.contains("sampling")) {
      const auto& s = j.at("sampling");
      c.sampling.temperature = s.value("temperature", c.sampling.temperature);
      c.sampling.top_p = s.value("top_p", c.sampling.top_p);
      c.sampling.max_tokens = s.value("max_tokens", c.sampling.max_tokens);
    }
    if (j.contains("spoiler")) c.spoiler = spoiler_config_from_json(j.at("spoiler"));
    if (j.contains("reward")) c.reward = reward_weights_from_json(j.at("reward"));
    if (j.contains("grpo") && !j.at("grpo").is_null()) c.grpo = grpo::grpo_config_from_json(j.at("grpo"));
    if (j.contains("bounds")) {
      const auto& b = j.at("bounds");
      c.bounds.min_tokens = b.value("min_tokens", c.bounds.min_tokens);
      c.bounds.max_tokens = b.value("max_tokens", c.bounds.max_tokens);
    }
    c.parallelism = j.value("parallelism", c.parallelism);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.resample_retries = j.value("resample_retries", c.resample_retries);
    if (j.contains("retry")) {
      const auto& r = j.at("retry");
      c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
      c.retry.base_delay_ms = r.value("base_delay_ms", c.retry.base_delay_ms);
      c.retry.multiplier = r.value("multiplier", c.retry.multiplier);
    }
    if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  if (c.bounds.min_tokens > c.bounds.max_tokens) throw ConfigError("bounds.min_tokens > max_tokens");
  if (c.parallelism < 1 || c.max_in_flight < 1) throw ConfigError("parallelism must be at least 1");
  if (c.retry.max_attempts < 1 || c.retry.base_delay_ms < 0 || c.retry.multiplier < 1) {
    throw ConfigError("invalid retry settings");
  }
  if (c.resample_retries < 0) throw ConfigError("resample_retries must be non-negative");
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
  return pipeline_config_from_json(j);
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
}

void apply_env(PipelineConfig& c, const EnvLookup& env) {
  const bool had_default = c.endpoints.count("default") > 0;
  overlay(c.endpoints["default"], env, "PPC_");
  for (auto role : kRoles) {
    const std::string prefix = "PPC_" + upper(role) + "_";
    if (env(prefix + "ENDPOINT") || env(prefix + "MODEL") || env(prefix + "API_KEY")) {
      overlay(c.endpoints[std::string(role)], env, prefix);
    }
  }
  if (!had_default && c.endpoints["default"].url.empty() && c.endpoints["default"].model.empty() &&
      c.endpoints["default"].api_key.empty()) {
    c.endpoints.erase("default");
  }
}

}  // namespace ppc
