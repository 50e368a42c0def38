#include "ppc/client.hpp"

#include <fstream>
#include <thread>

#include <httplib.h>

#include "ppc/log.hpp"

namespace ppc {

void GenerationRequest::validate() const {
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw std::invalid_argument("top_p must be in (0, 1]");
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
}

std::string request_key(const GenerationRequest& req) {
  nlohmann::json j = {{"system", req.system_prompt},
                      {"user", req.user_prompt},
                      {"prefix", req.forced_prefix ? nlohmann::json(*req.forced_prefix) : nlohmann::json(nullptr)},
                      {"seed", req.seed ? nlohmann::json(*req.seed) : nlohmann::json(nullptr)},
                      {"temperature", req.temperature},
                      {"top_p", req.top_p},
                      {"max_tokens", req.max_tokens}};
  return j.dump();
}

std::string_view to_string(ClientErrorKind k) {
  switch (k) {
    case ClientErrorKind::Timeout: return "Timeout";
    case ClientErrorKind::ProtocolError: return "ProtocolError";
    case ClientErrorKind::RateLimited: return "RateLimited";
  }
  return "?";
}

std::chrono::milliseconds RetryPolicy::delay_before_retry(int retry_index) const {
  auto d = base_delay;
  for (int i = 0; i < retry_index; ++i) d *= multiplier;
  return d;
}

std::string generate(LlmClient& client, const GenerationRequest& req, const RetryPolicy& retry) {
  req.validate();
  const int attempts = std::max(1, retry.max_attempts);
  for (int attempt = 1;; ++attempt) {
    try {
      std::string text = client.complete(req);
      return req.forced_prefix ? *req.forced_prefix + text : text;
    } catch (const ClientError& e) {
      if (!e.retryable() || attempt >= attempts) throw;
      const auto delay = retry.delay_before_retry(attempt - 1);
      log::warn("retrying request", {{"purpose", req.purpose},
                                     {"error", std::string(to_string(e.kind()))},
                                     {"attempt", attempt},
                                     {"delay_ms", delay.count()}});
      if (retry.sleep) {
        retry.sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
    }
  }
}

std::string Role::generate(GenerationRequest req) const {
  if (!client) throw std::logic_error("role has no client configured");
  req.apply(sampling);
  return ppc::generate(*client, req, retry);
}

ScriptedClient::ScriptedClient(Responder responder) : responder_(std::move(responder)) {}

std::shared_ptr<ScriptedClient> ScriptedClient::canned(std::map<std::string, std::string> by_prompt,
                                                       std::string fallback) {
  return std::make_shared<ScriptedClient>(
      [map = std::move(by_prompt), fallback = std::move(fallback)](const GenerationRequest& r) {
        const auto it = map.find(r.user_prompt);
        return it == map.end() ? fallback : it->second;
      });
}

std::shared_ptr<ScriptedClient> ScriptedClient::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scripted responses: " + path.string());
  const auto doc = nlohmann::json::parse(in);
  std::vector<std::pair<std::string, std::string>> rules;
  for (const auto& r : doc.value("rules", nlohmann::json::array())) {
    rules.emplace_back(r.at("contains").get<std::string>(), r.at("response").get<std::string>());
  }
  const bool has_default = doc.contains("default");
  const std::string fallback = doc.value("default", std::string{});
  return std::make_shared<ScriptedClient>(
      [rules = std::move(rules), has_default, fallback](const GenerationRequest& r) -> std::string {
        for (const auto& [needle, response] : rules) {
          if (r.user_prompt.find(needle) != std::string::npos) return response;
        }
        if (!has_default) throw ClientError(ClientErrorKind::ProtocolError, "no scripted response");
        return fallback;
      });
}

std::string ScriptedClient::complete(const GenerationRequest& req) { return responder_(req); }

std::string FailingClient::complete(const GenerationRequest&) {
  ++calls_;
  throw ClientError(kind_, "scripted failure: " + std::string(to_string(kind_)));
}

std::string RecordingClient::complete(const GenerationRequest& req) {
  std::string out = inner_->complete(req);
  std::lock_guard lock(mutex_);
  log_.push_back({req, out});
  return out;
}

std::vector<Exchange> RecordingClient::exchanges() const {
  std::lock_guard lock(mutex_);
  return log_;
}

BoundedClient::BoundedClient(std::shared_ptr<LlmClient> inner, int max_in_flight)
    : inner_(std::move(inner)), slots_(std::clamp(max_in_flight, 1, 1024)) {}

std::string BoundedClient::complete(const GenerationRequest& req) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return inner_->complete(req);
}

nlohmann::json transcript_line(const Exchange& e) {
  return {{"key", request_key(e.request)},
          {"purpose", e.request.purpose},
          {"user_prompt", e.request.user_prompt},
          {"response", e.response}};
}

std::shared_ptr<ReplayClient> ReplayClient::from_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open transcripts: " + path.string());
  std::map<std::string, std::string> by_key;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    by_key[j.at("key").get<std::string>()] = j.at("response").get<std::string>();
  }
  return std::make_shared<ReplayClient>(std::move(by_key));
}

std::string ReplayClient::complete(const GenerationRequest& req) {
  const auto it = by_key_.find(request_key(req));
  if (it == by_key_.end()) {
    throw ClientError(ClientErrorKind::ProtocolError, "request not found in transcripts");
  }
  return it->second;
}

HttpClient::HttpClient(EndpointConfig cfg) : cfg_(std::move(cfg)) {
  const auto scheme_end = cfg_.url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("endpoint URL needs a scheme: " + cfg_.url);
  }
  const auto path_start = cfg_.url.find('/', scheme_end + 3);
  origin_ = cfg_.url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/v1/chat/completions" : cfg_.url.substr(path_start);
}

nlohmann::json HttpClient::build_body(const std::string& model, const GenerationRequest& req) {
  nlohmann::json messages = nlohmann::json::array();
  if (!req.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", req.system_prompt}});
  }
  messages.push_back({{"role", "user"}, {"content", req.user_prompt}});
  nlohmann::json body = {{"model", model},
                         {"messages", messages},
                         {"temperature", req.temperature},
                         {"top_p", req.top_p},
                         {"max_tokens", req.max_tokens}};
  if (req.forced_prefix) {
    body["messages"].push_back({{"role", "assistant"}, {"content", *req.forced_prefix}});
    body["continue_final_message"] = true;
    body["add_generation_prompt"] = false;
  }
  if (req.seed) body["seed"] = *req.seed;
  return body;
}

std::string HttpClient::read_content(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ClientError(ClientErrorKind::ProtocolError,
                      std::string("malformed chat-completion response: ") + e.what());
  }
}

std::string HttpClient::complete(const GenerationRequest& req) {
  httplib::Client cli(origin_);
  const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
  cli.set_connection_timeout(std::min<time_t>(secs, 10), 0);
  cli.set_read_timeout(secs, 0);
  cli.set_write_timeout(secs, 0);
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

  const auto res =
      cli.Post(path_, headers, build_body(cfg_.model, req).dump(), "application/json");
  if (!res) {
    throw ClientError(ClientErrorKind::Timeout,
                      "request to " + origin_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429) throw ClientError(ClientErrorKind::RateLimited, "HTTP 429");
  if (res->status >= 500) {
    throw ClientError(ClientErrorKind::Timeout, "HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw ClientError(ClientErrorKind::ProtocolError, "HTTP " + std::to_string(res->status));
  }
  return read_content(res->body);
}

std::shared_ptr<LlmClient> make_client(const EndpointConfig& cfg) {
  constexpr std::string_view scripted = "scripted:";
  if (cfg.url.rfind(scripted, 0) == 0) {
    return ScriptedClient::from_file(cfg.url.substr(scripted.size()));
  }
  return std::make_shared<HttpClient>(cfg);
}

}  // namespace ppc
