#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ppc {

struct SamplingParams {
  double temperature = 1.0;
  double top_p = 0.95;
  int max_tokens = 4096;
};

struct GenerationRequest {
  std::string system_prompt;
  std::string user_prompt;
  // Assistant prefill; the generated text is forced_prefix + continuation.
  std::optional<std::string> forced_prefix;
  double temperature = 1.0;
  double top_p = 0.95;
  int max_tokens = 4096;
  std::optional<std::uint64_t> seed;
  // Caller-side label (stage or judge name); never sent on the wire.
  std::string purpose;

  void validate() const;
  void apply(const SamplingParams& p) {
    temperature = p.temperature;
    top_p = p.top_p;
    max_tokens = p.max_tokens;
  }
};

// Stable identity of a request, used for replay lookup.
std::string request_key(const GenerationRequest& req);

enum class ClientErrorKind { Timeout, ProtocolError, RateLimited };

std::string_view to_string(ClientErrorKind k);

class ClientError : public std::runtime_error {
 public:
  ClientError(ClientErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ClientErrorKind kind() const { return kind_; }
  bool retryable() const { return kind_ != ClientErrorKind::ProtocolError; }

 private:
  ClientErrorKind kind_;
};

// One completion attempt; returns only the continuation text.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const GenerationRequest& req) = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{1000};
  int multiplier = 4;  // 1s, 4s, 16s, ...
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleep_for

  std::chrono::milliseconds delay_before_retry(int retry_index) const;
};

// Retries retryable ClientErrors with exponential backoff, at most
// max_attempts calls in total, and prepends the forced prefix.
std::string generate(LlmClient& client, const GenerationRequest& req, const RetryPolicy& retry = {});

// A client plus how to call it.
struct Role {
  std::shared_ptr<LlmClient> client;
  RetryPolicy retry;
  SamplingParams sampling;

  std::string generate(GenerationRequest req) const;
};

// Deterministic in-process client: the response is a pure function of the
// request.
class ScriptedClient : public LlmClient {
 public:
  using Responder = std::function<std::string(const GenerationRequest&)>;

  explicit ScriptedClient(Responder responder);
  // Exact user_prompt lookup with a fallback for unknown prompts.
  static std::shared_ptr<ScriptedClient> canned(std::map<std::string, std::string> by_prompt,
                                                std::string fallback = {});
  // JSON file: {"rules": [{"contains": s, "response": r}, ...], "default": r}.
  // First rule whose needle occurs in the user prompt wins.
  static std::shared_ptr<ScriptedClient> from_file(const std::filesystem::path& path);

  std::string complete(const GenerationRequest& req) override;

 private:
  Responder responder_;
};

// Always fails with the given error kind; counts calls.
class FailingClient : public LlmClient {
 public:
  explicit FailingClient(ClientErrorKind kind) : kind_(kind) {}
  std::string complete(const GenerationRequest& req) override;
  int calls() const { return calls_; }

 private:
  ClientErrorKind kind_;
  std::atomic<int> calls_{0};
};

struct Exchange {
  GenerationRequest request;
  std::string response;
};

// Decorator that captures every successful exchange.
class RecordingClient : public LlmClient {
 public:
  explicit RecordingClient(std::shared_ptr<LlmClient> inner) : inner_(std::move(inner)) {}
  std::string complete(const GenerationRequest& req) override;
  std::vector<Exchange> exchanges() const;

 private:
  std::shared_ptr<LlmClient> inner_;
  mutable std::mutex mutex_;
  std::vector<Exchange> log_;
};

// Decorator bounding the number of in-flight requests.
class BoundedClient : public LlmClient {
 public:
  BoundedClient(std::shared_ptr<LlmClient> inner, int max_in_flight);
  std::string complete(const GenerationRequest& req) override;

 private:
  std::shared_ptr<LlmClient> inner_;
  std::counting_semaphore<1024> slots_;
};

// Serves responses from persisted transcripts; unknown requests are a
// ProtocolError so replays never silently go online.
class ReplayClient : public LlmClient {
 public:
  explicit ReplayClient(std::map<std::string, std::string> by_key) : by_key_(std::move(by_key)) {}
  static std::shared_ptr<ReplayClient> from_jsonl(const std::filesystem::path& path);
  std::string complete(const GenerationRequest& req) override;

 private:
  std::map<std::string, std::string> by_key_;
};

nlohmann::json transcript_line(const Exchange& e);

struct EndpointConfig {
  std::string url;  // http(s)://host[:port]/path, or scripted:<file>
  std::string model;
  std::string api_key;
  double timeout_seconds = 120.0;
};

// OpenAI-style chat completions over HTTP.
class HttpClient : public LlmClient {
 public:
  explicit HttpClient(EndpointConfig cfg);
  std::string complete(const GenerationRequest& req) override;

  static nlohmann::json build_body(const std::string& model, const GenerationRequest& req);
  static std::string read_content(const std::string& body);

 private:
  EndpointConfig cfg_;
  std::string origin_;
  std::string path_;
};

std::shared_ptr<LlmClient> make_client(const EndpointConfig& cfg);

}  // namespace ppc
