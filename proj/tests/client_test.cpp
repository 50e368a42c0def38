#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "ppc/client.hpp"
#include "support/fixtures.hpp"

using namespace ppc;
using namespace std::chrono_literals;

namespace {

GenerationRequest req(std::string prompt) {
  GenerationRequest r;
  r.user_prompt = std::move(prompt);
  return r;
}

// Fails `failures` times with `kind`, then answers "ok".
class Flaky : public LlmClient {
 public:
  Flaky(int failures, ClientErrorKind kind) : failures_(failures), kind_(kind) {}
  std::string complete(const GenerationRequest&) override {
    if (calls++ < failures_) throw ClientError(kind_, "flaky");
    return "ok";
  }
  int calls = 0;

 private:
  int failures_;
  ClientErrorKind kind_;
};

struct LocalServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;

  LocalServer() = default;
  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LocalServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
  EndpointConfig endpoint(const std::string& path = "/v1/chat/completions") const {
    EndpointConfig c;
    c.url = "http://127.0.0.1:" + std::to_string(port) + path;
    c.model = "m";
    c.api_key = "secret";
    c.timeout_seconds = 5;
    return c;
  }
};

std::string chat_reply(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

}  // namespace

TEST_CASE("request validation") {
  auto r = req("hi");
  CHECK_NOTHROW(r.validate());
  r.temperature = -0.1;
  CHECK_THROWS(r.validate());
  r = req("hi");
  r.top_p = 0.0;
  CHECK_THROWS(r.validate());
  r = req("hi");
  r.max_tokens = 0;
  CHECK_THROWS(r.validate());
}

TEST_CASE("request key ignores purpose and covers sampling") {
  auto a = req("q");
  auto b = req("q");
  b.purpose = "other";
  CHECK(request_key(a) == request_key(b));
  b.seed = 4;
  CHECK(request_key(a) != request_key(b));
  auto c = req("q");
  c.forced_prefix = "<preplan>";
  CHECK(request_key(a) != request_key(c));
}

TEST_CASE("scripted clients") {
  auto canned = ScriptedClient::canned({{"a", "A"}}, "?");
  CHECK(canned->complete(req("a")) == "A");
  CHECK(canned->complete(req("b")) == "?");

  const auto path = std::filesystem::temp_directory_path() / "ppc_scripted_test.json";
  {
    std::ofstream out(path);
    out << R"({"rules": [{"contains": "plan", "response": "P"}, {"contains": "pre", "response": "Q"}]})";
  }
  auto file = ScriptedClient::from_file(path);
  CHECK(file->complete(req("preplan please")) == "P");
  CHECK(file->complete(req("prefix")) == "Q");
  try {
    file->complete(req("zzz"));
    FAIL("expected ClientError");
  } catch (const ClientError& e) {
    CHECK(e.kind() == ClientErrorKind::ProtocolError);
  }
  std::filesystem::remove(path);
}

TEST_CASE("forced prefix is prepended to the continuation") {
  auto client = ScriptedClient::canned({}, " continuation");
  auto r = req("x");
  r.forced_prefix = "<preplan>P</preplan>\n<plan>";
  CHECK(generate(*client, r) == "<preplan>P</preplan>\n<plan> continuation");
}

TEST_CASE("retry: backoff schedule and attempt budget") {
  RetryPolicy policy;
  CHECK(policy.delay_before_retry(0) == 1000ms);
  CHECK(policy.delay_before_retry(1) == 4000ms);

  std::vector<std::chrono::milliseconds> slept;
  policy.sleep = [&](std::chrono::milliseconds d) { slept.push_back(d); };

  Flaky two(2, ClientErrorKind::Timeout);
  CHECK(generate(two, req("x"), policy) == "ok");
  CHECK(two.calls == 3);
  CHECK(slept == std::vector<std::chrono::milliseconds>{1000ms, 4000ms});

  slept.clear();
  Flaky three(3, ClientErrorKind::RateLimited);
  CHECK_THROWS_AS(generate(three, req("x"), policy), ClientError);
  CHECK(three.calls == 3);
  CHECK(slept.size() == 2);

  slept.clear();
  Flaky proto(1, ClientErrorKind::ProtocolError);
  CHECK_THROWS_AS(generate(proto, req("x"), policy), ClientError);
  CHECK(proto.calls == 1);
  CHECK(slept.empty());

  FailingClient failing(ClientErrorKind::Timeout);
  CHECK_THROWS_AS(generate(failing, req("x"), fixtures::no_sleep_retry(5)), ClientError);
  CHECK(failing.calls() == 5);
}

TEST_CASE("role applies its sampling") {
  double seen = -1;
  Role role = fixtures::role_of(std::make_shared<ScriptedClient>([&](const GenerationRequest& r) {
    seen = r.temperature;
    return std::string("x");
  }));
  role.sampling.temperature = 0.3;
  CHECK(role.generate(req("q")) == "x");
  CHECK(seen == 0.3);
  CHECK_THROWS(Role{}.generate(req("q")));
}

TEST_CASE("recording, bounded and replay") {
  auto inner = ScriptedClient::canned({{"a", "A"}, {"b", "B"}});
  auto recorder = std::make_shared<RecordingClient>(inner);
  BoundedClient bounded(recorder, 2);
  CHECK(bounded.complete(req("a")) == "A");
  CHECK(bounded.complete(req("b")) == "B");
  const auto log = recorder->exchanges();
  REQUIRE(log.size() == 2);
  CHECK(log[1].response == "B");

  const auto path = std::filesystem::temp_directory_path() / "ppc_replay_test.jsonl";
  {
    std::ofstream out(path);
    for (const auto& e : log) out << transcript_line(e).dump() << "\n";
  }
  auto replay = ReplayClient::from_jsonl(path);
  CHECK(replay->complete(req("a")) == "A");
  CHECK(replay->complete(req("b")) == "B");
  CHECK_THROWS_AS(replay->complete(req("c")), ClientError);
  std::filesystem::remove(path);
}

TEST_CASE("bounded client caps concurrency") {
  std::atomic<int> in_flight{0}, peak{0};
  auto slow = std::make_shared<ScriptedClient>([&](const GenerationRequest&) {
    const int now = ++in_flight;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(5ms);
    --in_flight;
    return std::string("x");
  });
  BoundedClient bounded(slow, 3);
  std::vector<std::thread> threads;
  for (int i = 0; i < 12; ++i) threads.emplace_back([&] { bounded.complete(req("q")); });
  for (auto& t : threads) t.join();
  CHECK(peak.load() <= 3);
  CHECK(peak.load() >= 1);
}

TEST_CASE("http body shape") {
  auto r = req("question");
  r.system_prompt = "sys";
  r.temperature = 0.0;
  r.top_p = 1.0;
  r.max_tokens = 64;
  r.seed = 9;
  r.purpose = "judge";
  auto body = HttpClient::build_body("m", r);
  CHECK(body["model"] == "m");
  CHECK(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][1]["content"] == "question");
  CHECK(body["temperature"] == 0.0);
  CHECK(body["max_tokens"] == 64);
  CHECK(body["seed"] == 9);
  CHECK_FALSE(body.contains("purpose"));
  CHECK_FALSE(body.contains("continue_final_message"));

  r.forced_prefix = "<preplan>";
  body = HttpClient::build_body("m", r);
  CHECK(body["messages"].back()["role"] == "assistant");
  CHECK(body["messages"].back()["content"] == "<preplan>");
  CHECK(body["continue_final_message"] == true);

  CHECK(HttpClient::read_content(chat_reply("hello")) == "hello");
  CHECK_THROWS_AS(HttpClient::read_content("{}"), ClientError);
  CHECK_THROWS_AS(HttpClient::read_content("not json"), ClientError);
}

TEST_CASE("http client against a local server") {
  LocalServer srv;
  std::string seen_auth, seen_body;
  srv.server.Post("/v1/chat/completions", [&](const httplib::Request& rq, httplib::Response& rs) {
    seen_auth = rq.get_header_value("Authorization");
    seen_body = rq.body;
    rs.set_content(chat_reply("served"), "application/json");
  });
  srv.server.Post("/limited", [](const httplib::Request&, httplib::Response& rs) { rs.status = 429; });
  srv.server.Post("/broken", [](const httplib::Request&, httplib::Response& rs) { rs.status = 503; });
  srv.server.Post("/bad", [](const httplib::Request&, httplib::Response& rs) { rs.status = 400; });
  srv.server.Post("/garbage", [](const httplib::Request&, httplib::Response& rs) {
    rs.set_content("<html>", "text/html");
  });
  srv.start();

  HttpClient ok(srv.endpoint());
  CHECK(ok.complete(req("q")) == "served");
  CHECK(seen_auth == "Bearer secret");
  CHECK(nlohmann::json::parse(seen_body)["messages"][0]["content"] == "q");

  auto kind_of = [&](const std::string& path) {
    HttpClient c(srv.endpoint(path));
    try {
      c.complete(req("q"));
    } catch (const ClientError& e) {
      return std::optional<ClientErrorKind>(e.kind());
    }
    return std::optional<ClientErrorKind>();
  };
  CHECK(kind_of("/limited") == ClientErrorKind::RateLimited);
  CHECK(kind_of("/broken") == ClientErrorKind::Timeout);
  CHECK(kind_of("/bad") == ClientErrorKind::ProtocolError);
  CHECK(kind_of("/garbage") == ClientErrorKind::ProtocolError);
}

TEST_CASE("unreachable endpoint is a retryable failure") {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  EndpointConfig cfg;
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.timeout_seconds = 2;
  auto client = make_client(cfg);
  try {
    generate(*client, req("q"), fixtures::no_sleep_retry(2));
    FAIL("expected ClientError");
  } catch (const ClientError& e) {
    CHECK(e.kind() == ClientErrorKind::Timeout);
  }
  cfg.url = "no-scheme";
  CHECK_THROWS(make_client(cfg));
}
