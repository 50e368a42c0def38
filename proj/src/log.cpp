#include "ppc/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace ppc::log {

namespace {

std::atomic<Level> g_level{Level::Info};
std::mutex g_mutex;

const char* name(Level l) {
  switch (l) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
    case Level::Off: return "off";
  }
  return "?";
}

}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void write(Level l, std::string_view msg, const nlohmann::json& fields) {
  if (l < g_level.load() || g_level.load() == Level::Off) return;
  nlohmann::json line = {{"level", name(l)}, {"msg", msg}};
  if (fields.is_object()) {
    for (const auto& [k, v] : fields.items()) line[k] = v;
  }
  const auto text = line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  std::lock_guard lock(g_mutex);
  std::cerr << text << '\n';
}

}  // namespace ppc::log
