#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

// Line-delimited JSON logging to stderr.
namespace ppc::log {

enum class Level { Debug = 0, Info, Warn, Error, Off };

void set_level(Level level);
Level level();

void write(Level level, std::string_view msg, const nlohmann::json& fields = nlohmann::json::object());

inline void debug(std::string_view msg, const nlohmann::json& f = nlohmann::json::object()) {
  write(Level::Debug, msg, f);
}
inline void info(std::string_view msg, const nlohmann::json& f = nlohmann::json::object()) {
  write(Level::Info, msg, f);
}
inline void warn(std::string_view msg, const nlohmann::json& f = nlohmann::json::object()) {
  write(Level::Warn, msg, f);
}
inline void error(std::string_view msg, const nlohmann::json& f = nlohmann::json::object()) {
  write(Level::Error, msg, f);
}

}  // namespace ppc::log
