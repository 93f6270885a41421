#pragma once

#include <cstdlib>
#include <memory>
#include <string_view>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

// Diagnostics go to stderr only. Verbosity comes from GPT_LOG_LEVEL
// (error, warn, info, debug); the default is info.

namespace ganeye::log {

inline spdlog::level::level_enum level_from_env() {
  const char* env = std::getenv("GPT_LOG_LEVEL");
  const std::string_view v = env ? env : "info";
  if (v == "error") return spdlog::level::err;
  if (v == "warn") return spdlog::level::warn;
  if (v == "debug") return spdlog::level::debug;
  return spdlog::level::info;
}

inline spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = std::make_shared<spdlog::logger>("ganeye", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("%Y-%m-%dT%H:%M:%S.%e [%l] %v");
    l->set_level(level_from_env());
    return l;
  }();
  return *instance;
}

template <typename... Args>
void error(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().error(fmt, std::forward<Args>(args)...);
}

template <typename... Args>
void warn(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().warn(fmt, std::forward<Args>(args)...);
}

template <typename... Args>
void info(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().info(fmt, std::forward<Args>(args)...);
}

template <typename... Args>
void debug(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().debug(fmt, std::forward<Args>(args)...);
}

}  // namespace ganeye::log
