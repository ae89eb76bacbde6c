#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qkd/protocol.hpp"
#include "qkd/transport.hpp"

namespace qkd::cli {

/// One in-process session. With `message`, the final key also one-time-pads
/// it end to end and the report gains an "otp" section.
nlohmann::json run(const SessionConfig& config, const std::optional<std::string>& message = std::nullopt);

/// One CSV row per (value, repeat); repeat r runs with seed config.seed + r.
/// Throws ConfigError for a parameter that cannot be swept.
std::string sweep(const SessionConfig& config, const std::string& parameter, const std::vector<double>& values,
                  unsigned repeats);

struct ServeOptions {
    Role role = Role::Sender;
    std::optional<Endpoint> listen;
    std::optional<Endpoint> connect;
    std::chrono::milliseconds connect_timeout{5000};
};

/// Runs one party over TCP and reports from its side. Throws ConnectionError,
/// ProtocolError or FramingError.
nlohmann::json serve(const SessionConfig& config, const ServeOptions& options);

}  // namespace qkd::cli
