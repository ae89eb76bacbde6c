#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qkd/protocol.hpp"

namespace qkd::cli {

/// Command-line values that override the config file. Unset fields leave the
/// file (or default) value alone.
struct Overrides {
    std::optional<std::string> protocol;
    std::optional<std::uint32_t> pulses;
    std::optional<std::string> eve;
    std::optional<double> noise;
    std::optional<double> loss;
    std::optional<std::string> source;
    std::optional<double> sample_fraction;
    std::optional<double> qber_threshold;
    std::optional<std::uint64_t> seed;
};

ProtocolId parse_protocol(const std::string& text);
/// "none", "beamsplit", or "intercept:F[:random|rect|diag]".
EveConfig parse_eve(const std::string& text);
/// "single" or "poisson:MU".
SourceConfig parse_source(const std::string& text);

std::string format_eve(const EveConfig& eve);
std::string format_source(const SourceConfig& source);

/// Applies a flat object of dotted keys ("channel.noise", "eve.fraction", ...)
/// on top of `base`. Unknown keys and ill-typed values throw ConfigError.
SessionConfig apply_json(SessionConfig base, const nlohmann::json& flat);

/// Same dotted keys as apply_json accepts; feeding it back reproduces the config.
nlohmann::json to_json(const SessionConfig& config);

/// Defaults, then the config file, then QKD_SEED (only if no seed came from
/// the file), then flags. Validates the result.
SessionConfig resolve(const std::optional<std::filesystem::path>& config_file, const Overrides& flags,
                      const char* env_seed);

/// Sets one sweepable parameter by name; throws ConfigError for unknown names.
void set_parameter(SessionConfig& config, const std::string& name, double value);

}  // namespace qkd::cli
