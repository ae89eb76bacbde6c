#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qkd/session.hpp"

namespace qkd::cli {

/// Schema version of the run report; bump on incompatible changes.
inline constexpr int kReportVersion = 1;

/// Hex SHA-256 of the packed key bits (64 zeros when the key is empty).
std::string key_fingerprint(const Bits& key);
/// Hex SHA-256 over the wire encoding of every public-discussion message in
/// order. Both parties' logs give the same value.
std::string transcript_fingerprint(const Transcript& transcript);

/// Report for an in-process session (both parties visible).
nlohmann::json session_report(const SessionConfig& config, const SessionOutcome& outcome, double wall_ms);

/// Report from one party's point of view (two-process mode). Fields the party
/// cannot know are null.
nlohmann::json party_report(const SessionConfig& config, const PartyOutcome& party, double wall_ms);

/// One header line and one data row.
std::string report_csv(const nlohmann::json& report);

/// Exit code for a report: 0 completed, 2 aborted.
int exit_code(const nlohmann::json& report);

}  // namespace qkd::cli
