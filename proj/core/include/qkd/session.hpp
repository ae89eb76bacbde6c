#pragma once

#include <optional>

#include "qkd/protocol.hpp"
#include "qkd/transport.hpp"

namespace qkd {

struct SessionOutcome {
    PartyOutcome sender;
    PartyOutcome receiver;

    bool completed() const {
        return sender.status == SessionStatus::Completed && receiver.status == SessionStatus::Completed;
    }
    bool keys_match() const { return completed() && sender.final_key.bits == receiver.final_key.bits; }
    /// Mismatch rate over the whole sifted key (simulator view, not disclosed).
    double sifted_error_rate() const;
};

/// Runs the sender on a second thread against `sender_side`, and the receiver
/// on the calling thread against `receiver_side`. If either party fails its
/// transport is closed so the other unblocks; the first real error is rethrown.
SessionOutcome run_session_over(const SessionConfig& config, Transport& sender_side, Transport& receiver_side);

/// Both parties in-process over a queue-backed transport pair.
SessionOutcome run_session(const SessionConfig& config);

}  // namespace qkd
