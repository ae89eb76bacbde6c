#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qkd/bits.hpp"
#include "qkd/transport.hpp"
#include "qkd/wire.hpp"

namespace qkd {

// Interactive parity-block error correction. Each round permutes the key with
// a public permutation (round 0 is the identity), splits it into blocks,
// compares block parities, and bisects every odd-parity block down to a single
// bit which the corrector flips. A whole-key parity plus CRC-32 check closes the
// exchange. The reference side only answers parity queries.

/// Bits disclosed by the final verification: one parity bit and a 32-bit checksum.
inline constexpr std::size_t kVerificationLeak = 33;
inline constexpr std::size_t kDefaultReconcileRounds = 4;

struct ReconcileSchedule {
    std::uint64_t permutation_seed = 0;
    std::vector<std::uint32_t> block_sizes;
};

/// First-round block of about 0.73/qber (a power of two in [4, 1024]), halved
/// for each of the first rounds/2 rounds, then doubled. Four rounds give
/// k, k/2, k/4, k/2.
std::vector<std::uint32_t> default_block_schedule(double qber, std::size_t key_length,
                                                  std::size_t rounds = kDefaultReconcileRounds);

/// Permutation for `round`: position q of the permuted key is original index result[q].
std::vector<std::uint32_t> round_permutation(std::uint64_t seed, std::uint32_t round, std::size_t n);

std::uint32_t key_checksum(const Bits& key);

/// The party whose key is authoritative (the sender).
class ReconcileReference {
public:
    explicit ReconcileReference(Bits key);

    /// Reply for a reconciliation request, or nullopt when none is owed.
    /// Throws ProtocolError for malformed or out-of-sequence requests.
    std::optional<ClassicalMessage> handle(const ClassicalMessage& request);

    bool finished() const { return finished_; }
    std::size_t leaked_bits() const { return leaked_; }

private:
    const std::vector<std::uint32_t>& permutation(std::uint32_t round);

    Bits key_;
    std::optional<ReconcileSchedule> schedule_;
    std::uint32_t cached_round_ = 0;
    std::vector<std::uint32_t> cached_perm_;
    std::size_t leaked_ = 0;
    bool finished_ = false;
};

/// The party that corrects its key towards the reference (the receiver).
class ReconcileCorrector {
public:
    ReconcileCorrector(Bits key, ReconcileSchedule schedule);

    /// Next message to send, or nullopt once verification completed.
    std::optional<ClassicalMessage> next_request();
    /// Whether the last request returned by next_request() expects a reply.
    bool awaiting_reply() const { return awaiting_; }
    void on_reply(const ClassicalMessage& reply);

    bool done() const { return phase_ == Phase::Done; }
    /// Valid once done(): whole-key parity and checksum both matched.
    bool verified() const { return verified_; }

    const Bits& key() const { return key_; }
    std::size_t parity_leak() const { return parity_leak_; }
    std::size_t verification_leak() const { return verification_leak_; }
    std::size_t leaked_bits() const { return parity_leak_ + verification_leak_; }
    std::size_t corrections() const { return corrections_; }

private:
    enum class Phase { Start, RoundTop, Bisect, Verify, Done };

    std::uint8_t own_parity(std::uint32_t begin, std::uint32_t end) const;
    void begin_round();

    Bits key_;
    ReconcileSchedule schedule_;
    Phase phase_ = Phase::Start;
    bool awaiting_ = false;
    std::uint32_t round_ = 0;
    std::vector<std::uint32_t> perm_;
    std::vector<std::uint32_t> ranges_;  // flat [begin, end) pairs under bisection
    std::vector<std::uint32_t> asked_;   // ranges queried in the outstanding request
    std::size_t parity_leak_ = 0;
    std::size_t verification_leak_ = 0;
    std::size_t corrections_ = 0;
    bool verified_ = false;
};

struct ReconcileResult {
    Bits corrected;
    std::size_t parity_leak = 0;
    std::size_t verification_leak = 0;
    std::size_t corrections = 0;

    std::size_t leaked_bits() const { return parity_leak + verification_leak; }
};

/// Runs both roles against each other in memory. Every exchanged message is
/// appended to `transcript` (from the corrector's point of view) when given.
/// Throws ReconciliationError if the final verification fails, ParameterError
/// for keys of different length.
ReconcileResult reconcile(const Bits& key_a, const Bits& key_b, const ReconcileSchedule& schedule,
                          Transcript* transcript = nullptr);

}  // namespace qkd
