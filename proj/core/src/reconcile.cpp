#include "qkd/reconcile.hpp"

#include <algorithm>
#include <boost/crc.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "qkd/errors.hpp"
#include "qkd/rng.hpp"

namespace qkd {
namespace {

std::uint32_t clamp_block(std::uint64_t size, std::size_t n) {
    auto cap = std::max<std::size_t>(n, 1);
    return static_cast<std::uint32_t>(std::clamp<std::uint64_t>(size, 1, cap));
}

std::uint8_t range_parity(const Bits& key, const std::vector<std::uint32_t>& perm, std::uint32_t begin,
                          std::uint32_t end) {
    std::uint8_t p = 0;
    for (auto q = begin; q < end; ++q) p ^= key[perm[q]];
    return p;
}

template <class T>
const T& expect_reply(const ClassicalMessage& msg) {
    if (const auto* m = std::get_if<T>(&msg)) return *m;
    throw ProtocolError("reconciliation: unexpected " + std::string(message_name(msg)));
}

}  // namespace

std::vector<std::uint32_t> default_block_schedule(double qber, std::size_t key_length, std::size_t rounds) {
    double q = std::max(qber, 1e-3);
    std::uint64_t first = 4;
    while (first * 2 <= 1024 && static_cast<double>(first * 2) <= 0.73 / q) first *= 2;

    // Halve for the first rounds(/2) rounds, then double back up.
    const std::size_t halvings = rounds / 2;
    std::vector<std::uint32_t> sizes;
    std::uint64_t size = first;
    for (std::size_t r = 0; r < rounds; ++r) {
        if (r > 0) size = r <= halvings ? std::max<std::uint64_t>(size / 2, 2) : size * 2;
        sizes.push_back(clamp_block(size, key_length));
    }
    return sizes;
}

std::vector<std::uint32_t> round_permutation(std::uint64_t seed, std::uint32_t round, std::size_t n) {
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    if (round == 0) return perm;
    RandomStream rng = RandomStream(seed).split(round);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    return perm;
}

std::uint32_t key_checksum(const Bits& key) {
    boost::crc_32_type crc;
    auto packed = pack_bits(key);
    crc.process_bytes(packed.data(), packed.size());
    const auto n = static_cast<std::uint32_t>(key.size());
    const std::uint8_t length[4] = {static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                                    static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
    crc.process_bytes(length, sizeof length);
    return crc.checksum();
}

// ---------------------------------------------------------------------------

ReconcileReference::ReconcileReference(Bits key) : key_(std::move(key)) {}

const std::vector<std::uint32_t>& ReconcileReference::permutation(std::uint32_t round) {
    if (cached_perm_.size() != key_.size() || cached_round_ != round) {
        cached_perm_ = round_permutation(schedule_->permutation_seed, round, key_.size());
        cached_round_ = round;
    }
    return cached_perm_;
}

std::optional<ClassicalMessage> ReconcileReference::handle(const ClassicalMessage& request) {
    if (finished_) throw ProtocolError("reconciliation already finished");

    if (const auto* start = std::get_if<ReconcileStart>(&request)) {
        if (schedule_) throw ProtocolError("reconciliation started twice");
        schedule_ = ReconcileSchedule{start->permutation_seed, start->block_sizes};
        return std::nullopt;
    }
    if (!schedule_) throw ProtocolError("reconciliation request before start");

    if (const auto* query = std::get_if<ParityQuery>(&request)) {
        if (query->round >= schedule_->block_sizes.size()) throw ProtocolError("parity query for unknown round");
        const auto& perm = permutation(query->round);
        ParityReply reply;
        reply.parities.reserve(query->ranges.size() / 2);
        for (std::size_t i = 0; i + 1 < query->ranges.size(); i += 2) {
            auto begin = query->ranges[i];
            auto end = query->ranges[i + 1];
            if (begin >= end || end > key_.size()) throw ProtocolError("parity query range out of bounds");
            reply.parities.push_back(range_parity(key_, perm, begin, end));
        }
        leaked_ += reply.parities.size();
        return reply;
    }
    if (std::holds_alternative<VerifyRequest>(request)) {
        finished_ = true;
        leaked_ += kVerificationLeak;
        return VerifyReply{parity(key_), key_checksum(key_)};
    }
    throw ProtocolError("reconciliation: unexpected " + std::string(message_name(request)));
}

// ---------------------------------------------------------------------------

ReconcileCorrector::ReconcileCorrector(Bits key, ReconcileSchedule schedule)
    : key_(std::move(key)), schedule_(std::move(schedule)) {}

std::uint8_t ReconcileCorrector::own_parity(std::uint32_t begin, std::uint32_t end) const {
    return range_parity(key_, perm_, begin, end);
}

void ReconcileCorrector::begin_round() {
    ranges_.clear();
    if (round_ >= schedule_.block_sizes.size()) {
        phase_ = Phase::Verify;
        return;
    }
    perm_ = round_permutation(schedule_.permutation_seed, round_, key_.size());
    const auto n = static_cast<std::uint32_t>(key_.size());
    const auto block = std::max<std::uint32_t>(schedule_.block_sizes[round_], 1);
    for (std::uint32_t begin = 0; begin < n; begin += block) {
        ranges_.push_back(begin);
        ranges_.push_back(std::min(begin + block, n));
    }
    phase_ = Phase::RoundTop;
}

std::optional<ClassicalMessage> ReconcileCorrector::next_request() {
    if (awaiting_) throw std::logic_error("reconciliation request issued before the previous reply");
    for (;;) {
        switch (phase_) {
            case Phase::Start:
                round_ = 0;
                begin_round();
                if (phase_ == Phase::RoundTop && ranges_.empty()) phase_ = Phase::Verify;
                return ReconcileStart{schedule_.permutation_seed, schedule_.block_sizes};

            case Phase::RoundTop:
                if (ranges_.empty()) {
                    ++round_;
                    begin_round();
                    continue;
                }
                asked_ = ranges_;
                awaiting_ = true;
                return ParityQuery{round_, asked_};

            case Phase::Bisect: {
                // Size-one ranges are located errors; flip and drop them.
                std::vector<std::uint32_t> open;
                for (std::size_t i = 0; i < ranges_.size(); i += 2) {
                    if (ranges_[i + 1] - ranges_[i] == 1) {
                        key_[perm_[ranges_[i]]] ^= 1u;
                        ++corrections_;
                    } else {
                        open.push_back(ranges_[i]);
                        open.push_back(ranges_[i + 1]);
                    }
                }
                ranges_ = std::move(open);
                if (ranges_.empty()) {
                    ++round_;
                    begin_round();
                    continue;
                }
                asked_.clear();
                for (std::size_t i = 0; i < ranges_.size(); i += 2) {
                    auto begin = ranges_[i];
                    auto mid = begin + (ranges_[i + 1] - begin) / 2;
                    asked_.push_back(begin);
                    asked_.push_back(mid);
                }
                awaiting_ = true;
                return ParityQuery{round_, asked_};
            }

            case Phase::Verify:
                awaiting_ = true;
                return VerifyRequest{};

            case Phase::Done: return std::nullopt;
        }
    }
}

void ReconcileCorrector::on_reply(const ClassicalMessage& reply) {
    if (!awaiting_) throw ProtocolError("unsolicited reconciliation reply");
    awaiting_ = false;

    if (phase_ == Phase::Verify) {
        const auto& v = expect_reply<VerifyReply>(reply);
        verification_leak_ += kVerificationLeak;
        verified_ = v.parity == parity(key_) && v.checksum == key_checksum(key_);
        phase_ = Phase::Done;
        return;
    }

    const auto& parities = expect_reply<ParityReply>(reply).parities;
    if (parities.size() * 2 != asked_.size()) throw ProtocolError("parity reply has the wrong length");
    parity_leak_ += parities.size();

    if (phase_ == Phase::RoundTop) {
        std::vector<std::uint32_t> odd;
        for (std::size_t i = 0; i < parities.size(); ++i) {
            if (own_parity(asked_[2 * i], asked_[2 * i + 1]) != parities[i]) {
                odd.push_back(asked_[2 * i]);
                odd.push_back(asked_[2 * i + 1]);
            }
        }
        ranges_ = std::move(odd);
        phase_ = Phase::Bisect;
        return;
    }

    // Bisect: an odd left half holds an error, otherwise the right half does.
    for (std::size_t i = 0; i < parities.size(); ++i) {
        auto begin = asked_[2 * i];
        auto mid = asked_[2 * i + 1];
        if (own_parity(begin, mid) != parities[i]) {
            ranges_[2 * i + 1] = mid;
        } else {
            ranges_[2 * i] = mid;
        }
    }
}

ReconcileResult reconcile(const Bits& key_a, const Bits& key_b, const ReconcileSchedule& schedule,
                          Transcript* transcript) {
    if (key_a.size() != key_b.size()) throw ParameterError("reconcile: key lengths differ");

    ReconcileReference reference(key_a);
    ReconcileCorrector corrector(key_b, schedule);
    while (auto request = corrector.next_request()) {
        if (transcript) transcript->push_back({Direction::Sent, *request});
        auto reply = reference.handle(*request);
        if (corrector.awaiting_reply()) {
            if (!reply) throw std::logic_error("reference owed a reply");
            if (transcript) transcript->push_back({Direction::Received, *reply});
            corrector.on_reply(*reply);
        }
    }
    if (!corrector.verified()) throw ReconciliationError("keys still differ after parity reconciliation");
    return ReconcileResult{corrector.key(), corrector.parity_leak(), corrector.verification_leak(),
                           corrector.corrections()};
}

}  // namespace qkd
