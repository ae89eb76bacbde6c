#include "qkd/session.hpp"

#include <exception>
#include <thread>

#include "qkd/errors.hpp"

namespace qkd {

double SessionOutcome::sifted_error_rate() const {
    const auto& a = sender.sift.sifted_key;
    const auto& b = receiver.sift.sifted_key;
    if (a.empty() || a.size() != b.size()) return 0.0;
    return static_cast<double>(hamming_distance(a, b)) / static_cast<double>(a.size());
}

namespace {

bool is_connection_error(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const ConnectionError&) {
        return true;
    } catch (...) {
        return false;
    }
}

}  // namespace

SessionOutcome run_session_over(const SessionConfig& config, Transport& sender_side, Transport& receiver_side) {
    SessionOutcome outcome;
    std::exception_ptr sender_error;
    std::exception_ptr receiver_error;

    std::thread sender_thread([&] {
        try {
            outcome.sender = run_sender(config, sender_side);
        } catch (...) {
            sender_error = std::current_exception();
            sender_side.close();
        }
    });
    try {
        outcome.receiver = run_receiver(config, receiver_side);
    } catch (...) {
        receiver_error = std::current_exception();
        receiver_side.close();
    }
    sender_thread.join();

    // A party that failed closes its endpoint, so the other one usually sees a
    // secondary ConnectionError; report the root cause.
    if (sender_error && receiver_error) {
        std::rethrow_exception(is_connection_error(sender_error) ? receiver_error : sender_error);
    }
    if (sender_error) std::rethrow_exception(sender_error);
    if (receiver_error) std::rethrow_exception(receiver_error);
    return outcome;
}

SessionOutcome run_session(const SessionConfig& config) {
    validate(config);
    auto [sender_side, receiver_side] = make_in_process_pair();
    return run_session_over(config, *sender_side, *receiver_side);
}

}  // namespace qkd
