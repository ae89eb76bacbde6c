#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/wire.hpp"

namespace qkd {

enum class Direction : std::uint8_t { Sent, Received };

struct TranscriptEntry {
    Direction direction = Direction::Sent;
    ClassicalMessage message;
    bool operator==(const TranscriptEntry&) const = default;
};

using Transcript = std::vector<TranscriptEntry>;

/// One endpoint of the public channel plus the quantum lane that carries pulse
/// records. Every classical message is framed with the wire codec and logged to
/// the transcript, which the eavesdropper may read. One thread per endpoint.
class Transport {
public:
    virtual ~Transport() = default;

    void send(const ClassicalMessage& msg);
    ClassicalMessage recv();

    void send_pulses(std::span<const Pulse> pulses);
    std::vector<Pulse> recv_pulses();

    virtual void close() = 0;

    const Transcript& transcript() const { return transcript_; }

protected:
    virtual void write_frame(std::vector<std::uint8_t> frame) = 0;
    /// Returns one complete frame (header included).
    virtual std::vector<std::uint8_t> read_frame() = 0;

private:
    Transcript transcript_;
};

/// Two connected endpoints backed by in-memory FIFO queues.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_in_process_pair();

/// Transport over a connected stream socket (TCP or a socketpair). Owns the fd.
class FdTransport : public Transport {
public:
    explicit FdTransport(int fd);
    ~FdTransport() override;
    FdTransport(const FdTransport&) = delete;
    FdTransport& operator=(const FdTransport&) = delete;

    void close() override;

protected:
    void write_frame(std::vector<std::uint8_t> frame) override;
    std::vector<std::uint8_t> read_frame() override;

private:
    int fd_;
};

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;
};

/// Parses "HOST:PORT"; throws std::invalid_argument.
Endpoint parse_endpoint(const std::string& text);

class TcpListener {
public:
    explicit TcpListener(const Endpoint& where);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    /// Actual bound port (useful when listening on port 0).
    std::uint16_t port() const { return port_; }
    std::unique_ptr<FdTransport> accept();

private:
    int fd_;
    std::uint16_t port_;
};

/// Connects, retrying refused connections until `timeout` elapses.
std::unique_ptr<FdTransport> tcp_connect(const Endpoint& where,
                                         std::chrono::milliseconds timeout = std::chrono::milliseconds(0));

}  // namespace qkd
