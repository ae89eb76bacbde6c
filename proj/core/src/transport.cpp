#include "qkd/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "qkd/errors.hpp"

namespace qkd {

void Transport::send(const ClassicalMessage& msg) {
    write_frame(encode_frame(msg));
    transcript_.push_back({Direction::Sent, msg});
}

ClassicalMessage Transport::recv() {
    auto msg = decode_frame(read_frame());
    transcript_.push_back({Direction::Received, msg});
    return msg;
}

void Transport::send_pulses(std::span<const Pulse> pulses) { write_frame(encode_pulse_frame(pulses)); }

std::vector<Pulse> Transport::recv_pulses() { return decode_pulse_frame(read_frame()); }

// ---------------------------------------------------------------------------
// In-process

namespace {

struct Mailbox {
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<std::vector<std::uint8_t>> frames;
    bool closed = false;
};

class InProcessTransport : public Transport {
public:
    InProcessTransport(std::shared_ptr<Mailbox> inbox, std::shared_ptr<Mailbox> outbox)
        : inbox_(std::move(inbox)), outbox_(std::move(outbox)) {}
    ~InProcessTransport() override { close(); }

    void close() override {
        for (auto* box : {inbox_.get(), outbox_.get()}) {
            std::lock_guard lock(box->mutex);
            box->closed = true;
            box->ready.notify_all();
        }
    }

protected:
    void write_frame(std::vector<std::uint8_t> frame) override {
        std::lock_guard lock(outbox_->mutex);
        if (outbox_->closed) throw ConnectionError("transport closed");
        outbox_->frames.push_back(std::move(frame));
        outbox_->ready.notify_one();
    }

    std::vector<std::uint8_t> read_frame() override {
        std::unique_lock lock(inbox_->mutex);
        inbox_->ready.wait(lock, [&] { return !inbox_->frames.empty() || inbox_->closed; });
        if (inbox_->frames.empty()) throw ConnectionError("transport closed");
        auto frame = std::move(inbox_->frames.front());
        inbox_->frames.pop_front();
        return frame;
    }

private:
    std::shared_ptr<Mailbox> inbox_;
    std::shared_ptr<Mailbox> outbox_;
};

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_in_process_pair() {
    auto a_to_b = std::make_shared<Mailbox>();
    auto b_to_a = std::make_shared<Mailbox>();
    return {std::make_unique<InProcessTransport>(b_to_a, a_to_b),
            std::make_unique<InProcessTransport>(a_to_b, b_to_a)};
}

// ---------------------------------------------------------------------------
// Stream sockets

namespace {

// Reads until `out` is full. Returns the number of bytes read; short only at EOF.
std::size_t read_fully(int fd, std::span<std::uint8_t> out) {
    std::size_t got = 0;
    while (got < out.size()) {
        ssize_t n = ::recv(fd, out.data() + got, out.size() - got, 0);
        if (n == 0) break;
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ConnectionError(std::string("recv: ") + std::strerror(errno));
        }
        got += static_cast<std::size_t>(n);
    }
    return got;
}

}  // namespace

FdTransport::FdTransport(int fd) : fd_(fd) {}

FdTransport::~FdTransport() {
    if (fd_ >= 0) ::close(fd_);
}

void FdTransport::close() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void FdTransport::write_frame(std::vector<std::uint8_t> frame) {
    std::size_t sent = 0;
    while (sent < frame.size()) {
        ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ConnectionError(std::string("send: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(n);
    }
}

std::vector<std::uint8_t> FdTransport::read_frame() {
    std::array<std::uint8_t, kFrameHeaderSize> header{};
    auto got = read_fully(fd_, header);
    if (got == 0) throw ConnectionError("connection closed by peer");
    if (got < header.size()) throw FramingError("stream ended inside a frame header");

    auto length = declared_payload_length(header);
    if (length > kMaxPayloadSize) throw FramingError("declared payload length exceeds maximum");

    std::vector<std::uint8_t> frame(kFrameHeaderSize + length);
    std::copy(header.begin(), header.end(), frame.begin());
    auto body = read_fully(fd_, std::span(frame).subspan(kFrameHeaderSize));
    if (body < length) {
        throw FramingError("stream ended after " + std::to_string(body) + " of " + std::to_string(length) +
                           " declared payload bytes");
    }
    return frame;
}

Endpoint parse_endpoint(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
        throw std::invalid_argument("expected HOST:PORT, got '" + text + "'");
    }
    auto port_text = text.substr(colon + 1);
    std::size_t used = 0;
    unsigned long port = 0;
    try {
        port = std::stoul(port_text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != port_text.size() || port > 65535) throw std::invalid_argument("bad port in '" + text + "'");
    return Endpoint{text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

namespace {

struct AddrInfo {
    addrinfo* list = nullptr;
    ~AddrInfo() {
        if (list) freeaddrinfo(list);
    }
};

AddrInfo resolve(const Endpoint& where, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    AddrInfo result;
    auto port = std::to_string(where.port);
    int rc = getaddrinfo(where.host.c_str(), port.c_str(), &hints, &result.list);
    if (rc != 0) throw ConnectionError("cannot resolve " + where.host + ": " + gai_strerror(rc));
    return result;
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

TcpListener::TcpListener(const Endpoint& where) : fd_(-1), port_(0) {
    auto info = resolve(where, true);
    std::string last_error = "no usable address";
    for (auto* ai = info.list; ai != nullptr; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 1) == 0) {
            fd_ = fd;
            break;
        }
        last_error = std::strerror(errno);
        ::close(fd);
    }
    if (fd_ < 0) throw ConnectionError("cannot listen on " + where.host + ":" + std::to_string(where.port) +
                                       ": " + last_error);

    sockaddr_storage bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    if (bound.ss_family == AF_INET) {
        port_ = ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
    } else {
        port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
    }
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<FdTransport> TcpListener::accept() {
    for (;;) {
        int fd = ::accept(fd_, nullptr, nullptr);
        if (fd >= 0) {
            set_nodelay(fd);
            return std::make_unique<FdTransport>(fd);
        }
        if (errno != EINTR) throw ConnectionError(std::string("accept: ") + std::strerror(errno));
    }
}

std::unique_ptr<FdTransport> tcp_connect(const Endpoint& where, std::chrono::milliseconds timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        auto info = resolve(where, false);
        std::string last_error = "no usable address";
        for (auto* ai = info.list; ai != nullptr; ai = ai->ai_next) {
            int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd < 0) continue;
            if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
                set_nodelay(fd);
                return std::make_unique<FdTransport>(fd);
            }
            last_error = std::strerror(errno);
            ::close(fd);
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            throw ConnectionError("cannot connect to " + where.host + ":" + std::to_string(where.port) + ": " +
                                  last_error);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
}

}  // namespace qkd
