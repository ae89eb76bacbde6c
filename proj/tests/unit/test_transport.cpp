#include <gtest/gtest.h>

#include <sys/socket.h>
#include <unistd.h>

#include <thread>

#include "qkd/errors.hpp"
#include "qkd/transport.hpp"

using namespace qkd;

TEST(InProcess, FifoOrderAndTranscript) {
    auto [a, b] = make_in_process_pair();
    std::vector<ClassicalMessage> sent;
    for (std::uint32_t i = 0; i < 100; ++i) {
        ClassicalMessage m = i % 2 ? ClassicalMessage(SiftIndices{{i, i + 1}}) : ClassicalMessage(QberReport{i, 100});
        a->send(m);
        sent.push_back(m);
    }
    for (const auto& m : sent) ASSERT_EQ(b->recv(), m);

    ASSERT_EQ(a->transcript().size(), 100u);
    ASSERT_EQ(b->transcript().size(), 100u);
    for (std::size_t i = 0; i < sent.size(); ++i) {
        EXPECT_EQ(a->transcript()[i].direction, Direction::Sent);
        EXPECT_EQ(b->transcript()[i].direction, Direction::Received);
        EXPECT_EQ(b->transcript()[i].message, sent[i]);
    }
}

TEST(InProcess, PulsesStayOutOfTranscript) {
    auto [a, b] = make_in_process_pair();
    std::vector<Pulse> pulses{prepare_pulse(0, 1, Basis::Diagonal, 1, 1.0)};
    a->send_pulses(pulses);
    EXPECT_EQ(b->recv_pulses(), pulses);
    EXPECT_TRUE(a->transcript().empty());
    EXPECT_TRUE(b->transcript().empty());
}

TEST(InProcess, ClosedPeerRaisesConnectionError) {
    auto [a, b] = make_in_process_pair();
    a->close();
    EXPECT_THROW((void)b->recv(), ConnectionError);
    EXPECT_THROW(a->send(VerifyRequest{}), ConnectionError);
}

TEST(FdTransport, ShortPayloadThenEndIsFramingError) {
    int fds[2];
    ASSERT_EQ(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds), 0);
    FdTransport reader(fds[0]);
    const std::uint8_t bytes[] = {0, 0, 0, 10, 0x05, 1, 2, 3, 4, 5};
    ASSERT_EQ(::write(fds[1], bytes, sizeof bytes), static_cast<ssize_t>(sizeof bytes));
    ::close(fds[1]);
    EXPECT_THROW((void)reader.recv(), FramingError);
}

TEST(FdTransport, EndAtFrameBoundaryIsConnectionError) {
    int fds[2];
    ASSERT_EQ(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds), 0);
    FdTransport reader(fds[0]);
    ::close(fds[1]);
    EXPECT_THROW((void)reader.recv(), ConnectionError);
}

TEST(FdTransport, SocketpairRoundtrip) {
    int fds[2];
    ASSERT_EQ(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds), 0);
    FdTransport a(fds[0]), b(fds[1]);
    BasisReveal big;
    for (int i = 0; i < 100000; ++i) {
        big.bases.push_back(i % 3 ? Basis::Diagonal : Basis::Rectilinear);
        big.received_mask.push_back(i % 2);
    }
    std::thread writer([&] { a.send(big); a.send(Abort{AbortReason::User}); });
    EXPECT_EQ(b.recv(), ClassicalMessage(big));
    EXPECT_EQ(b.recv(), ClassicalMessage(Abort{AbortReason::User}));
    writer.join();
}

TEST(Endpoint, Parse) {
    auto e = parse_endpoint("127.0.0.1:7000");
    EXPECT_EQ(e.host, "127.0.0.1");
    EXPECT_EQ(e.port, 7000);
    EXPECT_THROW((void)parse_endpoint("nohost"), std::invalid_argument);
    EXPECT_THROW((void)parse_endpoint("h:99999"), std::invalid_argument);
    EXPECT_THROW((void)parse_endpoint("h:12x"), std::invalid_argument);
}

TEST(Tcp, LoopbackRoundtrip) {
    TcpListener listener({"127.0.0.1", 0});
    ASSERT_NE(listener.port(), 0);
    std::thread client([port = listener.port()] {
        auto t = tcp_connect({"127.0.0.1", port}, std::chrono::milliseconds(2000));
        t->send(ProtocolHello{ProtocolId::E91, 5});
        (void)t->recv();
    });
    auto server = listener.accept();
    EXPECT_EQ(server->recv(), ClassicalMessage(ProtocolHello{ProtocolId::E91, 5}));
    server->send(VerifyRequest{});
    client.join();
}

TEST(Tcp, RefusedConnectionIsConnectionError) {
    std::uint16_t port;
    {
        TcpListener probe({"127.0.0.1", 0});
        port = probe.port();
    }
    EXPECT_THROW((void)tcp_connect({"127.0.0.1", port}, std::chrono::milliseconds(200)), ConnectionError);
}
