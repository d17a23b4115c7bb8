#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcp2osc/codec.hpp"
#include "mcp2osc/error.hpp"
#include "mcp2osc/transport.hpp"

#include "support/generators.hpp"
#include "support/test_util.hpp"

using namespace mcp2osc;

namespace {

EndpointConfig loopback_config(std::uint16_t send_port, std::uint16_t receive_port,
                               std::size_t max_datagram = 1472)
{
    EndpointConfig c;
    c.send_host = "127.0.0.1";
    c.send_port = send_port;
    c.receive_port = receive_port;
    c.max_datagram = max_datagram;
    return c;
}

} // namespace

TEST_CASE("config validation and env defaults")
{
    EndpointConfig c;
    CHECK_NOTHROW(c.validate());
    c.receive_bind_attempts = 0;
    CHECK_THROWS_AS(c.validate(), Error);

    CHECK_THROWS_AS(parse_host_port("nonsense"), Error);
    CHECK_THROWS_AS(parse_host_port("host:99999"), Error);
    auto hp = parse_host_port("10.1.2.3:8000");
    CHECK(hp.host == "10.1.2.3");
    CHECK(hp.port == 8000);
}

TEST_CASE("send and receive roundtrip over loopback")
{
    testutil::UdpProbe peer; // plays the remote OSC application
    auto cfg = loopback_config(peer.port(), testutil::free_udp_port());
    Transport t(cfg, nullptr);
    CHECK(t.bound_receive_port() == cfg.receive_port);
    CHECK_FALSE(t.used_port_fallback());

    OscMessage msg{"/volume", {0.5f}};
    auto report = t.send(OscPacket(msg));
    CHECK(report.bytes == 16);
    CHECK(report.dest == "127.0.0.1:" + std::to_string(peer.port()));

    auto got = peer.recv();
    REQUIRE(got.has_value());
    CHECK(*got == encode_message(msg));

    // inbound direction
    peer.send_to(encode_message(msg), t.bound_receive_port());
    REQUIRE(testutil::eventually([&] { return t.datagrams_received() == 1; }));
    auto polled = t.poll_received();
    REQUIRE(polled.size() == 1);
    CHECK(polled[0].bytes == encode_message(msg));
    CHECK(t.poll_received().empty()); // drained exactly once
}

TEST_CASE("explicit destination overrides the configured target")
{
    testutil::UdpProbe a, b;
    auto cfg = loopback_config(a.port(), testutil::free_udp_port());
    Transport t(cfg, nullptr);

    t.send(OscPacket(OscMessage{"/to/a", {}}));
    t.send(OscPacket(OscMessage{"/to/b", {}}), "127.0.0.1:" + std::to_string(b.port()));

    auto got_a = a.recv();
    auto got_b = b.recv();
    REQUIRE(got_a.has_value());
    REQUIRE(got_b.has_value());
    CHECK(decode_message(*got_a).address == "/to/a");
    CHECK(decode_message(*got_b).address == "/to/b");
}

TEST_CASE("oversized datagrams are refused before hitting the wire")
{
    testutil::UdpProbe peer;
    Transport t(loopback_config(peer.port(), testutil::free_udp_port(), 1472), nullptr);
    OscMessage big{"/blob", {OscBlob(2000)}};
    try {
        t.send(OscPacket(big));
        FAIL("expected DatagramTooLarge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DatagramTooLarge);
    }
    CHECK(t.datagrams_sent() == 0);
}

TEST_CASE("port fallback walks forward and reports the real port")
{
    auto base = testutil::free_udp_port();
    testutil::UdpProbe occupant(base); // holds the base port
    auto cfg = loopback_config(testutil::free_udp_port(), base);
    cfg.receive_bind_attempts = 3;
    Transport t(cfg, nullptr);
    CHECK(t.bound_receive_port() > base);
    CHECK(t.bound_receive_port() < base + 3);
    CHECK(t.used_port_fallback());

    // all candidates busy -> AllPortsBusy
    testutil::UdpProbe o2(t.bound_receive_port() == base + 1 ? base + 2 : base + 1);
    cfg.receive_bind_attempts = 3;
    try {
        Transport t2(cfg, nullptr);
        FAIL("expected AllPortsBusy");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AllPortsBusy);
    }
}

TEST_CASE("inbound traffic is logged before polling; malformed datagrams are kept")
{
    testutil::TempDir dir;
    MessageLog log({dir.path() / "log.jsonl", 1000, 1 << 20});
    testutil::UdpProbe peer;
    Transport t(loopback_config(peer.port(), testutil::free_udp_port()), &log);

    peer.send_to(encode_message({"/ok", {std::int32_t{7}}}), t.bound_receive_port());
    std::vector<std::uint8_t> junk{0xde, 0xad, 0xbe, 0xef};
    peer.send_to(junk, t.bound_receive_port());

    REQUIRE(testutil::eventually([&] { return t.datagrams_received() == 2; }));
    auto polled = t.poll_received();
    REQUIRE(polled.size() == 2);
    CHECK(log.count(Direction::In) >= polled.size()); // logged before observable

    auto entries = log.query_window(60);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].address == "/ok");
    CHECK(entries[1].decode_error.find("UnknownPacketType") != std::string::npos);
    CHECK(entries[1].decode_error.find("deadbeef") != std::string::npos);
    CHECK(log.decode_error_count() == 1);

    // outbound entries logged with the destination endpoint
    t.send(OscPacket(OscMessage{"/out", {}}));
    CHECK(log.count(Direction::Out) == 1);
    auto out = log.query_window(60, std::nullopt, Direction::Out);
    REQUIRE(out.size() == 1);
    CHECK(out[0].endpoint == "127.0.0.1:" + std::to_string(peer.port()));
}

TEST_CASE("listeners see decoded packets and decode failures")
{
    testutil::UdpProbe peer;
    Transport t(loopback_config(peer.port(), testutil::free_udp_port()), nullptr);

    std::mutex m;
    std::vector<std::string> events;
    auto id = t.add_listener([&](const ReceivedDatagram&, const OscPacket* pkt,
                                 const std::string& err) {
        std::lock_guard lock(m);
        events.push_back(pkt ? pkt->message().address : "error:" + err.substr(0, 17));
    });

    peer.send_to(encode_message({"/hello", {}}), t.bound_receive_port());
    peer.send_to({1, 2, 3}, t.bound_receive_port());
    REQUIRE(testutil::eventually([&] {
        std::lock_guard lock(m);
        return events.size() == 2;
    }));
    {
        std::lock_guard lock(m);
        CHECK(events[0] == "/hello");
        CHECK(events[1] == "error:UnknownPacketType");
    }
    t.remove_listener(id);
    peer.send_to(encode_message({"/ignored", {}}), t.bound_receive_port());
    testutil::sleep_ms(50);
    std::lock_guard lock(m);
    CHECK(events.size() == 2);
}

TEST_CASE("loopback identity for generated packets")
{
    testutil::UdpProbe peer;
    Transport t(loopback_config(peer.port(), testutil::free_udp_port(), 65507), nullptr);

    gen::Rng rng(60321);
    int trials = 0;
    while (trials < 500) {
        auto pkt = gen::random_packet(rng);
        auto bytes = encode_packet(pkt);
        if (bytes.size() > 65507)
            continue;
        ++trials;
        t.send(OscPacket(pkt));
        auto got = peer.recv();
        REQUIRE(got.has_value());
        REQUIRE(*got == bytes);
    }
}
