#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcp2osc/bridge.hpp"
#include "mcp2osc/codec.hpp"
#include "mcp2osc/message_log.hpp"

#include "support/test_util.hpp"
#include "support/ws_client.hpp"

#include <httplib.h>
#include <json.hpp>

using namespace mcp2osc;
using nlohmann::json;

namespace {

BridgeConfig test_config(const testutil::TempDir& dir, std::uint16_t peer_port)
{
    BridgeConfig c;
    c.endpoint.send_host = "127.0.0.1";
    c.endpoint.send_port = peer_port;
    c.endpoint.receive_port = testutil::free_udp_port();
    c.log_path = dir.path() / "log.jsonl";
    c.pattern_path = dir.path() / "patterns.json";
    c.dashboard_port = testutil::free_udp_port(); // free TCP port, close enough
    return c;
}

} // namespace

TEST_CASE("GET /status reflects the live counters")
{
    testutil::TempDir dir;
    testutil::UdpProbe peer;
    Bridge bridge(test_config(dir, peer.port()));
    REQUIRE(bridge.dashboard_port() != 0);

    httplib::Client client("127.0.0.1", bridge.dashboard_port());
    auto res = client.Get("/status");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto fresh = json::parse(res->body);
    CHECK(fresh["counters"]["sent"] == 0);
    CHECK(fresh["counters"]["received"] == 0);
    CHECK(fresh["uptime_s"].get<double>() >= 0);
    CHECK(fresh["bound_receive_port"] == bridge.transport().bound_receive_port());
    CHECK(fresh["active_streams"] == 0);

    for (int i = 0; i < 5; ++i)
        bridge.transport().send(OscPacket(OscMessage{"/tick", {std::int32_t{i}}}));
    peer.send_to(encode_message({"/tock", {}}), bridge.transport().bound_receive_port());
    peer.send_to({9, 9, 9}, bridge.transport().bound_receive_port());
    REQUIRE(testutil::eventually([&] { return bridge.log().count(Direction::In) == 2; }));

    res = client.Get("/status");
    REQUIRE(res);
    auto after = json::parse(res->body);
    CHECK(after["counters"]["sent"] == 5);
    CHECK(after["counters"]["received"] == 2);
    CHECK(after["counters"]["decode_errors"] == 1);
    CHECK(after["counters"]["sent"] == bridge.log().count(Direction::Out));
    CHECK(after["log_file_size_bytes"].get<std::uint64_t>() > 0);

    auto missing = client.Get("/nope");
    REQUIRE(missing);
    CHECK(missing->status == 404);
}

TEST_CASE("port fallback shows up as a degraded flag")
{
    testutil::TempDir dir;
    testutil::UdpProbe peer;
    auto cfg = test_config(dir, peer.port());
    testutil::UdpProbe occupant(cfg.endpoint.receive_port); // force the fallback
    Bridge bridge(cfg);
    CHECK(bridge.transport().bound_receive_port() == cfg.endpoint.receive_port + 1);
    auto status = bridge.status_json();
    bool flagged = false;
    for (const auto& f : status["degraded_flags"])
        flagged = flagged || f == "receive_port_fallback";
    CHECK(flagged);
}

TEST_CASE("live feed delivers every entry as a JSON frame in seq order")
{
    testutil::TempDir dir;
    testutil::UdpProbe peer;
    Bridge bridge(test_config(dir, peer.port()));

    testutil::WsClient ws(bridge.dashboard_port());
    REQUIRE(ws.upgraded());
    REQUIRE(testutil::eventually(
        [&] { return bridge.status_endpoint()->subscriber_count() == 1; }));

    for (int i = 0; i < 3; ++i)
        bridge.transport().send(OscPacket(OscMessage{"/feed", {std::int32_t{i}}}));

    std::uint64_t prev_seq = 0;
    for (int i = 0; i < 3; ++i) {
        auto frame = ws.read_frame();
        REQUIRE(frame.has_value());
        auto entry = log_entry_from_json(json::parse(*frame));
        REQUIRE(entry.has_value()); // frames parse back into valid entries
        CHECK(entry->address == "/feed");
        CHECK(entry->seq > prev_seq);
        prev_seq = entry->seq;
    }
}

TEST_CASE("a stalled subscriber is dropped without disturbing others")
{
    testutil::TempDir dir;
    testutil::UdpProbe peer;
    Bridge bridge(test_config(dir, peer.port()));

    testutil::WsClient healthy(bridge.dashboard_port());
    testutil::WsClient stalled(bridge.dashboard_port()); // never reads
    REQUIRE(healthy.upgraded());
    REQUIRE(stalled.upgraded());
    REQUIRE(testutil::eventually(
        [&] { return bridge.status_endpoint()->subscriber_count() == 2; }));

    // push well past the backlog limit while one client never drains
    const int n = int(StatusEndpoint::kBacklogLimit) + 4000;
    std::thread reader([&] {
        for (int i = 0; i < n; ++i)
            if (!healthy.read_frame(5000))
                break;
    });
    for (int i = 0; i < n; ++i)
        bridge.log().append([&] {
            LogEntry e;
            e.direction = Direction::Out;
            e.endpoint = "t:1";
            e.address = "/burst";
            return e;
        }());
    reader.join();

    CHECK(testutil::eventually(
        [&] { return bridge.status_endpoint()->subscriber_count() <= 1; }, 5000));
    // the healthy subscriber still gets fresh frames
    bridge.log().append([&] {
        LogEntry e;
        e.direction = Direction::Out;
        e.endpoint = "t:1";
        e.address = "/after";
        return e;
    }());
    auto frame = healthy.read_frame(3000);
    REQUIRE(frame.has_value());
}

TEST_CASE("no dashboard configured means no endpoint and no overhead")
{
    testutil::TempDir dir;
    testutil::UdpProbe peer;
    auto cfg = test_config(dir, peer.port());
    cfg.dashboard_port = 0;
    Bridge bridge(cfg);
    CHECK(bridge.dashboard_port() == 0);
    bridge.transport().send(OscPacket(OscMessage{"/quiet", {}}));
    CHECK(bridge.log().count(Direction::Out) == 1);
}
