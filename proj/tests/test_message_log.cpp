#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcp2osc/message_log.hpp"

#include "support/test_util.hpp"

#include <fstream>

using namespace mcp2osc;

namespace {

LogEntry make_entry(Direction dir, const std::string& address,
                    std::vector<OscArgument> args = {}, const std::string& ep = "127.0.0.1:9000",
                    double age_s = 0.0)
{
    LogEntry e;
    e.direction = dir;
    e.endpoint = ep;
    e.address = address;
    e.args = std::move(args);
    if (age_s > 0)
        e.wall_time = WallClock::now() - std::chrono::duration_cast<WallClock::duration>(
                                             std::chrono::duration<double>(age_s));
    return e;
}

} // namespace

TEST_CASE("append assigns increasing seq and keeps mono non-decreasing")
{
    testutil::TempDir dir;
    MessageLog log({dir.path() / "log.jsonl", 100, 1 << 20});
    CHECK(log.append(make_entry(Direction::In, "/a")) == 1);
    CHECK(log.append(make_entry(Direction::Out, "/b")) == 2);
    auto tail = log.tail();
    REQUIRE(tail.size() == 2);
    CHECK(tail[1].mono_ns >= tail[0].mono_ns);
    CHECK(log.count(Direction::In) == 1);
    CHECK(log.count(Direction::Out) == 1);
}

TEST_CASE("windowed query and stats over a synthetic fixture")
{
    testutil::TempDir dir;
    MessageLog log({dir.path() / "log.jsonl", 100, 1 << 20});
    // 6 messages logged 10 s ago: 4x /a, 2x /b, one source
    for (int i = 0; i < 4; ++i)
        log.append(make_entry(Direction::In, "/a", {std::int32_t{i}}, "10.0.0.5:7400", 10.0));
    for (int i = 0; i < 2; ++i)
        log.append(make_entry(Direction::In, "/b", {}, "10.0.0.5:7400", 10.0));

    CHECK(log.query_window(120).size() == 6);
    CHECK(log.query_window(5).empty());

    auto s = log.stats(120);
    CHECK(s.total == 6);
    CHECK(s.per_address.at("/a") == 4);
    CHECK(s.per_address.at("/b") == 2);
    REQUIRE(s.sources.size() == 1);
    CHECK(s.sources[0] == "10.0.0.5:7400");
    CHECK(log.stats(5).total == 0);
    CHECK(log.stats(5).rate == 0.0);

    // subset property: a smaller window is contained in a larger one
    auto small = log.query_window(60);
    auto large = log.query_window(600);
    CHECK(small.size() <= large.size());
    CHECK(s.total == log.query_window(120).size());
}

TEST_CASE("rate arithmetic")
{
    testutil::TempDir dir;
    MessageLog log({dir.path() / "log.jsonl", 500, 1 << 20});
    for (int i = 0; i < 120; ++i)
        log.append(make_entry(Direction::In, "/x", {}, "s:1", 30.0));
    CHECK(log.stats(60).rate == doctest::Approx(2.0));
}

TEST_CASE("address filter uses pattern matching")
{
    testutil::TempDir dir;
    MessageLog log({dir.path() / "log.jsonl", 100, 1 << 20});
    log.append(make_entry(Direction::In, "/joint1/position"));
    log.append(make_entry(Direction::In, "/joint1/velocity"));
    log.append(make_entry(Direction::In, "/joint2/position"));
    auto hits = log.query_window(60, std::string("/joint1/*"));
    CHECK(hits.size() == 2);
    auto out_only = log.query_window(60, std::nullopt, Direction::Out);
    CHECK(out_only.empty());
}

TEST_CASE("bundle packets flatten to one entry per message")
{
    OscBundle b;
    b.elements.emplace_back(OscMessage{"/a", {std::int32_t{1}}});
    OscBundle inner;
    inner.elements.emplace_back(OscMessage{"/b", {0.5f}});
    b.elements.emplace_back(std::move(inner));
    auto entries =
        entries_for_packet(OscPacket(b), Direction::Out, "1.2.3.4:9", WallClock::now(), 1);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].address == "/a");
    CHECK(entries[1].address == "/b");

    auto marker = entries_for_packet(OscPacket(OscBundle{}), Direction::Out, "1.2.3.4:9",
                                     WallClock::now(), 1);
    REQUIRE(marker.size() == 1);
    CHECK(marker[0].address == "#bundle");
}

TEST_CASE("jsonl export re-parses to identical entries; csv has the fixed header")
{
    testutil::TempDir dir;
    MessageLog log({dir.path() / "log.jsonl", 100, 1 << 20});
    log.append(make_entry(Direction::In, "/mix/gain", {0.5f, std::int32_t{2}, std::string("lo")}));
    log.append(make_entry(Direction::Out, "/mix/mute", {OscTrue{}}));

    auto jsonl = log.export_window(60, ExportFormat::Jsonl);
    std::istringstream in(jsonl);
    std::string line;
    std::vector<LogEntry> parsed;
    while (std::getline(in, line)) {
        auto e = log_entry_from_json(nlohmann::json::parse(line));
        REQUIRE(e.has_value());
        parsed.push_back(*e);
    }
    auto tail = log.tail();
    REQUIRE(parsed.size() == tail.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].seq == tail[i].seq);
        CHECK(parsed[i].address == tail[i].address);
        CHECK(parsed[i].wall_time == tail[i].wall_time);
        CHECK(parsed[i].mono_ns == tail[i].mono_ns);
        CHECK(bit_exact_equal(OscMessage{"", parsed[i].args}, OscMessage{"", tail[i].args}));
    }

    auto csv = log.export_window(60, ExportFormat::Csv);
    CHECK(csv.rfind("seq,direction,wall_time,endpoint,address,args\n", 0) == 0);
    CHECK(csv.find("/mix/gain") != std::string::npos);
    CHECK(csv.find("0.5 2 lo") != std::string::npos);

    auto empty_csv = log.export_window(0.0001, ExportFormat::Csv);
    CHECK(empty_csv == "seq,direction,wall_time,endpoint,address,args\n");
    CHECK(log.export_window(0.0001, ExportFormat::Jsonl).empty());
}

TEST_CASE("reopening replays the tail exactly and continues seq")
{
    testutil::TempDir dir;
    auto path = dir.path() / "log.jsonl";
    std::vector<LogEntry> before;
    {
        MessageLog log({path, 100, 1 << 20});
        log.append(make_entry(Direction::In, "/one", {std::int32_t{1}}));
        log.append(make_entry(Direction::Out, "/two", {0.25f, std::string("x")}));
        LogEntry bad = make_entry(Direction::In, "");
        bad.decode_error = "Truncated: input ends inside 32-bit value; 3 bytes: 0xAABBCC";
        log.append(bad);
        before = log.tail();
    }
    MessageLog reopened({path, 100, 1 << 20});
    auto after = reopened.tail();
    REQUIRE(after.size() == before.size());
    for (std::size_t i = 0; i < after.size(); ++i) {
        CHECK(after[i].seq == before[i].seq);
        CHECK(after[i].mono_ns == before[i].mono_ns);
        CHECK(after[i].wall_time == before[i].wall_time);
        CHECK(after[i].endpoint == before[i].endpoint);
        CHECK(after[i].address == before[i].address);
        CHECK(after[i].decode_error == before[i].decode_error);
        CHECK(bit_exact_equal(OscMessage{"", after[i].args}, OscMessage{"", before[i].args}));
    }
    CHECK(reopened.decode_error_count() == 1);
    CHECK(reopened.append(make_entry(Direction::In, "/next")) == before.back().seq + 1);
}

TEST_CASE("a torn final line is treated as absent, earlier records survive")
{
    testutil::TempDir dir;
    auto path = dir.path() / "log.jsonl";
    {
        MessageLog log({path, 100, 1 << 20});
        log.append(make_entry(Direction::In, "/keep"));
        log.append(make_entry(Direction::In, "/gone"));
    }
    // chop the file mid-way through the last record
    std::string content;
    {
        std::ifstream in(path, std::ios::binary);
        content.assign(std::istreambuf_iterator<char>(in), {});
    }
    auto cut = content.rfind("/gone");
    REQUIRE(cut != std::string::npos);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content.substr(0, cut + 3);
    }
    MessageLog log({path, 100, 1 << 20});
    auto tail = log.tail();
    REQUIRE(tail.size() == 1);
    CHECK(tail[0].address == "/keep");
}

TEST_CASE("rotation renames the file and starts fresh")
{
    testutil::TempDir dir;
    auto path = dir.path() / "log.jsonl";
    MessageLog log({path, 100, 600}); // tiny rotate threshold
    for (int i = 0; i < 12; ++i)
        log.append(make_entry(Direction::In, "/spin"));
    int rotated = 0;
    for (const auto& f : std::filesystem::directory_iterator(dir.path()))
        if (f.path() != path)
            ++rotated;
    CHECK(rotated >= 1);
    CHECK(log.tail().size() == 12); // ring unaffected by rotation
}

TEST_CASE("observer sees every entry in seq order")
{
    testutil::TempDir dir;
    MessageLog log({dir.path() / "log.jsonl", 100, 1 << 20});
    std::vector<std::uint64_t> seen;
    log.set_observer([&](const LogEntry& e, const std::string& line) {
        CHECK(!line.empty());
        seen.push_back(e.seq);
    });
    for (int i = 0; i < 5; ++i)
        log.append(make_entry(Direction::Out, "/obs"));
    REQUIRE(seen.size() == 5);
    for (std::size_t i = 1; i < seen.size(); ++i)
        CHECK(seen[i] == seen[i - 1] + 1);
}
