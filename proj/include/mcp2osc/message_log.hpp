#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcp2osc/osc_types.hpp"
#include "mcp2osc/util.hpp"

namespace mcp2osc {

enum class Direction { In, Out };
const char* to_string(Direction d);

// One logged OSC message (bundles are flattened to one entry per contained
// message; an empty bundle keeps a single "#bundle" marker entry, and a
// datagram that failed to decode keeps a raw entry with the error text).
struct LogEntry {
    std::uint64_t seq = 0;
    Direction direction = Direction::In;
    WallClock::time_point wall_time{};  // truncated to ms on append
    std::uint64_t mono_ns = 0;          // monotonic, non-decreasing with seq
    std::string endpoint;               // source for in, destination for out
    std::string address;                // "" for decode errors, "#bundle" for empty bundles
    std::vector<OscArgument> args;
    std::string decode_error;           // empty when decoded cleanly
};

// Flattens a packet into log entries sharing the same metadata.
std::vector<LogEntry> entries_for_packet(const OscPacket& packet, Direction dir,
                                         const std::string& endpoint,
                                         WallClock::time_point wall, std::uint64_t mono_ns);

nlohmann::json log_entry_to_json(const LogEntry& entry);
std::optional<LogEntry> log_entry_from_json(const nlohmann::json& j);

struct StatsSummary {
    std::uint64_t total = 0;
    double window_s = 0;
    std::map<std::string, std::uint64_t> per_address;
    std::vector<std::string> sources;
    std::optional<WallClock::time_point> first, last;
    double rate = 0; // messages per second over the window

    nlohmann::json to_json() const;
};

enum class ExportFormat { Jsonl, Csv };

// Append-only JSONL log with an in-memory ring for windowed queries. The file
// is the source of truth: reopening replays the tail back into memory.
class MessageLog {
public:
    struct Config {
        std::filesystem::path path = "./mcp2osc-log.jsonl";
        std::size_t ring_capacity = 10000;
        std::uint64_t rotate_bytes = 64ull * 1024 * 1024;
    };

    explicit MessageLog(Config config);
    ~MessageLog();

    // Assigns the next seq, persists one line, flushes. Caller-provided
    // timestamps are kept (mono clamped to stay non-decreasing); zero values
    // are filled from the clocks.
    std::uint64_t append(LogEntry entry);

    std::vector<LogEntry> query_window(double window_s,
                                       const std::optional<std::string>& address_filter = {},
                                       std::optional<Direction> direction = {}) const;
    StatsSummary stats(double window_s) const;
    std::string export_window(double window_s, ExportFormat format) const;

    std::uint64_t count(Direction d) const;
    std::uint64_t decode_error_count() const;
    std::uint64_t file_size_bytes() const;
    bool degraded() const;
    std::uint64_t last_seq() const;
    const std::filesystem::path& path() const { return config_.path; }

    // Invoked under the append lock for every new entry, with the serialized
    // line; used by the live status feed.
    void set_observer(std::function<void(const LogEntry&, const std::string& line)> observer);

    // Tail currently held in memory (testing / replay verification).
    std::vector<LogEntry> tail() const;

private:
    void load_existing();
    void rotate_locked();

    Config config_;
    mutable std::mutex mutex_;
    std::ofstream file_;
    std::uint64_t file_bytes_ = 0;
    std::uint64_t seq_ = 0;
    std::uint64_t mono_high_water_ = 0;
    std::uint64_t count_in_ = 0, count_out_ = 0, count_decode_errors_ = 0;
    bool degraded_ = false;
    std::deque<LogEntry> ring_;
    std::function<void(const LogEntry&, const std::string&)> observer_;
};

} // namespace mcp2osc
